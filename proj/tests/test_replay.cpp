#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gmm/replay.hpp"
#include "support.hpp"

#include <algorithm>
#include <sstream>

using namespace gmm;
using gmm::test::R;

namespace {

const std::string kFixtures = GMM_FIXTURE_DIR;

std::vector<ParseIssue> issues_of(const std::string& text)
{
    std::istringstream in(text);
    try
    {
        parse_log(in);
    }
    catch (const ReplayParseError& e)
    {
        return e.issues();
    }
    return {};
}

bool mentions(const std::vector<ParseIssue>& issues, const std::string& needle)
{
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ParseIssue& i) { return i.message.find(needle) != std::string::npos; });
}

const std::string kHeader = std::string(kReplayHeader) + "\n";

ScenarioConfig cpmm_config()
{
    return ScenarioConfig{};
}

ScenarioConfig beta_config(const char* beta)
{
    ScenarioConfig c;
    c.algorithm = Algorithm::Gmm;
    c.external_reserve_multiple = R(beta);
    return c;
}

ScenarioConfig split_config(unsigned n)
{
    ScenarioConfig c;
    c.algorithm = Algorithm::Gmm;
    c.split_count = n;
    return c;
}

std::vector<ReplayRecord> synthetic(std::uint64_t seed, std::size_t attacks = 100)
{
    SyntheticOptions o;
    o.seed = seed;
    o.attacks = attacks;
    return generate_synthetic_log(o);
}

ReplayRecord normal(std::int64_t block, const std::string& pair, const char* px, const char* py)
{
    ReplayRecord r;
    r.block_number = block;
    r.pair_id = pair;
    r.amount_in = R("1");
    r.reserve_x_before = R("100");
    r.reserve_y_before = R("400000");
    if (px)
        r.price_usd_x = R(px);
    if (py)
        r.price_usd_y = R(py);
    return r;
}

} // namespace

TEST_CASE("toy sandwich fixture parses into one attack")
{
    const auto records = parse_log_file(kFixtures + "/toy_part2.csv");
    REQUIRE(records.size() == 3);
    CHECK(records[0].role == Role::Frontrun);
    CHECK(records[2].amount_in == R("13.0435"));
    CHECK(records[1].line == 3);
    const auto attacks = collect_attacks(records);
    REQUIRE(attacks.size() == 1);
    CHECK(attacks[0].attack_id == "A1");
    CHECK(attacks[0].victim_dx == 40000);
    CHECK(attacks[0].victim_count == 1);
    CHECK(attacks[0].reserve_in == 400000);
    CHECK(attacks[0].sent == Asset::Y);
    CHECK(attacks[0].price_usd_sent == std::optional<Rational>(R("1")));
}

TEST_CASE("counterfactual profits on the toy fixture")
{
    const auto records = parse_log_file(kFixtures + "/toy_part2.csv");
    auto s = run_counterfactual(records, cpmm_config());
    CHECK(s.attack_count == 1);
    CHECK(s.total_attacker_profit_native == doctest::Approx(10093.457943925234).epsilon(1e-12));
    REQUIRE(s.total_attacker_profit_usd.has_value());
    CHECK(*s.total_attacker_profit_usd == doctest::Approx(10093.457943925234).epsilon(1e-12));
    CHECK(s.pct_negative_profit == 0);

    s = run_counterfactual(records, beta_config("1"));
    CHECK(s.total_attacker_profit_native == doctest::Approx(810.8108108108108).epsilon(1e-12));
    CHECK(s.attacks[0].profit_exact ==
          sandwich_profit_gmm_closed(R("400000"), R("800000"), R("40000"), R("60000")));

    const auto f = run_counterfactual(records, parse_scenario_file(kFixtures + "/gmm_n2_float.json"));
    CHECK_FALSE(f.total_attacker_profit_native_exact.has_value());
    CHECK(f.total_attacker_profit_native ==
          doctest::Approx(to_double(sandwich_profit_nsplit(R("400000"), 2, R("40000"), R("60000")))).epsilon(1e-12));
}

TEST_CASE("empty log with header")
{
    std::istringstream in(kHeader);
    CHECK(parse_log(in).empty());
    const auto s = run_counterfactual({}, cpmm_config());
    CHECK(s.attack_count == 0);
    CHECK(s.pct_negative_profit == 0);
}

TEST_CASE("parse errors are reported with line numbers")
{
    auto issues = issues_of("block_number,tx_index,pair_id,role\n");
    REQUIRE(issues.size() == 1);
    CHECK(mentions(issues, "missing column"));
    CHECK(mentions(issues, "reserve_y_before"));

    CHECK(mentions(issues_of(""), "missing header"));

    issues = issues_of(kHeader + "1,0,P,normal,,X,abc,100,400000,,\n1,1,P,normal,,X,1,100,400000,,\n");
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].line == 2);
    CHECK(mentions(issues, "amount_in 'abc'"));

    CHECK(mentions(issues_of(kHeader + "1,0,P,normal,,X,1 000,100,400000,,\n"), "not a decimal"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,normal,,Z,1,100,400000,,\n"), "token_in"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,trader,,X,1,100,400000,,\n"), "unknown role"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,normal,,X,1,100\n"), "expected 11 fields"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,normal,,X,0,100,400000,,\n"), "must be positive"));

}

TEST_CASE("attack validation errors")
{
    std::vector<ParseIssue> issues;
    try
    {
        parse_log_file(kFixtures + "/bad_backrun.csv");
    }
    catch (const ReplayParseError& e)
    {
        issues = e.issues();
    }
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].line == 4);
    CHECK(mentions(issues, "attack 'A7'"));

    try
    {
        parse_log_file(kFixtures + "/unsorted.csv");
        FAIL("unsorted log accepted");
    }
    catch (const ReplayParseError& e)
    {
        CHECK(mentions(e.issues(), "not sorted"));
        CHECK(e.issues()[0].line == 3);
    }

    // Dangling attack: a front-run with no back-run.
    CHECK(mentions(issues_of(kHeader + "1,0,P,frontrun,B,Y,100,100,400000,,\n"), "attack 'B' needs exactly one"));
    // Victim of the opposite direction inside the bracket.
    CHECK(mentions(issues_of(kHeader + "1,0,P,frontrun,B,Y,60000,100,400000,,\n"
                                       "1,1,P,victim,B,X,1,86.9565,460000,,\n"
                                       "1,2,P,backrun,B,X,13.0435,87.9565,455000,,\n"),
                   "opposite direction"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,frontrun,B,Y,60000,100,400000,,\n"
                                       "1,2,P,backrun,B,Y,13.0435,80,500000,,\n"),
                   "same asset"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,frontrun,B,Y,60000,100,400000,,\n"
                                       "1,1,Q,backrun,B,X,13.0435,80,500000,,\n"),
                   "spans pairs"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,normal,B,Y,1,100,400000,,\n"), "normal trade carries"));
    CHECK(mentions(issues_of(kHeader + "1,0,P,victim,,Y,1,100,400000,,\n"), "without attack_id"));
    // Every problem is reported, not only the first.
    CHECK(issues_of(kHeader + "x,0,P,normal,,X,1,100,400000,,\n1,y,P,normal,,X,1,100,400000,,\n").size() == 2);
}

TEST_CASE("write_log round-trips exactly")
{
    const auto records = synthetic(5, 20);
    std::stringstream buf;
    write_log(buf, records);
    const auto back = parse_log(buf);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i)
    {
        CHECK(back[i].amount_in == records[i].amount_in);
        CHECK(back[i].reserve_x_before == records[i].reserve_x_before);
        CHECK(back[i].price_usd_x == records[i].price_usd_x);
        CHECK(back[i].attack_id == records[i].attack_id);
        CHECK(back[i].role == records[i].role);
    }
}

TEST_CASE("synthetic logs are deterministic and valid")
{
    const auto a = synthetic(42);
    const auto b = synthetic(42);
    std::stringstream sa, sb;
    write_log(sa, a);
    write_log(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(collect_attacks(a).size() == 100);
    const auto c = synthetic(43);
    std::stringstream sc;
    write_log(sc, c);
    CHECK(sc.str() != sa.str());
    // The log must survive validation.
    std::istringstream in(sa.str());
    CHECK(parse_log(in).size() == a.size());
}

TEST_CASE("summary does not depend on record order")
{
    auto records = synthetic(7);
    const auto base = to_json(run_counterfactual(records, beta_config("0.5")));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 3; ++i)
    {
        std::shuffle(records.begin(), records.end(), rng);
        CHECK(to_json(run_counterfactual(records, beta_config("0.5"))) == base);
    }
}

TEST_CASE("beta 0 and n 1 reproduce the CPMM scenario")
{
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        const auto records = synthetic(seed);
        const auto cp = run_counterfactual(records, cpmm_config());
        const auto b0 = run_counterfactual(records, beta_config("0"));
        const auto n1 = run_counterfactual(records, split_config(1));
        CHECK(b0.total_attacker_profit_native_exact == cp.total_attacker_profit_native_exact);
        CHECK(n1.total_attacker_profit_native_exact == cp.total_attacker_profit_native_exact);
        CHECK(b0.negative_count == cp.negative_count);
        CHECK(n1.negative_count == cp.negative_count);
    }
}

TEST_CASE("totals shrink as beta and n grow")
{
    const auto records = synthetic(11);
    Rational prev = parse_decimal("1e30");
    for (const char* beta : {"0", "0.01", "0.05", "0.1", "0.5", "1", "1.5", "10"})
    {
        const auto s = run_counterfactual(records, beta_config(beta));
        Rational total(0);
        for (const auto& o : s.attacks)
            total += o.profit_exact;
        CHECK(total <= prev);
        prev = total;
    }
    prev = parse_decimal("1e30");
    for (unsigned n = 1; n <= 5; ++n)
    {
        const auto s = run_counterfactual(records, split_config(n));
        Rational total(0);
        for (const auto& o : s.attacks)
            total += o.profit_exact;
        CHECK(total <= prev);
        prev = total;
    }
}

TEST_CASE("float64 replay agrees with rational replay")
{
    const auto records = synthetic(13);
    auto config = beta_config("0.1");
    const auto exact = run_counterfactual(records, config);
    config.arithmetic = Arithmetic::Float64;
    const auto fast = run_counterfactual(records, config);
    CHECK(fast.attack_count == exact.attack_count);
    CHECK(fast.negative_count == exact.negative_count);
    CHECK(fast.total_attacker_profit_native ==
          doctest::Approx(exact.total_attacker_profit_native).epsilon(1e-9));
    for (std::size_t i = 0; i < exact.attacks.size(); ++i)
        CHECK(fast.attacks[i].profit == doctest::Approx(exact.attacks[i].profit).epsilon(1e-9).scale(1e-6));
}

TEST_CASE("pairs without USD prices are excluded in USD valuation")
{
    const auto records = synthetic(17);
    std::set<std::string> distinct;
    for (const auto& r : records)
        distinct.insert(r.pair_id);

    auto config = cpmm_config();
    const auto native = run_counterfactual(records, config);
    CHECK(native.excluded_pairs == 0);
    CHECK(native.included_pairs == distinct.size());
    CHECK_FALSE(native.total_attacker_profit_usd.has_value());

    config.valuation = Valuation::Usd;
    const auto usd = run_counterfactual(records, config);
    CHECK(usd.excluded_pairs >= 1);
    CHECK(usd.excluded_pairs + usd.included_pairs == distinct.size());
    REQUIRE(usd.total_attacker_profit_usd.has_value());
    CHECK(usd.attack_count < native.attack_count);
    for (const auto& p : usd.pairs)
        if (p.excluded)
        {
            CHECK(p.exclusion_reason == "missing USD price");
            CHECK(p.attack_count == 0);
        }
}

TEST_CASE("percentage of negative profits")
{
    const auto records = synthetic(19);
    const auto s = run_counterfactual(records, beta_config("10"));
    std::size_t negative = 0;
    for (const auto& o : s.attacks)
        negative += o.profit_exact < 0 ? 1 : 0;
    CHECK(s.negative_count == negative);
    CHECK(s.pct_negative_profit == doctest::Approx(double(negative) / double(s.attack_count)));
}

TEST_CASE("scenario documents")
{
    auto c = parse_scenario_file(kFixtures + "/gmm_beta1.json");
    CHECK(c.algorithm == Algorithm::Gmm);
    CHECK(c.external_reserve_multiple == std::optional<Rational>(Rational(1)));
    CHECK_FALSE(c.split_count.has_value());
    c = parse_scenario(nlohmann::json::parse(R"({"algorithm": "gmm", "external_reserve_multiple": 0.1})"));
    CHECK(*c.external_reserve_multiple == Rational(1, 10));
    c = parse_scenario(nlohmann::json::parse(R"({"algorithm": "gmm", "split_count": 3, "seed": 9})"));
    CHECK(c.split_count == std::optional<unsigned>(3));
    CHECK(c.seed == 9);
    CHECK(c.arithmetic == Arithmetic::Rational);
    CHECK_THROWS_AS(parse_scenario_file(kFixtures + "/bad_both.json"), DomainError);
    CHECK_THROWS_AS(parse_scenario_file(kFixtures + "/bad_unknown.json"), DomainError);
    CHECK_THROWS_AS(parse_scenario(nlohmann::json::parse(R"({"algorithm": "gmm"})")), DomainError);
    CHECK_THROWS_AS(parse_scenario(nlohmann::json::parse(R"({"algorithm": "cpmm", "split_count": 2})")),
                    DomainError);
    CHECK_THROWS_AS(parse_scenario(nlohmann::json::parse(R"({"algorithm": "gmm", "split_count": 0})")), DomainError);
    CHECK_THROWS_AS(
        parse_scenario(nlohmann::json::parse(R"({"algorithm": "gmm", "external_reserve_multiple": -1})")),
        DomainError);
    CHECK_THROWS_AS(parse_scenario(nlohmann::json::parse(R"({"algorithm": "ngmm"})")), DomainError);
    CHECK_THROWS_AS(parse_scenario(nlohmann::json::parse(R"({"algorithm": "cpmm", "arithmetic": "decimal"})")),
                    DomainError);
}

TEST_CASE("attack CSV lists every included attack")
{
    const auto s = run_counterfactual(parse_log_file(kFixtures + "/toy_part2.csv"), cpmm_config());
    std::ostringstream out;
    write_attack_csv(out, s);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "attack_id,pair_id,block_number,tx_index,token_in,attack_dx,victim_dx,victim_count,reserve_in,profit,"
                  "profit_exact,profit_usd");
    std::getline(in, line);
    CHECK(line.rfind("A1,ETH-UST,100,0,Y,60000,40000,1,400000,10093.4579439252", 0) == 0);
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("IL report examples")
{
    const std::vector<ReplayRecord> single{normal(1, "P", "4000", "1"), normal(2, "P", "3000", "1")};
    auto rep = il_portfolio_report(single, {0.5}, 10);
    REQUIRE(rep.pairs.size() == 1);
    CHECK(rep.pairs[0].il_cpmm == doctest::Approx(0.010256681389212763).epsilon(1e-12));
    CHECK(rep.pairs[0].volatility == Volatility::Low);
    CHECK(rep.pairs[0].il_gmm[0] < rep.pairs[0].il_cpmm);
    CHECK(rep.pairs[0].hold_value_usd == doctest::Approx(700000));
    CHECK(rep.low.pairs == 1);
    CHECK(rep.low.loss_cpmm_usd == doctest::Approx(0.010256681389212763 * 700000).epsilon(1e-12));

    const std::vector<ReplayRecord> wild{normal(1, "Q", "4000", "1"), normal(2, "Q", "40", "1")};
    rep = il_portfolio_report(wild, {0.5}, 10);
    CHECK(rep.pairs[0].volatility == Volatility::High);
    CHECK(rep.high.pairs == 1);

    CHECK_THROWS_AS(il_portfolio_report(single, {0.7}, 10), DomainError);
    CHECK_THROWS_AS(il_portfolio_report(single, {0.5}, 1), DomainError);
}

TEST_CASE("IL report exclusions")
{
    std::vector<ReplayRecord> records{normal(1, "ONE", "4000", "1"),     normal(2, "NOPRICE", nullptr, "1"),
                                      normal(3, "NOPRICE", "3000", nullptr), normal(4, "TINY", "1e-15", "1"),
                                      normal(5, "TINY", "1e-14", "1"),      normal(6, "OK", "10", "1"),
                                      normal(7, "OK", "12", "1")};
    const auto rep = il_portfolio_report(records, {0.1, 0.5}, 10);
    CHECK(rep.excluded.at("ONE") == "fewer than 2 trades");
    CHECK(rep.excluded.at("NOPRICE") == "missing USD prices");
    CHECK(rep.excluded.at("TINY") == "prices below epsilon");
    CHECK(rep.pairs.size() == 1);
    CHECK(rep.pairs.size() + rep.excluded.size() == 4);
}

TEST_CASE("IL totals are additive across pairs")
{
    const std::vector<ReplayRecord> a{normal(1, "A", "4000", "1"), normal(2, "A", "3000", "1")};
    const std::vector<ReplayRecord> b{normal(1, "B", "2", "1"), normal(3, "B", "50", "1")};
    std::vector<ReplayRecord> both{a[0], b[0], a[1], b[1]};
    const std::vector<double> alphas{0.05, 0.25, 0.5};
    const auto ra = il_portfolio_report(a, alphas, 10);
    const auto rb = il_portfolio_report(b, alphas, 10);
    const auto rab = il_portfolio_report(both, alphas, 10);
    const auto sum = [](const ClassTotals& x, const ClassTotals& y) {
        return std::make_pair(x.loss_cpmm_usd + y.loss_cpmm_usd, x.hold_value_usd + y.hold_value_usd);
    };
    CHECK(rab.low.pairs == ra.low.pairs + rb.low.pairs);
    CHECK(rab.high.pairs == ra.high.pairs + rb.high.pairs);
    CHECK(rab.low.loss_cpmm_usd == doctest::Approx(sum(ra.low, rb.low).first));
    CHECK(rab.high.loss_cpmm_usd == doctest::Approx(sum(ra.high, rb.high).first));
    CHECK(rab.high.hold_value_usd == doctest::Approx(sum(ra.high, rb.high).second));
    for (std::size_t k = 0; k < alphas.size(); ++k)
        CHECK(rab.high.loss_gmm_usd[k] ==
              doctest::Approx(ra.high.loss_gmm_usd[k] + rb.high.loss_gmm_usd[k]));
}

TEST_CASE("counterfactual totals are additive across pairs")
{
    const auto records = synthetic(23);
    const auto all = run_counterfactual(records, beta_config("1"));
    Rational sum(0);
    for (const auto& pair : all.pairs)
    {
        std::vector<ReplayRecord> only;
        for (const auto& r : records)
            if (r.pair_id == pair.pair_id)
                only.push_back(r);
        const auto s = run_counterfactual(only, beta_config("1"));
        for (const auto& o : s.attacks)
            sum += o.profit_exact;
    }
    CHECK(to_fraction_string(sum) == *all.total_attacker_profit_native_exact);
}
