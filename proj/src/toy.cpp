#include "gmm/toy.hpp"

#include "gmm/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace gmm {

namespace {

Rational R(const char* text) { return parse_decimal(text); }

Ecosystem twins() { return Ecosystem::from_reserves({{R("100"), R("400000")}, {R("100"), R("400000")}}); }

class Recorder
{
public:
    explicit Recorder(ToyReport& r) : report_(r) {}

    void check(std::string label, double expected, const Rational& actual, const char* unit, int decimals)
    {
        check(std::move(label), expected, to_double(actual), unit, decimals);
    }

    void check(std::string label, double expected, double actual, const char* unit, int decimals)
    {
        ToyCheck c{std::move(label), expected, actual, unit, decimals, false};
        c.pass = toy_within_tolerance(expected, actual, decimals);
        report_.checks.push_back(std::move(c));
    }

    void flag(std::string label, bool value)
    {
        report_.checks.push_back({std::move(label), 1, value ? 1.0 : 0.0, "bool", 0, value});
    }

    void count(std::string label, std::size_t expected, std::size_t actual, const char* unit)
    {
        report_.checks.push_back({std::move(label), static_cast<double>(expected), static_cast<double>(actual), unit, 0,
                                  expected == actual});
    }

    void pool(const std::string& label, const Pool& p, double ex, double ey, int dx, int dy)
    {
        check(label + " ETH reserve", ex, p.x(), "ETH", dx);
        check(label + " UST reserve", ey, p.y(), "UST", dy);
    }

private:
    ToyReport& report_;
};

SwapOrder send_y(std::size_t pool, const Rational& amount) { return {pool, Asset::Y, amount, SenderTag::Trader}; }
SwapOrder send_x(std::size_t pool, const Rational& amount) { return {pool, Asset::X, amount, SenderTag::Trader}; }

// ETH needed as UST input so that a constant-product pool pays out `eth`.
Rational ust_for_eth(const Pool& p, const Rational& eth) { return cpmm_in_for_out(eth, p.y(), p.x()); }

void part1(Recorder& rec)
{
    auto eco = twins();
    auto t1 = apply_swap(eco, send_y(0, R("400000") / 9), Algorithm::Cpmm);
    rec.check("trader receives", 10, t1.quote.amount_out, "ETH", 0);
    rec.pool("AMM1 after trade", t1.ecosystem.pool(0), 90, 444444, 0, 0);

    const auto& before_arb = t1.ecosystem;
    const Rational ust_in = ust_for_eth(before_arb.pool(1), R("5"));
    auto arb1 = execute_cycle(before_arb, Asset::Y, ust_in, {1, 0}, Algorithm::Cpmm);
    rec.check("arbitrage 1: 5 ETH sold to AMM1", 23392, arb1.legs[1].amount_out, "UST", 0);
    rec.check("arbitrage 1: UST sent to AMM2", 21052, arb1.legs[0].amount_in, "UST", 0);
    rec.check("arbitrage 1 profit", 2339, arb1.profit, "UST", 0);
    rec.pool("AMM1 after arbitrage 1", arb1.final_state.pool(0), 95, 421052, 0, 0);
    rec.pool("AMM2 after arbitrage 1", arb1.final_state.pool(1), 95, 421052, 0, 0);

    auto t2 = apply_swap(arb1.final_state, send_x(0, R("10")), Algorithm::Cpmm);
    rec.check("trader converts 10 ETH back", 40100, t2.quote.amount_out, "UST", 0);
    rec.pool("AMM1 after reverse trade", t2.ecosystem.pool(0), 105, 380952, 0, 0);

    const Rational ust_in2 = ust_for_eth(t2.ecosystem.pool(0), R("5"));
    auto arb2 = execute_cycle(t2.ecosystem, Asset::Y, ust_in2, {0, 1}, Algorithm::Cpmm);
    rec.check("arbitrage 2 profit", 2005, arb2.profit, "UST", 0);
    rec.pool("AMM1 restored", arb2.final_state.pool(0), 100, 400000, 0, 0);
    rec.pool("AMM2 restored", arb2.final_state.pool(1), 100, 400000, 0, 0);
    rec.check("total arbitrage profit", 4344, Rational(arb1.profit + arb2.profit), "UST", 0);

    auto best = best_two_pool_arbitrage(before_arb, Algorithm::Cpmm);
    rec.check("optimal two-pool arbitrage profit", 2339, best.profit, "UST", 0);
}

void part2(Recorder& rec)
{
    const auto eco = Ecosystem::from_reserves({{R("100"), R("400000")}});
    const SandwichSpec spec{0, Asset::Y, R("40000"), R("60000")};
    const auto s = simulate_sandwich(eco, spec, Algorithm::Cpmm);
    rec.check("frontrun receives", 13.0435, s.front.amount_out, "ETH", 4);
    rec.pool("pool after frontrun", s.trajectory[1].pool(0), 86.9565, 460000, 4, 0);
    rec.check("victim receives", 6.9565, s.victim_out, "ETH", 4);
    rec.pool("pool after victim", s.trajectory[2].pool(0), 80, 500000, 0, 0);
    const auto alone = apply_swap(eco, send_y(0, R("40000")), Algorithm::Cpmm);
    rec.check("victim without frontrun", 9.0909, alone.quote.amount_out, "ETH", 4);
    const Rational fair = ust_for_eth(eco.pool(0), s.victim_out);
    rec.check("UST needed for the victim's ETH", 29906, fair, "UST", 0);
    rec.check("victim overpayment", 10094, Rational(spec.victim_dx - fair), "UST", 0);
    rec.check("backrun receives", 70094, s.back.amount_out, "UST", 0);
    rec.check("attacker profit", 10094, s.attacker_profit, "UST", 0);
    rec.check("closed-form profit", 10094,
              sandwich_profit_cpmm_closed(R("400000"), spec.victim_dx, spec.attack_dx), "UST", 0);
}

void part3(Recorder& rec)
{
    const auto eco = Ecosystem::from_reserves({{R("100"), R("400000")}});
    const Rational r_new = R("3000");
    const auto plan = insider_optimal_trades(eco, r_new);
    const Pool& after = plan.states.back().pool(0);
    rec.pool("pool at 3,000 UST/ETH", after, 115.47, 346410.16, 2, 2);
    rec.check("hold value V0", 700000, pool_value(eco.pool(0), r_new), "UST", 0);
    rec.check("pool value V", 692820.16, pool_value(after, r_new), "UST", 2);
    rec.check("impermanent loss (trajectory)", 1.03, 100 * to_double(il_from_trajectory(eco.pool(0), after, r_new)),
              "%", 2);
    rec.check("impermanent loss (closed form)", 1.03, 100 * to_double(il_cpmm(R("4000"), r_new)), "%", 2);
}

void part4(Recorder& rec)
{
    const auto eco = Ecosystem::from_reserves({{R("90"), R("4000000") / 9}, {R("100"), R("400000")}});
    auto cycle = execute_cycle(eco, Asset::X, R("5"), {1, 0}, Algorithm::Ngmm);
    rec.check("5 ETH to AMM2 returns", 21652, cycle.legs[0].amount_out, "UST", 0);
    rec.check("UST to AMM1 returns", 5, cycle.legs[1].amount_out, "ETH", 2);
    rec.check("arbitrage net", 0, cycle.profit, "ETH", 2);
    rec.check("trader sends 10 ETH to AMM1", 42222, ngmm_out(R("10"), eco, 0), "UST", 0);
}

void part5(Recorder& rec, Algorithm alg)
{
    const auto eco = twins();
    // Amounts follow the scripted nGMM run; the same orders are replayed
    // under the requested algorithm.
    auto t1 = apply_swap(eco, send_x(0, R("10")), Algorithm::Ngmm);
    auto t2 = apply_swap(t1.ecosystem, send_x(1, R("10")), Algorithm::Ngmm);
    const std::vector<SwapOrder> orders{send_x(0, R("10")), send_x(1, R("10")), send_y(0, t1.quote.amount_out),
                                        send_y(1, t2.quote.amount_out)};
    if (alg == Algorithm::Ngmm)
    {
        auto t3 = apply_swap(t2.ecosystem, orders[2], alg);
        auto t4 = apply_swap(t3.ecosystem, orders[3], alg);
        rec.check("transaction 1 returns", 38095, t1.quote.amount_out, "UST", 0);
        rec.pool("AMM1 after transaction 1", t1.ecosystem.pool(0), 110, 361905, 0, 0);
        rec.check("transaction 2 returns", 34632, t2.quote.amount_out, "UST", 0);
        rec.pool("AMM2 after transaction 2", t2.ecosystem.pool(1), 110, 365368, 0, 0);
        rec.check("transaction 3 returns", 10.95, t3.quote.amount_out, "ETH", 2);
        rec.check("transaction 4 returns", 9.05, t4.quote.amount_out, "ETH", 2);
        rec.pool("AMM1 final", t4.ecosystem.pool(0), 99.05, 400000, 2, 0);
        rec.pool("AMM2 final", t4.ecosystem.pool(1), 100.95, 400000, 2, 0);
    }
    const auto rep = replay_exploit_sequence(eco, orders, alg);
    std::size_t exploited = 0;
    for (const auto& d : rep.deltas)
        exploited += d.exploited ? 1 : 0;
    if (alg == Algorithm::Ngmm)
    {
        rec.check("AMM1 net ETH", -0.95, rep.deltas[0].dx, "ETH", 2);
        rec.check("AMM1 net UST", 0, rep.deltas[0].dy, "UST", 0);
        rec.check("AMM2 net ETH", 0.95, rep.deltas[1].dx, "ETH", 2);
        rec.count("pools left strictly worse off", 1, exploited, "pools");
    }
    else
    {
        rec.count("pools left strictly worse off", 0, exploited, "pools");
    }
}

void part6(Recorder& rec)
{
    const auto eco = twins();
    const Rational ust = R("400000") / 9;
    const auto q = gmm_out(ust, eco.relabeled(), 0);
    rec.check("trader receives", 10, q.amount_out, "ETH", 2);
    rec.check("nGMM alternative", 10.53, ngmm_out(ust, eco.relabeled(), 0), "ETH", 2);
    rec.flag("trade is divergent", q.classification == SwapClass::Divergent);
    auto t1 = apply_swap(eco, send_y(0, ust), Algorithm::Gmm);
    rec.pool("AMM1 after trade", t1.ecosystem.pool(0), 90, 444444, 0, 0);

    const auto& s = t1.ecosystem;
    rec.check("5 ETH to AMM1, CPMM alternative", 23392, cpmm_out(R("5"), s.pool(0).x(), s.pool(0).y()), "UST", 0);
    auto cycle = execute_cycle(s, Asset::X, R("5"), {0, 1}, Algorithm::Gmm);
    rec.check("5 ETH to AMM1 returns", 21652, cycle.legs[0].amount_out, "UST", 0);
    rec.pool("AMM1 after arbitrage leg", execute(s, send_x(0, R("5")), Algorithm::Gmm).ecosystem.pool(0), 95, 422792,
             0, 0);
    const Pool& amm2 = s.pool(1);
    rec.check("UST to AMM2, CPMM alternative", 5.13, cpmm_out(cycle.legs[1].amount_in, amm2.y(), amm2.x()), "ETH", 2);
    rec.check("UST to AMM2 returns", 5, cycle.legs[1].amount_out, "ETH", 2);
    rec.check("arbitrage net", 0, cycle.profit, "ETH", 2);
    const auto best = best_two_pool_arbitrage(s, Algorithm::Gmm);
    rec.flag("best arbitrage profit is not positive", !(best.profit > 0));

    auto rev = apply_swap(s, send_x(0, R("10")), Algorithm::Gmm);
    rec.check("10 ETH to AMM1 returns", 42222, rev.quote.amount_out, "UST", 0);
    rec.flag("reverse trade is convergent", rev.quote.classification == SwapClass::Convergent);
    rec.pool("AMM1 after reverse trade", rev.ecosystem.pool(0), 100, 402222, 0, 0);
}

void part7(Recorder& rec)
{
    const auto eco = twins();
    const SandwichSpec spec{0, Asset::Y, R("40000"), R("60000")};
    const auto s = simulate_sandwich(eco, spec, Algorithm::Gmm);
    rec.check("frontrun receives", 13.0435, s.front.amount_out, "ETH", 4);
    rec.pool("AMM1 after frontrun", s.trajectory[1].pool(0), 86.9565, 460000, 4, 0);
    rec.check("victim receives", 6.9565, s.victim_out, "ETH", 4);
    rec.pool("AMM1 after victim", s.trajectory[2].pool(0), 80, 500000, 0, 0);
    rec.check("backrun receives", 60811, s.back.amount_out, "UST", 0);
    rec.check("attacker profit", 811, s.attacker_profit, "UST", 0);
    rec.check("closed-form profit", 811,
              sandwich_profit_gmm_closed(R("400000"), R("800000"), spec.victim_dx, spec.attack_dx), "UST", 0);
    rec.pool("AMM2 untouched", s.trajectory[3].pool(1), 100, 400000, 0, 0);

    const auto reb = Ecosystem::from_reserves({{R("90"), R("440000")}, {R("210"), R("760000")}});
    const auto out = gmm_rebal_quote(R("1"), reb, 1, true);
    rec.count("rebalancing transfers", 1, out.transfers.size(), "count");
    if (!out.transfers.empty())
    {
        rec.check("transfer size", 10, out.transfers[0].amount_sent, "ETH", 0);
        rec.check("transfer price", 40000, out.transfers[0].amount_received, "UST", 0);
    }
    rec.pool("AMM1 rebalanced", out.rebalanced.pool(0), 100, 400000, 0, 0);
    rec.pool("AMM2 rebalanced", out.rebalanced.pool(1), 200, 800000, 0, 0);
    rec.check("trader receives", 3980.10, out.quote.amount_out, "UST", 2);
}

void part8(Recorder& rec)
{
    const auto eco = twins();
    const Rational ust = ust_for_eth(eco.pool(0), R("30"));
    auto t = apply_swap(eco, send_y(0, ust), Algorithm::Gmm);
    rec.check("first buyer receives", 30, t.quote.amount_out, "ETH", 0);
    rec.pool("GMM1 after 30 ETH purchase", t.ecosystem.pool(0), 70, 571429, 0, 0);

    const Rational r_new = t.ecosystem.pool(0).ratio();
    const auto b = ideal_benchmark_il(R("4000"), r_new, R("0.5"));
    rec.check("large pool loss matches CPMM loss", b.il_cpmm_closed, b.il_large_trajectory, "fraction", 9);
    rec.check("small pool loss matches closed form", b.il_small_closed, b.il_small_trajectory, "fraction", 9);
    rec.flag("small pool loses less than CPMM", b.il_small_trajectory < b.il_cpmm_closed);
}

const char* title_of(int part)
{
    switch (part)
    {
    case 1: return "Arbitrage between CPMM pools";
    case 2: return "Sandwich attack on a CPMM pool";
    case 3: return "Impermanent loss of a CPMM pool";
    case 4: return "Naive global pricing";
    case 5: return "Exploit sequence against naive global pricing";
    case 6: return "GMM pricing and arbitrage";
    case 7: return "GMM sandwich attack and rebalancing";
    case 8: return "GMM impermanent loss (benchmark-consistent checks)";
    default: return "";
    }
}

} // namespace

bool ToyReport::pass() const
{
    for (const auto& c : checks)
        if (!c.pass)
            return false;
    return !checks.empty();
}

bool toy_within_tolerance(double expected, double actual, int decimals)
{
    const double diff = std::fabs(actual - expected);
    const double unit = std::pow(10.0, -decimals);
    return diff <= unit * (1 + 1e-9) || diff <= 1e-3 * std::fabs(expected);
}

ToyReport run_toy_part(int part, std::optional<Algorithm> alg)
{
    if (part < 1 || part > 8)
        throw DomainError("toy part must be between 1 and 8");
    ToyReport report;
    report.part = part;
    report.title = title_of(part);
    Recorder rec(report);
    const auto only = [&](Algorithm fixed) {
        if (alg && *alg != fixed)
            throw DomainError("part " + std::to_string(part) + " runs under " + std::string(to_string(fixed)) +
                              " only");
        report.algorithm = std::string(to_string(fixed));
    };
    switch (part)
    {
    case 1: only(Algorithm::Cpmm); part1(rec); break;
    case 2: only(Algorithm::Cpmm); part2(rec); break;
    case 3: only(Algorithm::Cpmm); part3(rec); break;
    case 4: only(Algorithm::Ngmm); part4(rec); break;
    case 5: {
        const Algorithm a = alg.value_or(Algorithm::Ngmm);
        if (a != Algorithm::Ngmm && a != Algorithm::Gmm)
            throw DomainError("part 5 runs under ngmm or gmm");
        report.algorithm = std::string(to_string(a));
        part5(rec, a);
        break;
    }
    case 6: only(Algorithm::Gmm); part6(rec); break;
    case 7: only(Algorithm::Gmm); part7(rec); break;
    case 8: only(Algorithm::Gmm); part8(rec); break;
    }
    return report;
}

std::string format_toy_report(const ToyReport& r)
{
    std::ostringstream out;
    out << "Part " << r.part << " (" << r.algorithm << "): " << r.title << '\n';
    std::size_t width = 5;
    for (const auto& c : r.checks)
        width = std::max(width, c.label.size());
    char buf[512];
    std::snprintf(buf, sizeof buf, "  %-*s  %16s  %16s  %-8s  %s\n", static_cast<int>(width), "check", "expected",
                  "actual", "unit", "status");
    out << buf;
    for (const auto& c : r.checks)
    {
        const int shown = std::max(c.decimals, 2);
        std::snprintf(buf, sizeof buf, "  %-*s  %16s  %16s  %-8s  %s\n", static_cast<int>(width), c.label.c_str(),
                      to_display(c.expected, c.decimals).c_str(), to_display(c.actual, shown).c_str(),
                      c.unit.c_str(), c.pass ? "pass" : "FAIL");
        out << buf;
    }
    out << (r.pass() ? "PASS" : "FAIL") << '\n';
    return out.str();
}

} // namespace gmm
