#include "gmm/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace gmm {

namespace {

const std::vector<std::string>& header_columns()
{
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> out;
        std::stringstream ss(kReplayHeader);
        std::string c;
        while (std::getline(ss, c, ','))
            out.push_back(c);
        return out;
    }();
    return cols;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

void strip_cr(std::string& s)
{
    if (!s.empty() && s.back() == '\r')
        s.pop_back();
}

bool parse_int(const std::string& s, std::int64_t& out)
{
    if (s.empty())
        return false;
    std::size_t pos = 0;
    try
    {
        out = std::stoll(s, &pos);
    }
    catch (const std::exception&)
    {
        return false;
    }
    return pos == s.size();
}

std::optional<Role> parse_role(const std::string& s)
{
    if (s == "normal")
        return Role::Normal;
    if (s == "frontrun")
        return Role::Frontrun;
    if (s == "victim")
        return Role::Victim;
    if (s == "backrun")
        return Role::Backrun;
    return std::nullopt;
}

auto position(const ReplayRecord& r) { return std::make_tuple(r.block_number, r.tx_index); }

const Rational& reserve_of(const ReplayRecord& r, Asset a) { return a == Asset::X ? r.reserve_x_before : r.reserve_y_before; }

void validate_attacks(const std::vector<ReplayRecord>& records, std::vector<ParseIssue>& issues)
{
    std::map<std::string, std::vector<const ReplayRecord*>> groups;
    for (const auto& r : records)
        if (r.role != Role::Normal)
            groups[r.attack_id].push_back(&r);

    for (const auto& [id, members] : groups)
    {
        const ReplayRecord* front = nullptr;
        const ReplayRecord* back = nullptr;
        std::size_t fronts = 0;
        std::size_t backs = 0;
        for (const auto* r : members)
        {
            if (r->role == Role::Frontrun)
            {
                front = r;
                ++fronts;
            }
            else if (r->role == Role::Backrun)
            {
                back = r;
                ++backs;
            }
        }
        const std::size_t anchor = members.front()->line;
        if (fronts != 1 || backs != 1)
        {
            issues.push_back({anchor, "attack '" + id + "' needs exactly one frontrun and one backrun (found " +
                                          std::to_string(fronts) + " and " + std::to_string(backs) + ")"});
            continue;
        }
        bool ok = true;
        for (const auto* r : members)
        {
            if (r->pair_id != front->pair_id)
            {
                issues.push_back({r->line, "attack '" + id + "' spans pairs '" + front->pair_id + "' and '" +
                                               r->pair_id + "'"});
                ok = false;
            }
            if (r->role == Role::Victim)
            {
                if (!(position(*front) < position(*r) && position(*r) < position(*back)))
                {
                    issues.push_back({r->line, "victim of attack '" + id + "' lies outside its bracket"});
                    ok = false;
                }
                if (r->token_in != front->token_in)
                {
                    issues.push_back({r->line, "victim of attack '" + id +
                                                   "' trades the opposite direction (mixed-direction brackets "
                                                   "are not supported)"});
                    ok = false;
                }
            }
        }
        if (!(position(*front) < position(*back)))
        {
            issues.push_back({back->line, "backrun of attack '" + id + "' precedes its frontrun"});
            ok = false;
        }
        if (back->token_in == front->token_in)
        {
            issues.push_back({back->line, "backrun of attack '" + id + "' sends the same asset as its frontrun"});
            ok = false;
        }
        if (!ok)
            continue;
        const Asset sent = front->token_in;
        const Rational expected =
            cpmm_out(front->amount_in, reserve_of(*front, sent), reserve_of(*front, other(sent)));
        const double rel = to_double(Rational(abs(back->amount_in - expected) / expected));
        if (!(rel <= kBackrunTolerance))
        {
            issues.push_back({back->line, "backrun input of attack '" + id + "' (" +
                                              to_full_precision(to_double(back->amount_in)) +
                                              ") differs from the frontrun output (" +
                                              to_full_precision(to_double(expected)) + ")"});
        }
    }
}

} // namespace

std::string_view to_string(Role r)
{
    switch (r)
    {
    case Role::Normal: return "normal";
    case Role::Frontrun: return "frontrun";
    case Role::Victim: return "victim";
    case Role::Backrun: return "backrun";
    }
    return "?";
}

ReplayParseError::ReplayParseError(std::vector<ParseIssue> issues)
    : std::runtime_error([&] {
          std::string msg = "replay log rejected:";
          for (const auto& i : issues)
              msg += (i.line ? "\n  line " + std::to_string(i.line) + ": " : "\n  ") + i.message;
          return msg;
      }()),
      issues_(std::move(issues))
{
}

std::vector<ReplayRecord> parse_log(std::istream& in)
{
    std::vector<ParseIssue> issues;
    std::vector<ReplayRecord> records;
    std::string line;
    if (!std::getline(in, line))
        throw ReplayParseError({{0, "missing header"}});
    strip_cr(line);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
    if (line != kReplayHeader)
    {
        const auto got = split_csv_line(line);
        std::string missing;
        for (const auto& c : header_columns())
            if (std::find(got.begin(), got.end(), c) == got.end())
                missing += (missing.empty() ? "" : ", ") + c;
        throw ReplayParseError({{1, missing.empty() ? "header columns must appear exactly as: " +
                                                          std::string(kReplayHeader)
                                                    : "missing column(s): " + missing}});
    }

    const std::size_t ncols = header_columns().size();
    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        strip_cr(line);
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != ncols)
        {
            issues.push_back({lineno, "expected " + std::to_string(ncols) + " fields, found " +
                                          std::to_string(f.size())});
            continue;
        }
        ReplayRecord r;
        r.line = lineno;
        bool ok = true;
        const auto bad = [&](const std::string& msg) {
            issues.push_back({lineno, msg});
            ok = false;
        };
        if (!parse_int(f[0], r.block_number) || r.block_number < 0)
            bad("block_number '" + f[0] + "' is not a nonnegative integer");
        if (!parse_int(f[1], r.tx_index) || r.tx_index < 0)
            bad("tx_index '" + f[1] + "' is not a nonnegative integer");
        r.pair_id = f[2];
        if (r.pair_id.empty())
            bad("empty pair_id");
        if (auto role = parse_role(f[3]))
            r.role = *role;
        else
            bad("unknown role '" + f[3] + "'");
        r.attack_id = f[4];
        if (ok && r.role == Role::Normal && !r.attack_id.empty())
            bad("normal trade carries attack_id '" + r.attack_id + "'");
        if (ok && r.role != Role::Normal && r.attack_id.empty())
            bad(std::string(to_string(r.role)) + " without attack_id");
        if (f[5] == "X")
            r.token_in = Asset::X;
        else if (f[5] == "Y")
            r.token_in = Asset::Y;
        else
            bad("token_in '" + f[5] + "' must be X or Y");

        const auto decimal = [&](const std::string& text, const char* name, Rational& out, bool strictly_positive) {
            try
            {
                out = parse_decimal(text);
            }
            catch (const DomainError&)
            {
                bad(std::string(name) + " '" + text + "' is not a decimal number");
                return;
            }
            if (strictly_positive ? !(out > 0) : out < 0)
                bad(std::string(name) + " must be " + (strictly_positive ? "positive" : "nonnegative"));
        };
        decimal(f[6], "amount_in", r.amount_in, true);
        decimal(f[7], "reserve_x_before", r.reserve_x_before, true);
        decimal(f[8], "reserve_y_before", r.reserve_y_before, true);
        if (!f[9].empty())
        {
            Rational p;
            decimal(f[9], "price_usd_x", p, false);
            r.price_usd_x = p;
        }
        if (!f[10].empty())
        {
            Rational p;
            decimal(f[10], "price_usd_y", p, false);
            r.price_usd_y = p;
        }
        if (!ok)
            continue;
        if (!records.empty() && !(position(records.back()) < position(r)))
        {
            issues.push_back({lineno, "records are not sorted by (block_number, tx_index): " +
                                          std::to_string(r.block_number) + "/" + std::to_string(r.tx_index) +
                                          " follows " + std::to_string(records.back().block_number) + "/" +
                                          std::to_string(records.back().tx_index)});
            continue;
        }
        records.push_back(std::move(r));
    }
    if (issues.empty())
        validate_attacks(records, issues);
    if (!issues.empty())
    {
        std::stable_sort(issues.begin(), issues.end(),
                         [](const ParseIssue& a, const ParseIssue& b) { return a.line < b.line; });
        throw ReplayParseError(std::move(issues));
    }
    return records;
}

std::vector<ReplayRecord> parse_log_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ReplayParseError({{0, "cannot open '" + path + "'"}});
    return parse_log(in);
}

namespace {

std::string decimal_text(const Rational& v)
{
    // Exact when the denominator divides a power of ten, else 18 significant digits.
    Integer den = boost::multiprecision::denominator(v);
    unsigned twos = 0;
    unsigned fives = 0;
    while (den % 2 == 0)
    {
        den /= 2;
        ++twos;
    }
    while (den % 5 == 0)
    {
        den /= 5;
        ++fives;
    }
    if (den != 1)
        return to_full_precision(to_double(v));
    const unsigned digits = std::max(twos, fives);
    const Integer scale = boost::multiprecision::pow(Integer(10), digits);
    const Integer scaled = boost::multiprecision::numerator(v) * scale / boost::multiprecision::denominator(v);
    std::string s = Integer(boost::multiprecision::abs(scaled)).str();
    if (digits > 0)
    {
        if (s.size() <= digits)
            s.insert(0, digits - s.size() + 1, '0');
        s.insert(s.size() - digits, ".");
    }
    return (scaled < 0 ? "-" : "") + s;
}

} // namespace

void write_log(std::ostream& out, const std::vector<ReplayRecord>& records)
{
    out << kReplayHeader << '\n';
    for (const auto& r : records)
    {
        out << r.block_number << ',' << r.tx_index << ',' << r.pair_id << ',' << to_string(r.role) << ','
            << r.attack_id << ',' << to_string(r.token_in) << ',' << decimal_text(r.amount_in) << ','
            << decimal_text(r.reserve_x_before) << ',' << decimal_text(r.reserve_y_before) << ','
            << (r.price_usd_x ? decimal_text(*r.price_usd_x) : "") << ','
            << (r.price_usd_y ? decimal_text(*r.price_usd_y) : "") << '\n';
    }
}

// ---------------------------------------------------------------------------

namespace {

Rational json_number(const nlohmann::json& v, const char* key)
{
    if (!v.is_number())
        throw DomainError(std::string("scenario field '") + key + "' must be a number");
    return parse_decimal(v.dump());
}

} // namespace

ScenarioConfig parse_scenario(const nlohmann::json& doc)
{
    if (!doc.is_object())
        throw DomainError("scenario must be a JSON object");
    static const std::vector<std::string> known{"algorithm", "external_reserve_multiple", "split_count",
                                                "arithmetic", "seed", "valuation"};
    for (const auto& [key, _] : doc.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw DomainError("unknown scenario field '" + key + "'");

    ScenarioConfig c;
    if (!doc.contains("algorithm") || !doc["algorithm"].is_string())
        throw DomainError("scenario needs a string 'algorithm' (cpmm or gmm)");
    c.algorithm = parse_algorithm(doc["algorithm"].get<std::string>());
    if (c.algorithm != Algorithm::Cpmm && c.algorithm != Algorithm::Gmm)
        throw DomainError("scenario algorithm must be cpmm or gmm");

    if (doc.contains("external_reserve_multiple") && !doc["external_reserve_multiple"].is_null())
    {
        Rational beta = json_number(doc["external_reserve_multiple"], "external_reserve_multiple");
        if (beta < 0)
            throw DomainError("external_reserve_multiple must be nonnegative");
        c.external_reserve_multiple = beta;
    }
    if (doc.contains("split_count") && !doc["split_count"].is_null())
    {
        const auto& n = doc["split_count"];
        if (!n.is_number_integer() || n.get<std::int64_t>() < 1)
            throw DomainError("split_count must be an integer >= 1");
        c.split_count = static_cast<unsigned>(n.get<std::int64_t>());
    }
    if (c.algorithm == Algorithm::Gmm && c.external_reserve_multiple.has_value() == c.split_count.has_value())
        throw DomainError("gmm scenarios need exactly one of external_reserve_multiple and split_count");
    if (c.algorithm == Algorithm::Cpmm && (c.external_reserve_multiple || c.split_count))
        throw DomainError("cpmm scenarios take neither external_reserve_multiple nor split_count");

    if (doc.contains("arithmetic"))
    {
        const auto& a = doc["arithmetic"];
        if (a == "rational")
            c.arithmetic = Arithmetic::Rational;
        else if (a == "float64")
            c.arithmetic = Arithmetic::Float64;
        else
            throw DomainError("arithmetic must be 'rational' or 'float64'");
    }
    if (doc.contains("seed"))
    {
        const auto& s = doc["seed"];
        if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0))
            throw DomainError("seed must be a nonnegative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("valuation"))
    {
        const auto& v = doc["valuation"];
        if (v == "native")
            c.valuation = Valuation::Native;
        else if (v == "usd")
            c.valuation = Valuation::Usd;
        else
            throw DomainError("valuation must be 'native' or 'usd'");
    }
    return c;
}

ScenarioConfig parse_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open scenario '" + path + "'");
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw DomainError("scenario '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(doc);
}

std::vector<Attack> collect_attacks(const std::vector<ReplayRecord>& records)
{
    std::map<std::string, Attack> by_id;
    std::map<std::string, bool> has_front;
    for (const auto& r : records)
    {
        if (r.role == Role::Normal)
            continue;
        Attack& a = by_id[r.attack_id];
        a.attack_id = r.attack_id;
        a.pair_id = r.pair_id;
        if (r.role == Role::Frontrun)
        {
            has_front[r.attack_id] = true;
            a.block_number = r.block_number;
            a.tx_index = r.tx_index;
            a.sent = r.token_in;
            a.attack_dx = r.amount_in;
            a.reserve_in = reserve_of(r, r.token_in);
            a.price_usd_sent = r.token_in == Asset::X ? r.price_usd_x : r.price_usd_y;
        }
        else if (r.role == Role::Victim)
        {
            a.victim_dx += r.amount_in;
            ++a.victim_count;
        }
    }
    std::vector<Attack> out;
    out.reserve(by_id.size());
    for (auto& [id, a] : by_id)
    {
        if (!has_front[id])
            throw DomainError("attack '" + id + "' has no frontrun");
        out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end(), [](const Attack& a, const Attack& b) {
        return std::tie(a.pair_id, a.block_number, a.tx_index, a.attack_id) <
               std::tie(b.pair_id, b.block_number, b.tx_index, b.attack_id);
    });
    return out;
}

Rational counterfactual_profit(const Attack& a, const ScenarioConfig& config)
{
    if (config.algorithm == Algorithm::Cpmm)
        return sandwich_profit_cpmm_closed(a.reserve_in, a.victim_dx, a.attack_dx);
    if (config.external_reserve_multiple)
        return sandwich_profit_beta(a.reserve_in, *config.external_reserve_multiple, a.victim_dx, a.attack_dx);
    return sandwich_profit_nsplit(a.reserve_in, *config.split_count, a.victim_dx, a.attack_dx);
}

double counterfactual_profit_f64(const Attack& a, const ScenarioConfig& config)
{
    const double xi = to_double(a.reserve_in);
    const double v = to_double(a.victim_dx);
    const double h = to_double(a.attack_dx);
    if (config.algorithm == Algorithm::Cpmm)
        return sandwich_profit_cpmm_closed(xi, v, h);
    if (config.external_reserve_multiple)
        return sandwich_profit_beta(xi, to_double(*config.external_reserve_multiple), v, h);
    return sandwich_profit_nsplit(xi, *config.split_count, v, h);
}

ReplaySummary run_counterfactual(const std::vector<ReplayRecord>& records, const ScenarioConfig& config)
{
    if (config.algorithm != Algorithm::Cpmm && config.algorithm != Algorithm::Gmm)
        throw DomainError("replay supports cpmm and gmm scenarios only");
    if (config.algorithm == Algorithm::Gmm && config.external_reserve_multiple.has_value() == config.split_count.has_value())
        throw DomainError("gmm scenarios need exactly one of external_reserve_multiple and split_count");

    const bool exact = config.arithmetic == Arithmetic::Rational;
    const auto attacks = collect_attacks(records);

    ReplaySummary s;
    s.config = config;

    // Pairs missing a USD price on any attack cannot be valued in USD.
    std::map<std::string, bool> priced;
    std::set<std::string> all_pairs;
    for (const auto& r : records)
        all_pairs.insert(r.pair_id);
    for (const auto& p : all_pairs)
        priced[p] = true;
    for (const auto& a : attacks)
        if (!a.price_usd_sent)
            priced[a.pair_id] = false;

    Rational native_exact(0);
    Rational usd_exact(0);
    double native_f = 0;
    double usd_f = 0;
    bool usd_complete = true;

    std::map<std::string, PairSummary> pairs;
    std::map<std::string, Rational> pair_usd_exact;
    for (const auto& p : all_pairs)
    {
        PairSummary ps;
        ps.pair_id = p;
        if (config.valuation == Valuation::Usd && !priced[p])
        {
            ps.excluded = true;
            ps.exclusion_reason = "missing USD price";
        }
        pairs.emplace(p, std::move(ps));
    }

    for (const auto& a : attacks)
    {
        PairSummary& ps = pairs.at(a.pair_id);
        if (ps.excluded)
            continue;
        AttackOutcome o{a, Rational(0), 0, std::nullopt};
        if (exact)
        {
            o.profit_exact = counterfactual_profit(a, config);
            o.profit = to_double(o.profit_exact);
        }
        else
        {
            o.profit = counterfactual_profit_f64(a, config);
        }
        const bool negative = exact ? o.profit_exact < 0 : o.profit < 0;
        ++s.attack_count;
        ++ps.attack_count;
        if (negative)
        {
            ++s.negative_count;
            ++ps.negative_count;
        }
        if (exact)
        {
            native_exact += o.profit_exact;
        }
        else
        {
            native_f += o.profit;
            (a.sent == Asset::X ? ps.profit_native_x : ps.profit_native_y) += o.profit;
        }
        if (a.price_usd_sent)
        {
            if (exact)
            {
                const Rational usd = o.profit_exact * *a.price_usd_sent;
                o.profit_usd = to_double(usd);
                usd_exact += usd;
                pair_usd_exact[a.pair_id] += usd;
            }
            else
            {
                o.profit_usd = o.profit * to_double(*a.price_usd_sent);
                usd_f += *o.profit_usd;
                ps.profit_usd = ps.profit_usd.value_or(0) + *o.profit_usd;
            }
        }
        else
        {
            usd_complete = false;
        }
        s.attacks.push_back(std::move(o));
    }

    if (exact)
    {
        // Per-pair native and USD sums, exact then rounded once.
        std::map<std::string, std::pair<Rational, Rational>> native_by_pair;
        for (const auto& o : s.attacks)
        {
            auto& slot = native_by_pair[o.attack.pair_id];
            (o.attack.sent == Asset::X ? slot.first : slot.second) += o.profit_exact;
        }
        for (auto& [id, ps] : pairs)
        {
            if (auto it = native_by_pair.find(id); it != native_by_pair.end())
            {
                ps.profit_native_x = to_double(it->second.first);
                ps.profit_native_y = to_double(it->second.second);
            }
            if (auto it = pair_usd_exact.find(id); it != pair_usd_exact.end() && priced[id])
                ps.profit_usd = to_double(it->second);
        }
        s.total_attacker_profit_native = to_double(native_exact);
        s.total_attacker_profit_native_exact = to_fraction_string(native_exact);
        if (usd_complete)
            s.total_attacker_profit_usd = to_double(usd_exact);
    }
    else
    {
        for (auto& [id, ps] : pairs)
            if (!priced[id])
                ps.profit_usd.reset();
        s.total_attacker_profit_native = native_f;
        if (usd_complete)
            s.total_attacker_profit_usd = usd_f;
    }

    for (auto& [id, ps] : pairs)
    {
        if (ps.excluded)
            ++s.excluded_pairs;
        else
            ++s.included_pairs;
        if (ps.attack_count > 0 && !priced[id])
            ps.profit_usd.reset();
        s.pairs.push_back(std::move(ps));
    }
    s.pct_negative_profit =
        s.attack_count == 0 ? 0.0 : static_cast<double>(s.negative_count) / static_cast<double>(s.attack_count);
    return s;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json config_json(const ScenarioConfig& c)
{
    nlohmann::json j;
    j["algorithm"] = std::string(to_string(c.algorithm));
    j["external_reserve_multiple"] =
        c.external_reserve_multiple ? nlohmann::json(to_fraction_string(*c.external_reserve_multiple)) : nullptr;
    j["split_count"] = c.split_count ? nlohmann::json(*c.split_count) : nullptr;
    j["arithmetic"] = c.arithmetic == Arithmetic::Rational ? "rational" : "float64";
    j["seed"] = c.seed;
    j["valuation"] = c.valuation == Valuation::Native ? "native" : "usd";
    return j;
}

} // namespace

nlohmann::json to_json(const ReplaySummary& s)
{
    nlohmann::json j;
    j["config"] = config_json(s.config);
    j["attack_count"] = s.attack_count;
    j["negative_count"] = s.negative_count;
    j["pct_negative_profit"] = s.pct_negative_profit;
    j["total_attacker_profit_native"] = s.total_attacker_profit_native;
    j["total_attacker_profit_native_exact"] =
        s.total_attacker_profit_native_exact ? nlohmann::json(*s.total_attacker_profit_native_exact) : nullptr;
    j["total_attacker_profit_usd"] = optional_number(s.total_attacker_profit_usd);
    j["included_pairs"] = s.included_pairs;
    j["excluded_pairs"] = s.excluded_pairs;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : s.pairs)
    {
        nlohmann::json pj;
        pj["pair_id"] = p.pair_id;
        pj["attack_count"] = p.attack_count;
        pj["negative_count"] = p.negative_count;
        pj["profit_native_x"] = p.profit_native_x;
        pj["profit_native_y"] = p.profit_native_y;
        pj["profit_usd"] = optional_number(p.profit_usd);
        pj["excluded"] = p.excluded;
        pj["exclusion_reason"] = p.excluded ? nlohmann::json(p.exclusion_reason) : nullptr;
        pairs.push_back(std::move(pj));
    }
    j["pairs"] = std::move(pairs);
    return j;
}

void write_attack_csv(std::ostream& out, const ReplaySummary& s)
{
    const bool exact = s.config.arithmetic == Arithmetic::Rational;
    out << "attack_id,pair_id,block_number,tx_index,token_in,attack_dx,victim_dx,victim_count,reserve_in,profit,"
           "profit_exact,profit_usd\n";
    for (const auto& o : s.attacks)
    {
        const auto& a = o.attack;
        out << a.attack_id << ',' << a.pair_id << ',' << a.block_number << ',' << a.tx_index << ','
            << to_string(a.sent) << ',' << decimal_text(a.attack_dx) << ',' << decimal_text(a.victim_dx) << ','
            << a.victim_count << ',' << decimal_text(a.reserve_in) << ',' << to_full_precision(o.profit) << ','
            << (exact ? to_fraction_string(o.profit_exact) : "") << ','
            << (o.profit_usd ? to_full_precision(*o.profit_usd) : "") << '\n';
    }
}

// ---------------------------------------------------------------------------

ILScenarioReport il_portfolio_report(const std::vector<ReplayRecord>& records, const std::vector<double>& alphas,
                                     double lambda, double price_epsilon)
{
    for (double a : alphas)
        if (!(a > 0 && a <= 0.5))
            throw DomainError("alpha values must lie in (0, 0.5]");
    if (!(lambda > 1))
        throw DomainError("lambda must exceed 1");

    ILScenarioReport rep;
    rep.alphas = alphas;
    rep.lambda = lambda;
    rep.price_epsilon = price_epsilon;
    rep.low.loss_gmm_usd.assign(alphas.size(), 0.0);
    rep.high.loss_gmm_usd.assign(alphas.size(), 0.0);

    std::map<std::string, std::vector<const ReplayRecord*>> by_pair;
    for (const auto& r : records)
        by_pair[r.pair_id].push_back(&r);

    for (auto& [id, rows] : by_pair)
    {
        std::sort(rows.begin(), rows.end(),
                  [](const ReplayRecord* a, const ReplayRecord* b) { return position(*a) < position(*b); });
        if (rows.size() < 2)
        {
            rep.excluded[id] = "fewer than 2 trades";
            continue;
        }
        std::vector<const ReplayRecord*> priced;
        bool tiny = false;
        for (const auto* r : rows)
        {
            if (!r->price_usd_x || !r->price_usd_y)
                continue;
            if (to_double(*r->price_usd_x) < price_epsilon || to_double(*r->price_usd_y) < price_epsilon)
            {
                tiny = true;
                continue;
            }
            priced.push_back(r);
        }
        if (priced.size() < 2)
        {
            rep.excluded[id] = tiny ? "prices below epsilon" : "missing USD prices";
            continue;
        }
        const auto& first = *priced.front();
        const auto& last = *priced.back();
        PairIL p;
        p.pair_id = id;
        p.price_first = to_double(Rational(*first.price_usd_x / *first.price_usd_y));
        p.price_last = to_double(Rational(*last.price_usd_x / *last.price_usd_y));
        p.volatility = volatility_class(p.price_first, p.price_last, lambda);
        p.il_cpmm = il_cpmm(p.price_first, p.price_last);
        for (double a : alphas)
            p.il_gmm.push_back(il_gmm_small_pool(p.price_first, p.price_last, a));
        p.hold_value_usd = to_double(Rational(first.reserve_x_before * *last.price_usd_x +
                                              first.reserve_y_before * *last.price_usd_y));
        ClassTotals& t = p.volatility == Volatility::High ? rep.high : rep.low;
        ++t.pairs;
        t.hold_value_usd += p.hold_value_usd;
        t.loss_cpmm_usd += p.il_cpmm * p.hold_value_usd;
        for (std::size_t k = 0; k < alphas.size(); ++k)
            t.loss_gmm_usd[k] += p.il_gmm[k] * p.hold_value_usd;
        rep.pairs.push_back(std::move(p));
    }
    return rep;
}

nlohmann::json to_json(const ILScenarioReport& r)
{
    nlohmann::json j;
    j["alphas"] = r.alphas;
    j["lambda"] = r.lambda;
    j["price_epsilon"] = r.price_epsilon;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs)
    {
        nlohmann::json pj;
        pj["pair_id"] = p.pair_id;
        pj["price_first"] = p.price_first;
        pj["price_last"] = p.price_last;
        pj["volatility"] = std::string(to_string(p.volatility));
        pj["il_cpmm"] = p.il_cpmm;
        pj["il_gmm"] = p.il_gmm;
        pj["hold_value_usd"] = p.hold_value_usd;
        pairs.push_back(std::move(pj));
    }
    j["pairs"] = std::move(pairs);
    j["excluded"] = r.excluded;
    j["included_pair_count"] = r.pairs.size();
    j["excluded_pair_count"] = r.excluded.size();
    const auto totals = [](const ClassTotals& t) {
        nlohmann::json tj;
        tj["pairs"] = t.pairs;
        tj["hold_value_usd"] = t.hold_value_usd;
        tj["loss_cpmm_usd"] = t.loss_cpmm_usd;
        tj["loss_gmm_usd"] = t.loss_gmm_usd;
        return tj;
    };
    j["totals"] = {{"low", totals(r.low)}, {"high", totals(r.high)}};
    return j;
}

// ---------------------------------------------------------------------------

namespace {

class SyntheticRng
{
public:
    explicit SyntheticRng(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    /// Value in [lo, hi) rounded to `decimals` places, as an exact rational.
    Rational decimal(double lo, double hi, unsigned decimals)
    {
        const double scale = std::pow(10.0, decimals);
        const auto units = static_cast<long long>(std::llround(uniform(lo, hi) * scale));
        return Rational(Integer(units), boost::multiprecision::pow(Integer(10), decimals));
    }

private:
    std::mt19937_64 engine_;
};

Rational round_to(const Rational& v, unsigned decimals)
{
    const Integer scale = boost::multiprecision::pow(Integer(10), decimals);
    const Integer num = boost::multiprecision::numerator(v) * scale * 2 + boost::multiprecision::denominator(v);
    const Integer q = num / (boost::multiprecision::denominator(v) * 2);
    return Rational(q, scale);
}

} // namespace

std::vector<ReplayRecord> generate_synthetic_log(const SyntheticOptions& opts)
{
    if (opts.pairs == 0)
        throw DomainError("synthetic log needs at least one pair");
    SyntheticRng rng(opts.seed);
    constexpr unsigned kDecimals = 8;

    struct PairState
    {
        Rational x;
        Rational y;
        Rational usd_y;
        bool has_prices;
    };
    std::vector<PairState> pairs;
    for (std::size_t p = 0; p < opts.pairs; ++p)
    {
        const Rational x = rng.decimal(50, 5000, 4);
        const Rational ratio = rng.decimal(100, 5000, 2);
        // The last pair carries no USD prices when there are several pairs.
        pairs.push_back({x, x * ratio, rng.decimal(0.5, 2, 4), !(opts.pairs > 1 && p + 1 == opts.pairs)});
    }
    const auto pair_name = [](std::size_t p) {
        std::string id = std::to_string(p);
        return "PAIR" + std::string(id.size() < 2 ? 2 - id.size() : 0, '0') + id;
    };

    std::vector<ReplayRecord> out;
    std::int64_t block = 1000;
    const auto emit = [&](std::size_t p, std::int64_t tx, Role role, const std::string& attack, Asset in,
                          const Rational& amount) {
        PairState& st = pairs[p];
        ReplayRecord r;
        r.block_number = block;
        r.tx_index = tx;
        r.pair_id = pair_name(p);
        r.role = role;
        r.attack_id = attack;
        r.token_in = in;
        r.amount_in = amount;
        r.reserve_x_before = round_to(st.x, kDecimals);
        r.reserve_y_before = round_to(st.y, kDecimals);
        if (st.has_prices)
        {
            r.price_usd_y = st.usd_y;
            r.price_usd_x = round_to(Rational(st.usd_y * st.y / st.x), 6);
        }
        // Advance the pool along the constant-product curve.
        st.x = r.reserve_x_before;
        st.y = r.reserve_y_before;
        const Rational got = in == Asset::X ? cpmm_out(amount, st.x, st.y) : cpmm_out(amount, st.y, st.x);
        if (in == Asset::X)
        {
            st.x += amount;
            st.y -= got;
        }
        else
        {
            st.y += amount;
            st.x -= got;
        }
        out.push_back(std::move(r));
        return got;
    };

    const std::size_t total_events = opts.attacks + opts.normal_trades;
    std::size_t attacks_left = opts.attacks;
    std::size_t normals_left = opts.normal_trades;
    std::size_t attack_serial = 0;
    for (std::size_t e = 0; e < total_events; ++e)
    {
        block += 1 + static_cast<std::int64_t>(rng.below(3));
        const bool attack = normals_left == 0 || (attacks_left > 0 && rng.below(attacks_left + normals_left) < attacks_left);
        const std::size_t p = static_cast<std::size_t>(rng.below(opts.pairs));
        const Asset sent = rng.below(2) == 0 ? Asset::X : Asset::Y;
        const Rational reserve_in = sent == Asset::X ? pairs[p].x : pairs[p].y;
        if (!attack)
        {
            --normals_left;
            emit(p, 0, Role::Normal, "", sent, round_to(Rational(reserve_in * rng.decimal(0.0005, 0.05, 6)), kDecimals));
            continue;
        }
        --attacks_left;
        const std::string id = "A" + std::to_string(++attack_serial);
        const Rational attack_dx = round_to(Rational(reserve_in * rng.decimal(0.001, 0.2, 6)), kDecimals);
        std::int64_t tx = static_cast<std::int64_t>(rng.below(4));
        const Rational front_out = emit(p, tx++, Role::Frontrun, id, sent, attack_dx);
        const auto victims = rng.below(4);
        for (std::uint64_t v = 0; v < victims; ++v)
        {
            tx += 1 + static_cast<std::int64_t>(rng.below(2));
            emit(p, tx, Role::Victim, id, sent, round_to(Rational(reserve_in * rng.decimal(0.0005, 0.08, 6)), kDecimals));
        }
        emit(p, tx + 1, Role::Backrun, id, other(sent), round_to(front_out, kDecimals));
    }
    return out;
}

} // namespace gmm
