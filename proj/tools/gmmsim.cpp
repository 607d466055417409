// gmmsim: quoting, sweeps, worked-example regression, and counterfactual replay.
//
// Exit codes: 0 success, 1 domain or validation failure, 2 usage error.
// GMMSIM_VERBOSE=1 adds exact values and diagnostics on stderr.

#include "gmm/replay.hpp"
#include "gmm/sweep.hpp"
#include "gmm/toy.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace gmm;

namespace {

bool verbose()
{
    const char* v = std::getenv("GMMSIM_VERBOSE");
    return v && *v && std::string(v) != "0";
}

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

Rational usage_decimal(const std::string& text, const std::string& flag)
{
    try
    {
        return parse_decimal(text);
    }
    catch (const DomainError&)
    {
        throw UsageError(flag + ": '" + text + "' is not a decimal number");
    }
}

Ecosystem parse_pools(const std::string& text)
{
    std::vector<std::pair<Rational, Rational>> reserves;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw UsageError("--pools: expected x:y, got '" + item + "'");
        reserves.emplace_back(usage_decimal(item.substr(0, colon), "--pools"),
                              usage_decimal(item.substr(colon + 1), "--pools"));
    }
    if (reserves.empty())
        throw UsageError("--pools: no pools given");
    try
    {
        return Ecosystem::from_reserves(reserves);
    }
    catch (const DomainError& e)
    {
        throw UsageError(std::string("--pools: ") + e.what());
    }
}

std::vector<Rational> parse_list(const std::vector<std::string>& items, const std::string& flag)
{
    std::vector<Rational> out;
    for (const auto& joined : items)
    {
        std::stringstream ss(joined);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(usage_decimal(item, flag));
    }
    return out;
}

std::vector<Rational> usage_range(const std::string& text, const std::string& flag)
{
    try
    {
        return parse_range(text);
    }
    catch (const DomainError& e)
    {
        throw UsageError(flag + ": " + e.what());
    }
}

/// Writes to `path`, or stdout when empty.
template <typename F>
void with_output(const std::string& path, F&& write)
{
    if (path.empty())
    {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DomainError("cannot write '" + path + "'");
    write(out);
}

// ---------------------------------------------------------------------------

struct QuoteArgs
{
    std::string pools;
    std::string send = "X";
    std::string amount;
    std::size_t pool_index = 0;
    std::string algorithm = "gmm";
    bool force = false;
    std::string arithmetic = "rational";
};

template <Scalar T>
void print_quote(const BasicEcosystem<T>& eco, const BasicSwapOrder<T>& order, Algorithm alg, bool force)
{
    const auto res = execute(eco, order, alg, force);
    const auto receive = other(order.send);
    std::cout << "amount_out       " << to_display(to_double(res.quote.amount_out)) << ' ' << to_string(receive)
              << '\n'
              << "amount_out_full  " << to_full_precision(to_double(res.quote.amount_out)) << '\n'
              << "branch           " << to_string(res.quote.branch) << '\n'
              << "classification   " << to_string(res.quote.classification) << '\n';
    for (const auto& t : res.transfers)
        std::cout << "transfer         " << eco.pool(t.from_pool).id() << " -> " << eco.pool(t.to_pool).id() << ": "
                  << to_display(to_double(t.amount_sent)) << ' ' << to_string(t.asset_sent) << " for "
                  << to_display(to_double(t.amount_received)) << ' ' << to_string(other(t.asset_sent)) << '\n';
    if constexpr (NumTraits<T>::exact)
        if (verbose())
            std::cerr << "exact amount_out " << to_fraction_string(res.quote.amount_out) << '\n';
}

int cmd_quote(const QuoteArgs& a)
{
    const Ecosystem eco = parse_pools(a.pools);
    const Rational amount = usage_decimal(a.amount, "--amount");
    if (amount < 0)
        throw UsageError("--amount must be nonnegative");
    if (a.pool_index >= eco.size())
        throw UsageError("--pool-index out of range");
    Asset send;
    Algorithm alg;
    try
    {
        send = parse_asset(a.send);
        alg = parse_algorithm(a.algorithm);
    }
    catch (const DomainError& e)
    {
        throw UsageError(e.what());
    }
    if (a.force && alg != Algorithm::GmmRebal)
        throw UsageError("--force-trigger applies to gmm-rebal only");
    if (a.arithmetic == "rational")
        print_quote(eco, SwapOrder{a.pool_index, send, amount, SenderTag::Trader}, alg, a.force);
    else if (a.arithmetic == "float64")
        print_quote(convert_ecosystem<double>(eco), SwapOrderF{a.pool_index, send, to_double(amount), SenderTag::Trader},
                    alg, a.force);
    else
        throw UsageError("--arithmetic must be rational or float64");
    return 0;
}

// ---------------------------------------------------------------------------

struct MevArgs
{
    std::string xi;
    std::string victim;
    std::string range;
    std::string algorithm = "cpmm";
    std::string x;
    std::string out;
};

int cmd_sweep_mev(const MevArgs& a)
{
    const Rational xi = usage_decimal(a.xi, "--xi");
    const Rational victim = usage_decimal(a.victim, "--victim");
    const auto attacks = usage_range(a.range, "--range");
    if (!(xi > 0) || victim < 0 || attacks.front() < 0)
        throw UsageError("--xi must be positive; --victim and the range must be nonnegative");
    std::optional<Rational> x_global;
    if (a.algorithm == "gmm")
    {
        if (a.x.empty())
            throw UsageError("--algorithm gmm needs --x (global reserve)");
        x_global = usage_decimal(a.x, "--x");
        if (*x_global < xi)
            throw UsageError("--x must be at least --xi");
    }
    else if (a.algorithm != "cpmm")
        throw UsageError("--algorithm must be cpmm or gmm");
    with_output(a.out, [&](std::ostream& o) { sweep_mev(o, xi, victim, attacks, x_global ? &*x_global : nullptr); });
    return 0;
}

struct IlArgs
{
    std::vector<std::string> alpha{"0.5"};
    std::string ratio;
    std::string range;
    std::string out;
};

int cmd_sweep_il(const IlArgs& a)
{
    const auto alphas = parse_list(a.alpha, "--alpha");
    for (const auto& al : alphas)
        if (!(al > 0) || al > Rational(1, 2))
            throw UsageError("--alpha values must lie in (0, 0.5]");
    if (a.ratio.empty() == a.range.empty())
        throw UsageError("give exactly one of --ratio and --range");
    const auto factors = a.range.empty() ? std::vector<Rational>{usage_decimal(a.ratio, "--ratio")}
                                         : usage_range(a.range, "--range");
    for (const auto& f : factors)
        if (!(f > 0))
            throw UsageError("price ratio factors must be positive");
    if (alphas.empty())
        throw UsageError("--alpha: no values");
    with_output(a.out, [&](std::ostream& o) { sweep_il(o, factors, alphas); });
    return 0;
}

// ---------------------------------------------------------------------------

struct ToyArgs
{
    int part = 0; // 0 = all
    std::string algorithm;
};

int cmd_toy(const ToyArgs& a)
{
    std::optional<Algorithm> alg;
    if (!a.algorithm.empty())
    {
        try
        {
            alg = parse_algorithm(a.algorithm);
        }
        catch (const DomainError& e)
        {
            throw UsageError(e.what());
        }
    }
    std::vector<int> parts;
    if (a.part == 0)
        parts = {1, 2, 3, 4, 5, 6, 7, 8};
    else
        parts = {a.part};
    bool ok = true;
    for (int p : parts)
    {
        ToyReport r;
        try
        {
            r = run_toy_part(p, a.part == 0 ? std::nullopt : alg);
        }
        catch (const DomainError& e)
        {
            throw UsageError(e.what());
        }
        std::cout << format_toy_report(r);
        if (!r.pass())
        {
            ok = false;
            for (const auto& c : r.checks)
                if (!c.pass)
                    std::cerr << "part " << p << ": " << c.label << ": expected " << to_full_precision(c.expected)
                              << ", got " << to_full_precision(c.actual) << " " << c.unit << '\n';
        }
    }
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct ReplayArgs
{
    std::string log;
    std::string config;
    std::string out;
    std::string attacks_csv;
    bool il = false;
    std::vector<std::string> alpha{"0.05,0.1,0.25,0.5"};
    double lambda = 10;
    double epsilon = 1e-12;
};

int cmd_replay(const ReplayArgs& a)
{
    const auto records = parse_log_file(a.log);
    nlohmann::json doc;
    if (a.il)
    {
        std::vector<double> alphas;
        for (const auto& v : parse_list(a.alpha, "--alpha"))
            alphas.push_back(to_double(v));
        doc = to_json(il_portfolio_report(records, alphas, a.lambda, a.epsilon));
    }
    else
    {
        if (a.config.empty())
            throw UsageError("--config is required unless --il is given");
        const auto config = parse_scenario_file(a.config);
        const auto summary = run_counterfactual(records, config);
        doc = to_json(summary);
        if (!a.attacks_csv.empty())
            with_output(a.attacks_csv, [&](std::ostream& o) { write_attack_csv(o, summary); });
        if (verbose())
            std::cerr << "attacks: " << summary.attack_count << ", total (native): "
                      << summary.total_attacker_profit_native << '\n';
    }
    with_output(a.out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    return 0;
}

struct SynthArgs
{
    SyntheticOptions opts;
    std::string out;
};

int cmd_synth(const SynthArgs& a)
{
    const auto records = generate_synthetic_log(a.opts);
    with_output(a.out, [&](std::ostream& o) { write_log(o, records); });
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pricing, attack, and loss simulator for fragmented constant-product pools"};
    app.require_subcommand(1);

    QuoteArgs qa;
    auto* quote = app.add_subcommand("quote", "Quote one order against a set of pools");
    quote->add_option("--pools", qa.pools, "Reserves as x1:y1,x2:y2,...")->required();
    quote->add_option("--send", qa.send, "Asset sent: X or Y")->capture_default_str();
    quote->add_option("--amount", qa.amount, "Amount sent")->required();
    quote->add_option("--pool-index", qa.pool_index, "Target pool (0-based)")->capture_default_str();
    quote->add_option("--algorithm", qa.algorithm, "cpmm | ngmm | gmm | gmm-rebal")->capture_default_str();
    quote->add_flag("--force-trigger", qa.force, "Rebalance even when the trigger conditions fail");
    quote->add_option("--arithmetic", qa.arithmetic, "rational | float64")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Emit curve data as CSV");
    sweep->require_subcommand(1);
    MevArgs ma;
    auto* mev = sweep->add_subcommand("mev", "Sandwich profit over attack size");
    mev->add_option("--xi", ma.xi, "Attacked pool reserve of the sent asset")->required();
    mev->add_option("--victim", ma.victim, "Victim order size")->required();
    mev->add_option("--range", ma.range, "Attack sizes start:stop:step")->required();
    mev->add_option("--algorithm", ma.algorithm, "cpmm | gmm")->capture_default_str();
    mev->add_option("--x", ma.x, "Global reserve of the sent asset (gmm)");
    mev->add_option("--out", ma.out, "CSV path (stdout when omitted)");
    IlArgs ia;
    auto* il = sweep->add_subcommand("il", "Impermanent loss over price-ratio factors");
    il->add_option("--alpha", ia.alpha, "Small-pool shares in (0, 0.5], comma separated")->capture_default_str();
    il->add_option("--ratio", ia.ratio, "Single price-ratio factor r_final/r_init");
    il->add_option("--range", ia.range, "Ratio factors start:stop:step");
    il->add_option("--out", ia.out, "CSV path (stdout when omitted)");

    ToyArgs ta;
    auto* toy = app.add_subcommand("toy", "Run the worked examples and compare with the reference figures");
    toy->add_option("--part", ta.part, "Part 1..8 (all when omitted)")->check(CLI::Range(1, 8));
    toy->add_option("--algorithm", ta.algorithm, "Algorithm override (part 5: ngmm | gmm)");

    ReplayArgs ra;
    auto* replay = app.add_subcommand("replay", "Counterfactual attacker profits or IL report for a swap log");
    replay->add_option("--log", ra.log, "Replay CSV")->required();
    replay->add_option("--config", ra.config, "Scenario JSON");
    replay->add_option("--out", ra.out, "Summary JSON path (stdout when omitted)");
    replay->add_option("--attacks-csv", ra.attacks_csv, "Per-attack CSV path");
    replay->add_flag("--il", ra.il, "Produce the impermanent-loss report instead");
    replay->add_option("--alpha", ra.alpha, "Small-pool shares for --il")->capture_default_str();
    replay->add_option("--lambda", ra.lambda, "Volatility threshold for --il")->capture_default_str();
    replay->add_option("--epsilon", ra.epsilon, "Minimum usable USD price for --il")->capture_default_str();

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic replay log");
    synth->add_option("--seed", sa.opts.seed)->capture_default_str();
    synth->add_option("--attacks", sa.opts.attacks)->capture_default_str();
    synth->add_option("--pairs", sa.opts.pairs)->capture_default_str();
    synth->add_option("--normal", sa.opts.normal_trades)->capture_default_str();
    synth->add_option("--out", sa.out, "CSV path (stdout when omitted)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*quote)
            return cmd_quote(qa);
        if (*mev)
            return cmd_sweep_mev(ma);
        if (*il)
            return cmd_sweep_il(ia);
        if (*toy)
            return cmd_toy(ta);
        if (*replay)
            return cmd_replay(ra);
        if (*synth)
            return cmd_synth(sa);
    }
    catch (const UsageError& e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }
    catch (const ReplayParseError& e)
    {
        std::cerr << e.what() << '\n';
        return 1;
    }
    catch (const DomainError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const InvariantViolation& e)
    {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
