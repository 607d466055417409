// Counterfactual replay of logged sandwich attacks and per-pair IL reports.
#pragma once

#include "gmm/analytics.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gmm {

enum class Role
{
    Normal,
    Frontrun,
    Victim,
    Backrun
};

std::string_view to_string(Role r);

struct ReplayRecord
{
    std::int64_t block_number = 0;
    std::int64_t tx_index = 0;
    std::string pair_id;
    Role role = Role::Normal;
    std::string attack_id;
    Asset token_in = Asset::X;
    Rational amount_in;
    Rational reserve_x_before;
    Rational reserve_y_before;
    std::optional<Rational> price_usd_x;
    std::optional<Rational> price_usd_y;
    std::size_t line = 0; // 1-based source line, 0 when synthesized
};

inline constexpr const char* kReplayHeader =
    "block_number,tx_index,pair_id,role,attack_id,token_in,amount_in,reserve_x_before,reserve_y_before,"
    "price_usd_x,price_usd_y";

struct ParseIssue
{
    std::size_t line = 0; // 0 for whole-file problems
    std::string message;
};

class ReplayParseError : public std::runtime_error
{
public:
    explicit ReplayParseError(std::vector<ParseIssue> issues);
    const std::vector<ParseIssue>& issues() const { return issues_; }

private:
    std::vector<ParseIssue> issues_;
};

/// Relative tolerance between a back-run's input and the CPMM output of its
/// front-run computed from the front-run's reserve snapshot.
inline constexpr double kBackrunTolerance = 1e-4;

/// Reads and validates a replay CSV. Every problem is collected and reported
/// together; throws ReplayParseError if there is any.
std::vector<ReplayRecord> parse_log(std::istream& in);
std::vector<ReplayRecord> parse_log_file(const std::string& path);

void write_log(std::ostream& out, const std::vector<ReplayRecord>& records);

enum class Arithmetic
{
    Rational,
    Float64
};

enum class Valuation
{
    Native,
    Usd
};

struct ScenarioConfig
{
    Algorithm algorithm = Algorithm::Cpmm; // Cpmm or Gmm
    std::optional<Rational> external_reserve_multiple;
    std::optional<unsigned> split_count;
    Arithmetic arithmetic = Arithmetic::Rational;
    std::uint64_t seed = 0;
    Valuation valuation = Valuation::Native;
};

/// Parses a scenario document. Numbers are read exactly from their decimal
/// text. Throws DomainError on invalid or inconsistent fields.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig parse_scenario_file(const std::string& path);

/// One bracket of front-run, victims, back-run.
struct Attack
{
    std::string attack_id;
    std::string pair_id;
    std::int64_t block_number = 0;
    std::int64_t tx_index = 0; // front-run position
    Asset sent = Asset::X;
    Rational attack_dx;
    Rational victim_dx; // sum of every victim input in the bracket
    std::size_t victim_count = 0;
    Rational reserve_in; // attacked pool's reserve of the sent asset
    std::optional<Rational> price_usd_sent;
};

/// Groups validated records into attacks ordered by (pair_id, block, tx).
std::vector<Attack> collect_attacks(const std::vector<ReplayRecord>& records);

struct AttackOutcome
{
    Attack attack;
    Rational profit_exact; // valid for rational arithmetic
    double profit = 0;     // sent-asset units
    std::optional<double> profit_usd;
};

struct PairSummary
{
    std::string pair_id;
    std::size_t attack_count = 0;
    std::size_t negative_count = 0;
    double profit_native_x = 0;
    double profit_native_y = 0;
    std::optional<double> profit_usd;
    bool excluded = false;
    std::string exclusion_reason;
};

struct ReplaySummary
{
    ScenarioConfig config;
    std::size_t attack_count = 0;
    std::size_t negative_count = 0;
    double pct_negative_profit = 0;
    double total_attacker_profit_native = 0;
    std::optional<std::string> total_attacker_profit_native_exact;
    std::optional<double> total_attacker_profit_usd;
    std::size_t included_pairs = 0;
    std::size_t excluded_pairs = 0;
    std::vector<PairSummary> pairs;
    std::vector<AttackOutcome> attacks;
};

/// Attacker profit for one attack under the scenario, in sent-asset units.
Rational counterfactual_profit(const Attack& a, const ScenarioConfig& config);
double counterfactual_profit_f64(const Attack& a, const ScenarioConfig& config);

/// Recomputes every attack under the scenario and aggregates in a fixed order
/// (pair_id, then block, then tx), so the result does not depend on record
/// order.
ReplaySummary run_counterfactual(const std::vector<ReplayRecord>& records, const ScenarioConfig& config);

nlohmann::json to_json(const ReplaySummary& s);
void write_attack_csv(std::ostream& out, const ReplaySummary& s);

struct PairIL
{
    std::string pair_id;
    double price_first = 0; // Y per X, from USD prices
    double price_last = 0;
    Volatility volatility = Volatility::Low;
    double il_cpmm = 0;
    std::vector<double> il_gmm; // one per alpha
    double hold_value_usd = 0;  // first reserves valued at the last USD prices
};

struct ClassTotals
{
    std::size_t pairs = 0;
    double hold_value_usd = 0;
    double loss_cpmm_usd = 0;
    std::vector<double> loss_gmm_usd; // one per alpha
};

struct ILScenarioReport
{
    std::vector<double> alphas;
    double lambda = 10;
    double price_epsilon = 0;
    std::vector<PairIL> pairs;
    std::map<std::string, std::string> excluded; // pair_id -> reason
    ClassTotals low;
    ClassTotals high;
};

ILScenarioReport il_portfolio_report(const std::vector<ReplayRecord>& records, const std::vector<double>& alphas,
                                     double lambda, double price_epsilon = 1e-12);
nlohmann::json to_json(const ILScenarioReport& r);

struct SyntheticOptions
{
    std::uint64_t seed = 1;
    std::size_t attacks = 100;
    std::size_t pairs = 5;
    std::size_t normal_trades = 50;
};

/// Deterministic synthetic log of sandwich attacks and ordinary trades.
std::vector<ReplayRecord> generate_synthetic_log(const SyntheticOptions& opts);

} // namespace gmm
