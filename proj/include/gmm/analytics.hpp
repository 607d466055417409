// Impermanent loss, trader surplus comparisons, and volatility buckets.
#pragma once

#include "gmm/adversary.hpp"

namespace gmm {

/// Loss of a constant-product pool relative to holding, when the price moves
/// from r_init to r_final (both Y per X).
template <Scalar T>
T il_cpmm(const T& r_init, const T& r_final)
{
    if (!(r_init > 0) || !(r_final > 0))
        throw DomainError("il_cpmm: prices must be positive");
    if (r_init == r_final)
        return T(0);
    const T up = num_sqrt(T(r_final / r_init));
    const T down = num_sqrt(T(r_init / r_final));
    return 1 - 2 / (up + down);
}

/// Loss of the smaller GMM pool (share alpha of global X reserves) in the
/// two-pool insider benchmark.
template <Scalar T>
T il_gmm_small_pool(const T& r_init, const T& r_final, const T& alpha)
{
    if (!(r_init > 0) || !(r_final > 0))
        throw DomainError("il_gmm_small_pool: prices must be positive");
    if (!(alpha > 0) || alpha > T(1) / 2)
        throw DomainError("il_gmm_small_pool: alpha must lie in (0, 0.5]");
    if (r_init == r_final)
        return T(0);
    const T k = (1 - alpha) / alpha;
    const T a = num_sqrt(T(r_init / r_final));
    const T b = num_sqrt(T(r_final / r_init));
    return 1 - 2 * (num_sqrt(T((a + k) * (b + k))) - k) / (a + b);
}

/// 1 - V/V0 with both the final and the initial reserves valued at price_final.
template <Scalar T>
T il_from_trajectory(const BasicPool<T>& initial, const BasicPool<T>& final_state, const T& price_final)
{
    return 1 - pool_value(final_state, price_final) / pool_value(initial, price_final);
}

enum class Volatility
{
    Low,
    High
};

std::string_view to_string(Volatility v);

/// High when the price moved by more than a factor lambda in either direction.
template <Scalar T>
Volatility volatility_class(const T& price_first, const T& price_last, const T& lambda)
{
    if (!(price_first > 0) || !(price_last > 0))
        throw DomainError("volatility_class: prices must be positive");
    if (!(lambda > 1))
        throw DomainError("volatility_class: lambda must exceed 1");
    const T up = price_last / price_first;
    const T down = price_first / price_last;
    return (up > down ? up : down) > lambda ? Volatility::High : Volatility::Low;
}

template <Scalar T>
struct BasicSurplus
{
    T cpmm_after_arbitrage{0}; // best CPMM quote once every pool sits at the global ratio
    T gmm{0};
    T gmm_rebal{0};
    std::size_t cpmm_pool = 0;
    std::size_t gmm_pool = 0;
    std::size_t gmm_rebal_pool = 0;
    // Exact signs of gmm - cpmm_after_arbitrage and gmm_rebal - cpmm_after_arbitrage.
    int gmm_vs_cpmm = 0;
    int rebal_vs_cpmm = 0;
    PreservationReport preservation;
};

using Surplus = BasicSurplus<Rational>;

/// Best quotes for dx of X routed to the most favorable pool under three
/// regimes. Throws InvariantViolation if rebalancing ever loses to the
/// arbitraged CPMM ecosystem.
template <Scalar T>
BasicSurplus<T> trader_surplus_comparison(const BasicEcosystem<T>& eco, const T& dx)
{
    if (!(dx > 0))
        throw DomainError("trader_surplus_comparison: dx must be positive");
    BasicSurplus<T> s;
    s.cpmm_pool = eco.largest_product_index();
    s.cpmm_after_arbitrage = balanced_arbitrage_best_quote(dx, eco);
    for (std::size_t i = 0; i < eco.size(); ++i)
    {
        T g = gmm_out(dx, eco, i).amount_out;
        if (i == 0 || g > s.gmm)
        {
            s.gmm = std::move(g);
            s.gmm_pool = i;
        }
        T rb = gmm_rebal_quote(dx, eco, i).quote.amount_out;
        if (i == 0 || rb > s.gmm_rebal)
        {
            s.gmm_rebal = std::move(rb);
            s.gmm_rebal_pool = i;
        }
    }
    s.gmm_vs_cpmm = compare_with_balanced_quote(s.gmm, dx, eco);
    s.rebal_vs_cpmm = compare_with_balanced_quote(s.gmm_rebal, dx, eco);
    s.preservation = trade_preservation_condition(dx, eco);
    if constexpr (NumTraits<T>::exact)
        if (s.rebal_vs_cpmm < 0)
            throw InvariantViolation("rebalanced GMM quote below the arbitraged CPMM quote");
    return s;
}

struct BenchmarkIL
{
    double il_large_trajectory = 0;
    double il_small_trajectory = 0;
    double il_cpmm_closed = 0;
    double il_small_closed = 0;
    double closed_form_rel_gap = 0; // insider second-trade cross-check
};

/// Runs the two-trade insider benchmark on pools holding (1 - alpha) and alpha
/// of `x_total` at ratio r_init, and measures both pools' losses at r_final.
template <Scalar T>
BenchmarkIL ideal_benchmark_il(const T& r_init, const T& r_final, const T& alpha, const T& x_total = T(1000))
{
    if (!(alpha > 0) || alpha > T(1) / 2)
        throw DomainError("ideal_benchmark_il: alpha must lie in (0, 0.5]");
    const T x1 = (1 - alpha) * x_total;
    const T x2 = alpha * x_total;
    const auto eco = BasicEcosystem<T>::from_reserves({{x1, r_init * x1}, {x2, r_init * x2}});
    const auto plan = insider_optimal_trades(eco, r_final);
    const auto& last = plan.states.back();
    BenchmarkIL out;
    out.il_large_trajectory = to_double(il_from_trajectory(eco.pool(0), last.pool(0), r_final));
    out.il_small_trajectory = to_double(il_from_trajectory(eco.pool(1), last.pool(1), r_final));
    out.il_cpmm_closed = to_double(il_cpmm(r_init, r_final));
    out.il_small_closed = to_double(il_gmm_small_pool(r_init, r_final, alpha));
    out.closed_form_rel_gap = plan.closed_form_rel_gap;
    return out;
}

} // namespace gmm
