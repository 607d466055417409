// Trade preservation, balanced arbitrage, and GMM with inter-pool rebalancing.
#pragma once

#include "gmm/core.hpp"

#include <string>
#include <vector>

namespace gmm {

struct PoolPreservation
{
    std::string pool_id;
    // nGMM rate minus the pool's local CPMM rate.
    double left_slack = 0;
    // Best post-arbitrage CPMM rate minus the pool's local CPMM rate.
    double right_slack = 0;
    bool left_holds = false;
    bool right_holds = false;
};

struct PreservationReport
{
    bool holds = false;
    std::vector<PoolPreservation> pools;
};

namespace detail {

/// Y-per-X rate a constant-product pool with X reserve `x` and ratio `r` gives
/// for dx: r / (1 + dx/x).
template <Scalar T>
T cpmm_rate(const T& r, const T& dx, const T& x)
{
    return r * x / (x + dx);
}

} // namespace detail

/// Checks, for every pool i, that the nGMM rate strictly beats the local CPMM
/// rate and that the local CPMM rate is strictly below the best CPMM rate
/// available once arbitrage has moved every pool to the global ratio. The
/// second comparison involves a square root and is decided exactly for
/// rational inputs.
template <Scalar T>
PreservationReport trade_preservation_condition(const T& dx, const BasicEcosystem<T>& eco)
{
    detail::require_nonnegative(dx, "trade_preservation_condition");
    const T x = eco.total_x();
    const T r = eco.ratio();
    const T k_max = eco.pool(eco.largest_product_index()).product();
    const T radicand = k_max / r; // squared X reserve of the best arbitraged pool
    const T global_rate = detail::cpmm_rate(r, dx, x);

    const Real r_real = num_cast<Real>(r);
    const Real s_real = boost::multiprecision::sqrt(num_cast<Real>(radicand));
    const Real best_rate_real = r_real * s_real / (s_real + num_cast<Real>(dx));

    PreservationReport report;
    report.holds = true;
    for (const auto& p : eco.pools())
    {
        const T local = detail::cpmm_rate(p.ratio(), dx, p.x());
        PoolPreservation row;
        row.pool_id = p.id();
        row.left_slack = to_double(T(global_rate - local));
        row.left_holds = global_rate > local;
        // r s/(s+dx) > c  <=>  (r - c) s - c dx > 0
        row.right_holds = surd_sign(T(r - local), T(-local * dx), radicand) > 0;
        row.right_slack = static_cast<double>(best_rate_real - num_cast<Real>(local));
        report.holds = report.holds && row.left_holds && row.right_holds;
        report.pools.push_back(std::move(row));
    }
    return report;
}

/// Moves every pool to the global ratio while preserving its product. For
/// rational inputs the ratio is kept exact and the product is exact whenever
/// the square root is; otherwise it carries the square-root truncation.
template <Scalar T>
BasicEcosystem<T> balanced_arbitrage(const BasicEcosystem<T>& eco)
{
    const T r = eco.ratio();
    std::vector<BasicPool<T>> pools;
    pools.reserve(eco.size());
    for (const auto& p : eco.pools())
    {
        if (p.y() == r * p.x())
        {
            pools.push_back(p);
            continue;
        }
        T x = num_sqrt(T(p.product() / r));
        T y = r * x;
        pools.emplace_back(p.id(), std::move(x), std::move(y));
    }
    return BasicEcosystem<T>(std::move(pools));
}

/// Best CPMM output for dx once balanced arbitrage has run. This is the
/// largest-product pool's quote, r s dx/(s + dx) with s^2 = k_max/r.
template <Scalar T>
T balanced_arbitrage_best_quote(const T& dx, const BasicEcosystem<T>& eco)
{
    const auto balanced = balanced_arbitrage(eco);
    const auto& p = balanced.pool(eco.largest_product_index());
    return cpmm_out(dx, p.x(), p.y());
}

/// Exact sign of q minus the best post-arbitrage CPMM output for dx.
template <Scalar T>
int compare_with_balanced_quote(const T& q, const T& dx, const BasicEcosystem<T>& eco)
{
    const T r = eco.ratio();
    const T radicand = eco.pool(eco.largest_product_index()).product() / r;
    // q - r s dx/(s+dx) has the sign of (q - r dx) s + q dx.
    return surd_sign(T(q - r * dx), T(q * dx), radicand);
}

/// Price of an inter-pool transfer of dx X into pool `to_pool`: the smaller of
/// the receiving pool's CPMM quote and the value-preserving amount r dx.
template <Scalar T>
T inter_pool_quote(const T& dx, std::size_t to_pool, const BasicEcosystem<T>& eco)
{
    detail::require_nonnegative(dx, "inter_pool_quote");
    const auto& p = eco.pool(to_pool);
    T local = cpmm_out(dx, p.x(), p.y());
    T at_ratio = eco.ratio() * dx;
    return local < at_ratio ? local : at_ratio;
}

template <Scalar T>
struct BasicRebalanceTransfer
{
    std::size_t from_pool = 0;
    std::size_t to_pool = 0;
    Asset asset_sent = Asset::X;
    T amount_sent{0};
    T amount_received{0};
};

template <Scalar T>
struct BasicRebalanceOutcome
{
    BasicEcosystem<T> rebalanced; // state the order is quoted against
    BasicQuote<T> quote;
    std::vector<BasicRebalanceTransfer<T>> transfers;
    bool triggered = false;
};

using RebalanceTransfer = BasicRebalanceTransfer<Rational>;
using RebalanceOutcome = BasicRebalanceOutcome<Rational>;

namespace detail {

constexpr int kMaxRebalanceTransfers = 10000;

template <Scalar T>
bool below_ratio(const T& ratio, const T& target)
{
    if constexpr (NumTraits<T>::exact)
        return ratio < target;
    else
        return ratio < target * (1 - 1e-12);
}

/// Whether rebalancing applies to an order of dx on pool l (send-X view).
template <Scalar T>
bool rebalance_applies(const T& dx, const BasicEcosystem<T>& eco, std::size_t l)
{
    if (eco.size() < 2 || l != eco.largest_product_index())
        return false;
    if (!(eco.pool(l).ratio() < eco.ratio()))
        return false;
    return trade_preservation_condition(dx, eco).holds;
}

template <Scalar T>
BasicRebalanceOutcome<T> rebalance_canonical(const T& dx, const BasicEcosystem<T>& eco, std::size_t l,
                                             bool force_trigger)
{
    require_nonnegative(dx, "gmm_rebal_quote");
    BasicRebalanceOutcome<T> out{eco, {}, {}, false};
    if (!force_trigger && !rebalance_applies(dx, eco, l))
    {
        out.quote = gmm_out(dx, eco, l);
        return out;
    }
    out.triggered = true;
    const T r = eco.ratio();
    BasicEcosystem<T> cur = eco;
    int guard = 0;
    while (cur.size() > 1 && below_ratio(cur.pool(l).ratio(), r))
    {
        if (++guard > kMaxRebalanceTransfers)
            throw InvariantViolation("rebalancing did not converge");
        std::size_t j = l == 0 ? 1 : 0;
        for (std::size_t k = 0; k < cur.size(); ++k)
            if (k != l && cur.pool(k).ratio() > cur.pool(j).ratio())
                j = k;
        const auto& pl = cur.pool(l);
        const auto& pj = cur.pool(j);
        const T two_r = 2 * r;
        T to_l = (r * pl.x() - pl.y()) / two_r;
        T to_j = (pj.y() - r * pj.x()) / two_r;
        T amount = to_l < to_j ? to_l : to_j;
        if (!(amount > 0))
            throw InvariantViolation("rebalancing transfer is not positive");
        T received = inter_pool_quote(amount, j, cur);
        BasicEcosystem<T> next = cur.with_pool(l, pl.x() - amount, pl.y() + received);
        next = next.with_pool(j, pj.x() + amount, pj.y() - received);
        out.transfers.push_back({l, j, Asset::X, amount, received});
        cur = std::move(next);
        if constexpr (!NumTraits<T>::exact)
        {
            // The last transfer targets l exactly; snap float residue.
            if (to_l <= to_j)
                break;
        }
    }
    out.quote = gmm_out(dx, cur, l);
    out.rebalanced = std::move(cur);
    return out;
}

} // namespace detail

/// GMM with rebalancing for an order of dx sending X to pool l. Without
/// force_trigger the rebalancing runs only when l is the (lowest-index)
/// largest-product pool, its ratio is below the global ratio, and the
/// trade-preservation condition holds; otherwise this is gmm_out.
template <Scalar T>
BasicRebalanceOutcome<T> gmm_rebal_quote(const T& dx, const BasicEcosystem<T>& eco, std::size_t l,
                                         bool force_trigger = false)
{
    return detail::rebalance_canonical(dx, eco, l, force_trigger);
}

/// Orientation-aware variant: send-Y orders run on the relabeled ecosystem
/// and the result is mapped back.
template <Scalar T>
BasicRebalanceOutcome<T> gmm_rebal_quote(const BasicEcosystem<T>& eco, const BasicSwapOrder<T>& order,
                                         bool force_trigger = false)
{
    if (order.send == Asset::X)
        return detail::rebalance_canonical(order.amount_in, eco, order.pool, force_trigger);
    auto flipped = detail::rebalance_canonical(order.amount_in, eco.relabeled(), order.pool, force_trigger);
    flipped.rebalanced = flipped.rebalanced.relabeled();
    for (auto& t : flipped.transfers)
        t.asset_sent = Asset::Y;
    return flipped;
}

template <Scalar T>
struct BasicExecution
{
    BasicEcosystem<T> ecosystem;
    BasicQuote<T> quote;
    std::vector<BasicRebalanceTransfer<T>> transfers;
};

/// Executes an order under any algorithm, including GMM with rebalancing.
template <Scalar T>
BasicExecution<T> execute(const BasicEcosystem<T>& eco, const BasicSwapOrder<T>& order, Algorithm alg,
                          bool force_trigger = false)
{
    if (alg != Algorithm::GmmRebal)
    {
        auto res = apply_swap(eco, order, alg);
        return {std::move(res.ecosystem), std::move(res.quote), {}};
    }
    auto outcome = gmm_rebal_quote(eco, order, force_trigger);
    // The rebalanced state is GMM-consistent, so the plain GMM transition
    // reproduces the quote computed above.
    auto res = apply_swap(outcome.rebalanced, order, Algorithm::Gmm);
    if constexpr (NumTraits<T>::exact)
        if (res.quote.amount_out != outcome.quote.amount_out)
            throw InvariantViolation("rebalanced quote changed during execution");
    return {std::move(res.ecosystem), std::move(outcome.quote), std::move(outcome.transfers)};
}

} // namespace gmm
