// Adversarial strategies: sandwich attacks, arbitrage cycles, exploit
// sequences, and the profit-maximizing insider of the two-pool benchmark.
#pragma once

#include "gmm/optimize.hpp"
#include "gmm/rebalance.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace gmm {

// ---------------------------------------------------------------------------
// Sandwich attacks

template <Scalar T>
struct BasicSandwichSpec
{
    std::size_t pool = 0;
    Asset send = Asset::X; // asset sent by both the victim and the front-run
    T victim_dx{0};
    T attack_dx{0};
};

template <Scalar T>
struct BasicSandwichReport
{
    T attacker_profit{0}; // in units of the sent asset; may be negative
    T victim_out{0};
    BasicQuote<T> front;
    BasicQuote<T> victim;
    BasicQuote<T> back;
    // initial, after front-run, after victim, after back-run
    std::vector<BasicEcosystem<T>> trajectory;
};

using SandwichSpec = BasicSandwichSpec<Rational>;
using SandwichReport = BasicSandwichReport<Rational>;

/// Front-run, victim, then a back-run that sends exactly the front-run's
/// output back to the same pool.
template <Scalar T>
BasicSandwichReport<T> simulate_sandwich(const BasicEcosystem<T>& eco, const BasicSandwichSpec<T>& spec,
                                         Algorithm alg)
{
    if (!(spec.victim_dx > 0))
        throw DomainError("simulate_sandwich: victim order must be positive");
    detail::require_nonnegative(spec.attack_dx, "simulate_sandwich");
    BasicSandwichReport<T> rep;
    rep.trajectory.push_back(eco);

    auto front = execute(eco, BasicSwapOrder<T>{spec.pool, spec.send, spec.attack_dx, SenderTag::Attacker}, alg);
    auto victim = execute(front.ecosystem,
                          BasicSwapOrder<T>{spec.pool, spec.send, spec.victim_dx, SenderTag::Trader}, alg);
    auto back = execute(victim.ecosystem,
                        BasicSwapOrder<T>{spec.pool, other(spec.send), front.quote.amount_out, SenderTag::Attacker},
                        alg);

    rep.front = front.quote;
    rep.victim = victim.quote;
    rep.back = back.quote;
    rep.victim_out = victim.quote.amount_out;
    rep.attacker_profit = back.quote.amount_out - spec.attack_dx;
    rep.trajectory.push_back(std::move(front.ecosystem));
    rep.trajectory.push_back(std::move(victim.ecosystem));
    rep.trajectory.push_back(std::move(back.ecosystem));
    return rep;
}

/// Two pools at a common ratio with the attacked pool first: (x_i, r x_i) and
/// (x - x_i, r (x - x_i)). Collapses to one pool when x equals x_i.
template <Scalar T>
BasicEcosystem<T> equal_ratio_ecosystem(const T& x_i, const T& x_global, const T& r)
{
    if (x_global < x_i)
        throw DomainError("global reserve below the attacked pool's reserve");
    std::vector<std::pair<T, T>> reserves{{x_i, r * x_i}};
    if (x_global > x_i)
        reserves.emplace_back(x_global - x_i, r * (x_global - x_i));
    return BasicEcosystem<T>::from_reserves(reserves);
}

/// Attacker profit of a sandwich on a single constant-product pool with
/// reserve x_i of the sent asset. Independent of the other reserve.
template <Scalar T>
T sandwich_profit_cpmm_closed(const T& x_i, const T& victim_dx, const T& attack_dx)
{
    if (!(x_i > 0))
        throw DomainError("sandwich_profit_cpmm_closed: x_i must be positive");
    detail::require_nonnegative(victim_dx, "sandwich_profit_cpmm_closed");
    detail::require_nonnegative(attack_dx, "sandwich_profit_cpmm_closed");
    const T a = attack_dx / x_i;
    const T v = victim_dx / x_i;
    const T s = 1 + a + v;
    return (s * s / (s * (1 + a) - v) - 1) * attack_dx;
}

/// Attacker profit under GMM when the attacked pool holds x_i of a global
/// reserve x_global, all pools sharing one ratio.
template <Scalar T>
T sandwich_profit_gmm_closed(const T& x_i, const T& x_global, const T& victim_dx, const T& attack_dx)
{
    if (!(x_i > 0))
        throw DomainError("sandwich_profit_gmm_closed: x_i must be positive");
    if (x_global < x_i)
        throw DomainError("sandwich_profit_gmm_closed: x_global below x_i");
    detail::require_nonnegative(victim_dx, "sandwich_profit_gmm_closed");
    detail::require_nonnegative(attack_dx, "sandwich_profit_gmm_closed");
    const T local = 1 + attack_dx / x_i + victim_dx / x_i;
    const T global = 1 + attack_dx / x_global + victim_dx / x_global;
    return (global * local / (local * (1 + attack_dx / x_i) - victim_dx / x_global) - 1) * attack_dx;
}

/// GMM profit when the rest of the ecosystem holds beta times the attacked
/// pool's reserve. Ratios are taken relative to x_i.
template <Scalar T>
T sandwich_profit_beta(const T& x_i, const T& beta, const T& victim_dx, const T& attack_dx)
{
    if (!(x_i > 0))
        throw DomainError("sandwich_profit_beta: x_i must be positive");
    if (beta < 0)
        throw DomainError("sandwich_profit_beta: beta must be nonnegative");
    detail::require_nonnegative(victim_dx, "sandwich_profit_beta");
    detail::require_nonnegative(attack_dx, "sandwich_profit_beta");
    const T d = victim_dx / x_i;
    const T dh = attack_dx / x_i;
    const T scale = 1 + beta;
    const T num = (1 + (d + dh) / scale) * (1 + d + dh);
    const T den = (1 + dh) * (1 + d + dh) - d / scale;
    return (num / den - 1) * attack_dx;
}

/// GMM profit when x_global is split evenly across n pools. Ratios are taken
/// relative to x_global.
template <Scalar T>
T sandwich_profit_nsplit(const T& x_global, unsigned n, const T& victim_dx, const T& attack_dx)
{
    if (n == 0)
        throw DomainError("sandwich_profit_nsplit: n must be at least 1");
    if (!(x_global > 0))
        throw DomainError("sandwich_profit_nsplit: x_global must be positive");
    detail::require_nonnegative(victim_dx, "sandwich_profit_nsplit");
    detail::require_nonnegative(attack_dx, "sandwich_profit_nsplit");
    const T nn(n);
    const T d = victim_dx / x_global;
    const T dh = attack_dx / x_global;
    const T num = (1 + d + dh) * (1 + nn * d + nn * dh);
    const T den = (1 + nn * dh) * (1 + nn * d + nn * dh) - d;
    return (num / den - 1) * attack_dx;
}

// ---------------------------------------------------------------------------
// Arbitrage cycles

template <Scalar T>
struct BasicCycleLeg
{
    std::size_t pool = 0;
    Asset send = Asset::X;
    T amount_in{0};
    T amount_out{0};
};

template <Scalar T>
struct BasicArbitrageCycle
{
    std::vector<BasicCycleLeg<T>> legs;
    Asset numeraire = Asset::Y;
    // Arbitrageur's signed net position (received minus sent) per asset.
    T net_x{0};
    T net_y{0};
    T profit{0}; // net position in the numeraire
    BasicEcosystem<T> final_state;
};

using ArbitrageCycle = BasicArbitrageCycle<Rational>;

/// Sends `amount` of `start` to pools[0], then forwards each leg's proceeds
/// to the next pool. With an even number of legs the cycle closes in `start`.
template <Scalar T>
BasicArbitrageCycle<T> execute_cycle(const BasicEcosystem<T>& eco, Asset start, const T& amount,
                                     const std::vector<std::size_t>& pools, Algorithm alg)
{
    if (pools.empty())
        throw DomainError("execute_cycle: no legs");
    BasicArbitrageCycle<T> cycle{{}, start, T(0), T(0), T(0), eco};
    Asset send = start;
    T in = amount;
    for (std::size_t p : pools)
    {
        auto res = execute(cycle.final_state, BasicSwapOrder<T>{p, send, in, SenderTag::Arbitrageur}, alg);
        cycle.legs.push_back({p, send, in, res.quote.amount_out});
        (send == Asset::X ? cycle.net_x : cycle.net_y) -= in;
        (send == Asset::X ? cycle.net_y : cycle.net_x) += res.quote.amount_out;
        cycle.final_state = std::move(res.ecosystem);
        in = std::move(res.quote.amount_out);
        send = other(send);
    }
    cycle.profit = start == Asset::X ? cycle.net_x : cycle.net_y;
    return cycle;
}

/// Most profitable two-leg cycle between two pools, starting and ending in
/// `numeraire`. Both pool orders are searched by golden section over
/// [0, 10 * first pool's numeraire reserve]; the winner is re-evaluated in T.
template <Scalar T>
BasicArbitrageCycle<T> best_two_pool_arbitrage(const BasicEcosystem<T>& eco, Algorithm alg,
                                               Asset numeraire = Asset::Y)
{
    if (eco.size() != 2)
        throw DomainError("best_two_pool_arbitrage: needs exactly two pools");
    const auto eco_real = convert_ecosystem<Real>(eco);
    std::optional<BasicArbitrageCycle<T>> best;
    for (const std::vector<std::size_t>& order : {std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{1, 0}})
    {
        const auto profit = [&](const Real& a) -> Real {
            try
            {
                return execute_cycle(eco_real, numeraire, a, order, alg).profit;
            }
            catch (const InvariantViolation&)
            {
                return Real(-std::numeric_limits<double>::max());
            }
        };
        const Real hi = 10 * num_cast<Real>(eco.pool(order[0]).reserve(numeraire));
        const MaxResult m = golden_section_max(profit, Real(0), hi);
        auto cycle = execute_cycle(eco, numeraire, num_cast<T>(m.argmax), order, alg);
        if (!best || cycle.profit > best->profit)
            best = std::move(cycle);
    }
    return *best;
}

template <Scalar T>
struct BasicCertificate
{
    T max_profit{0};
    std::optional<BasicArbitrageCycle<T>> best;
    std::size_t evaluated = 0;
    std::size_t skipped = 0; // cycles that would deplete a pool (nGMM only)
};

/// Samples random closed cycles (2, 4 or 6 legs, random start asset, random
/// pools, log-uniform start size between 1e-6 and 1 times the first pool's
/// reserve) and reports the largest profit found. Deterministic per seed.
template <Scalar T>
BasicCertificate<T> no_arbitrage_certificate(const BasicEcosystem<T>& eco, std::size_t samples, std::uint64_t seed,
                                             Algorithm alg = Algorithm::Gmm)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pool_dist(0, eco.size() - 1);
    std::uniform_int_distribution<int> legs_dist(1, 3);
    std::uniform_int_distribution<int> asset_dist(0, 1);
    std::uniform_real_distribution<double> log_size(-6.0, 0.0);

    BasicCertificate<T> cert;
    bool first = true;
    for (std::size_t s = 0; s < samples; ++s)
    {
        const Asset start = asset_dist(rng) == 0 ? Asset::X : Asset::Y;
        const int legs = 2 * legs_dist(rng);
        std::vector<std::size_t> pools(static_cast<std::size_t>(legs));
        for (auto& p : pools)
            p = pool_dist(rng);
        const double fraction = std::pow(10.0, log_size(rng));
        const T amount = eco.pool(pools[0]).reserve(start) * num_cast<T>(fraction);
        try
        {
            auto cycle = execute_cycle(eco, start, amount, pools, alg);
            ++cert.evaluated;
            if (first || cycle.profit > cert.max_profit)
            {
                cert.max_profit = cycle.profit;
                cert.best = std::move(cycle);
                first = false;
            }
        }
        catch (const InvariantViolation&)
        {
            ++cert.skipped;
        }
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Exploit sequences

template <Scalar T>
struct BasicPoolDelta
{
    std::string pool_id;
    T dx{0};
    T dy{0};
    // Final reserves weakly below initial in both assets, strictly in one.
    bool exploited = false;
};

template <Scalar T>
struct BasicExploitReport
{
    std::vector<BasicPoolDelta<T>> deltas;
    BasicEcosystem<T> final_state;
    bool any_exploited = false;
};

template <Scalar T>
BasicExploitReport<T> replay_exploit_sequence(const BasicEcosystem<T>& eco,
                                              const std::vector<BasicSwapOrder<T>>& orders, Algorithm alg)
{
    BasicEcosystem<T> cur = eco;
    for (const auto& o : orders)
        cur = execute(cur, o, alg).ecosystem;
    BasicExploitReport<T> rep{{}, cur, false};
    for (std::size_t i = 0; i < eco.size(); ++i)
    {
        const auto& a = eco.pool(i);
        const auto& b = cur.pool(i);
        BasicPoolDelta<T> d{a.id(), b.x() - a.x(), b.y() - a.y(), false};
        d.exploited = d.dx <= 0 && d.dy <= 0 && (d.dx < 0 || d.dy < 0);
        rep.any_exploited = rep.any_exploited || d.exploited;
        rep.deltas.push_back(std::move(d));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Insider trader of the two-pool benchmark

template <Scalar T>
struct BasicInsiderPlan
{
    std::vector<BasicSwapOrder<T>> orders;
    // initial state followed by the state after each order
    std::vector<BasicEcosystem<T>> states;
    // Small pool's post-trade reserve of the sent asset: optimizer vs the
    // closed form derived from the aggregate-product identity.
    double second_reserve_optimizer = 0;
    double second_reserve_closed_form = 0;
    double closed_form_rel_gap = 0;
};

using InsiderPlan = BasicInsiderPlan<Rational>;

namespace detail {

template <Scalar T>
BasicInsiderPlan<T> insider_canonical(const BasicEcosystem<T>& eco, const T& r_init, const T& r_new, Asset send)
{
    // Sending X moves every ratio down from r_init to r_new.
    BasicInsiderPlan<T> plan;
    plan.states.push_back(eco);
    const auto& big = eco.pool(0);
    const T dx1 = big.x() * (num_sqrt(T(r_init / r_new)) - 1);
    auto first = apply_swap(eco, BasicSwapOrder<T>{0, Asset::X, dx1, SenderTag::Insider}, Algorithm::Gmm);
    plan.orders.push_back({0, send, dx1, SenderTag::Insider});
    plan.states.push_back(first.ecosystem);
    if (eco.size() == 1)
        return plan;

    const auto after_first = convert_ecosystem<Real>(first.ecosystem);
    const Real r_new_real = num_cast<Real>(r_new);
    const auto profit = [&](const Real& a) -> Real {
        return gmm_out(a, after_first, 1).amount_out - r_new_real * a;
    };
    const Real x2 = num_cast<Real>(eco.pool(1).x());
    const MaxResult m = golden_section_max(profit, Real(0), 10 * x2);
    const T dx2 = num_cast<T>(m.argmax);
    auto second = apply_swap(first.ecosystem, BasicSwapOrder<T>{1, Asset::X, dx2, SenderTag::Insider}, Algorithm::Gmm);
    plan.orders.push_back({1, send, dx2, SenderTag::Insider});
    plan.states.push_back(second.ecosystem);

    const Real alpha = x2 / num_cast<Real>(eco.total_x());
    const Real k = (1 - alpha) / alpha;
    const Real q = boost::multiprecision::sqrt(num_cast<Real>(r_init) / r_new_real);
    const Real closed = x2 * q * (boost::multiprecision::sqrt((1 + k * q) * (1 + k / q)) - k);
    const Real found = x2 + m.argmax;
    plan.second_reserve_optimizer = static_cast<double>(found);
    plan.second_reserve_closed_form = static_cast<double>(closed);
    plan.closed_form_rel_gap = static_cast<double>(boost::multiprecision::abs(found - closed) / closed);
    return plan;
}

} // namespace detail

/// Two-trade plan of an insider who expects the price to move from the
/// pools' common ratio r_init to r_new (both Y per X): a CPMM-priced trade at
/// the large pool (index 0) that lands it exactly on r_new, then the
/// profit-maximizing nGMM-priced trade at the small pool (index 1). Orders
/// send X when r_new < r_init and Y otherwise.
template <Scalar T>
BasicInsiderPlan<T> insider_optimal_trades(const BasicEcosystem<T>& eco, const T& r_new)
{
    if (eco.size() > 2)
        throw DomainError("insider_optimal_trades: at most two pools");
    const T r_init = eco.pool(0).ratio();
    for (const auto& p : eco.pools())
        if (p.ratio() != r_init)
            throw DomainError("insider_optimal_trades: pools are not at a common ratio");
    if (!(r_new > 0))
        throw DomainError("insider_optimal_trades: target ratio must be positive");
    if (eco.size() == 2 && eco.pool(1).x() > eco.pool(0).x())
        throw DomainError("insider_optimal_trades: the first pool must be the larger one");
    if (r_new == r_init)
        return {{}, {eco}, 0, 0, 0};
    if (r_new < r_init)
        return detail::insider_canonical(eco, r_init, r_new, Asset::X);

    auto plan = detail::insider_canonical(eco.relabeled(), T(1 / r_init), T(1 / r_new), Asset::Y);
    for (auto& s : plan.states)
        s = s.relabeled();
    return plan;
}

} // namespace gmm
