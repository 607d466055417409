// Pricing primitives for single pools and pool ecosystems.
//
// Orientation: every formula is written for an order that sends asset X and
// receives asset Y. Orders sending Y are handled by relabeling the pools
// (swapping the two reserves), quoting, and relabeling back.
#pragma once

#include "gmm/number.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace gmm {

enum class Asset
{
    X,
    Y
};

constexpr Asset other(Asset a) { return a == Asset::X ? Asset::Y : Asset::X; }

enum class Algorithm
{
    Cpmm,
    Ngmm, // demonstration only: exploitable and can deplete reserves
    Gmm,
    GmmRebal
};

enum class Branch
{
    LocalCpmm,
    GlobalNgmm
};

enum class SwapClass
{
    Divergent,
    Convergent,
    Overshooting
};

enum class SenderTag
{
    Trader,
    Arbitrageur,
    Attacker,
    Insider,
    InterPool
};

std::string_view to_string(Asset a);
std::string_view to_string(Algorithm a);
std::string_view to_string(Branch b);
std::string_view to_string(SwapClass c);

/// Accepts "cpmm", "ngmm", "gmm", "gmm-rebal" (case-insensitive, '_' or '-').
Algorithm parse_algorithm(std::string_view text);
Asset parse_asset(std::string_view text);

/// One AMM's reserve pair. Both reserves are strictly positive.
template <Scalar T>
class BasicPool
{
public:
    BasicPool(std::string id, T x, T y) : id_(std::move(id)), x_(std::move(x)), y_(std::move(y))
    {
        if (!(x_ > 0) || !(y_ > 0))
            throw DomainError("pool '" + id_ + "' needs strictly positive reserves");
    }

    const std::string& id() const { return id_; }
    const T& x() const { return x_; }
    const T& y() const { return y_; }
    const T& reserve(Asset a) const { return a == Asset::X ? x_ : y_; }

    /// Y per X.
    T ratio() const { return y_ / x_; }
    T product() const { return x_ * y_; }

    BasicPool relabeled() const { return BasicPool(id_, y_, x_); }
    BasicPool with_reserves(T x, T y) const { return BasicPool(id_, std::move(x), std::move(y)); }

    bool operator==(const BasicPool&) const = default;

private:
    std::string id_;
    T x_;
    T y_;
};

/// Ordered, non-empty collection of pools trading the same pair.
template <Scalar T>
class BasicEcosystem
{
public:
    using Pool = BasicPool<T>;

    explicit BasicEcosystem(std::vector<Pool> pools) : pools_(std::move(pools))
    {
        if (pools_.empty())
            throw DomainError("ecosystem needs at least one pool");
        std::unordered_set<std::string> seen;
        for (const auto& p : pools_)
            if (!seen.insert(p.id()).second)
                throw DomainError("duplicate pool id '" + p.id() + "'");
    }

    /// Pools named AMM1, AMM2, ... in order.
    static BasicEcosystem from_reserves(const std::vector<std::pair<T, T>>& reserves)
    {
        std::vector<Pool> pools;
        pools.reserve(reserves.size());
        for (std::size_t i = 0; i < reserves.size(); ++i)
            pools.emplace_back("AMM" + std::to_string(i + 1), reserves[i].first, reserves[i].second);
        return BasicEcosystem(std::move(pools));
    }

    std::size_t size() const { return pools_.size(); }
    const Pool& pool(std::size_t i) const
    {
        check_index(i);
        return pools_[i];
    }
    std::span<const Pool> pools() const { return pools_; }

    std::optional<std::size_t> index_of(std::string_view id) const
    {
        for (std::size_t i = 0; i < pools_.size(); ++i)
            if (pools_[i].id() == id)
                return i;
        return std::nullopt;
    }

    T total_x() const
    {
        T s(0);
        for (const auto& p : pools_)
            s += p.x();
        return s;
    }
    T total_y() const
    {
        T s(0);
        for (const auto& p : pools_)
            s += p.y();
        return s;
    }
    /// Global ratio y/x of the aggregate reserves.
    T ratio() const { return total_y() / total_x(); }
    T others_x(std::size_t i) const { return total_x() - pool(i).x(); }
    T others_y(std::size_t i) const { return total_y() - pool(i).y(); }

    BasicEcosystem with_pool(std::size_t i, T x, T y) const
    {
        check_index(i);
        BasicEcosystem copy = *this;
        copy.pools_[i] = pools_[i].with_reserves(std::move(x), std::move(y));
        return copy;
    }

    BasicEcosystem relabeled() const
    {
        std::vector<Pool> flipped;
        flipped.reserve(pools_.size());
        for (const auto& p : pools_)
            flipped.push_back(p.relabeled());
        return BasicEcosystem(std::move(flipped));
    }

    /// Lowest index attaining the maximum reserve product.
    std::size_t largest_product_index() const
    {
        std::size_t best = 0;
        T best_product = pools_[0].product();
        for (std::size_t i = 1; i < pools_.size(); ++i)
        {
            T p = pools_[i].product();
            if (p > best_product)
            {
                best = i;
                best_product = std::move(p);
            }
        }
        return best;
    }

    bool operator==(const BasicEcosystem&) const = default;

private:
    void check_index(std::size_t i) const
    {
        if (i >= pools_.size())
            throw DomainError("pool index " + std::to_string(i) + " out of range");
    }

    std::vector<Pool> pools_;
};

template <Scalar T>
struct BasicSwapOrder
{
    std::size_t pool = 0;
    Asset send = Asset::X;
    T amount_in{0};
    SenderTag tag = SenderTag::Trader;
};

template <Scalar T>
struct BasicQuote
{
    T amount_out{0};
    Branch branch = Branch::LocalCpmm;
    SwapClass classification = SwapClass::Divergent;
};

template <Scalar T>
struct BasicSwapResult
{
    BasicEcosystem<T> ecosystem;
    BasicQuote<T> quote;
};

using Pool = BasicPool<Rational>;
using Ecosystem = BasicEcosystem<Rational>;
using SwapOrder = BasicSwapOrder<Rational>;
using Quote = BasicQuote<Rational>;
using SwapResult = BasicSwapResult<Rational>;

using PoolF = BasicPool<double>;
using EcosystemF = BasicEcosystem<double>;
using SwapOrderF = BasicSwapOrder<double>;
using QuoteF = BasicQuote<double>;

template <Scalar To, Scalar From>
BasicEcosystem<To> convert_ecosystem(const BasicEcosystem<From>& eco)
{
    std::vector<BasicPool<To>> pools;
    pools.reserve(eco.size());
    for (const auto& p : eco.pools())
        pools.emplace_back(p.id(), num_cast<To>(p.x()), num_cast<To>(p.y()));
    return BasicEcosystem<To>(std::move(pools));
}

namespace detail {

template <Scalar T>
void require_nonnegative(const T& dx, const char* what)
{
    if (dx < 0)
        throw DomainError(std::string(what) + ": negative order size");
}

} // namespace detail

/// Y returned by a constant-product pool (x, y) for dx of X.
template <Scalar T>
T cpmm_out(const T& dx, const T& x, const T& y)
{
    if (!(x > 0) || !(y > 0))
        throw DomainError("cpmm_out: reserves must be strictly positive");
    detail::require_nonnegative(dx, "cpmm_out");
    return y * dx / (x + dx);
}

/// X that must be sent to a constant-product pool (x, y) to receive dy of Y.
template <Scalar T>
T cpmm_in_for_out(const T& dy, const T& x, const T& y)
{
    if (!(x > 0) || !(y > 0))
        throw DomainError("cpmm_in_for_out: reserves must be strictly positive");
    detail::require_nonnegative(dy, "cpmm_in_for_out");
    if (!(dy < y))
        throw DomainError("cpmm_in_for_out: requested output exhausts the pool");
    return x * dy / (y - dy);
}

/// Constant-product formula on the aggregate reserves, capped at the quoted
/// pool's own Y reserve.
template <Scalar T>
T ngmm_out(const T& dx, const BasicEcosystem<T>& eco, std::size_t i)
{
    detail::require_nonnegative(dx, "ngmm_out");
    const auto& p = eco.pool(i);
    T global = eco.total_y() * dx / (eco.total_x() + dx);
    return global < p.y() ? global : p.y();
}

/// Divergent iff the pool's ratio is weakly below the rest of the ecosystem;
/// otherwise convergent when the nGMM price is no better than CPMM, else
/// overshooting. Single-pool ecosystems are divergent by convention.
template <Scalar T>
SwapClass classify_swap(const T& dx, const BasicEcosystem<T>& eco, std::size_t i)
{
    detail::require_nonnegative(dx, "classify_swap");
    const auto& p = eco.pool(i);
    if (eco.size() < 2)
        return SwapClass::Divergent;
    // r_i <= r_-i  <=>  y_i * x_-i <= y_-i * x_i
    if (p.y() * eco.others_x(i) <= eco.others_y(i) * p.x())
        return SwapClass::Divergent;
    if (ngmm_out(dx, eco, i) <= cpmm_out(dx, p.x(), p.y()))
        return SwapClass::Convergent;
    return SwapClass::Overshooting;
}

template <Scalar T>
BasicQuote<T> gmm_out(const T& dx, const BasicEcosystem<T>& eco, std::size_t i)
{
    const auto& p = eco.pool(i);
    T local = cpmm_out(dx, p.x(), p.y());
    T global = ngmm_out(dx, eco, i);
    const SwapClass cls = classify_swap(dx, eco, i);
    BasicQuote<T> q;
    q.classification = cls;
    if (cls == SwapClass::Convergent)
    {
        q.branch = Branch::GlobalNgmm;
        q.amount_out = std::move(global);
    }
    else
    {
        q.branch = Branch::LocalCpmm;
        q.amount_out = std::move(local);
        if constexpr (NumTraits<T>::exact)
            if (global < q.amount_out)
                throw InvariantViolation("gmm_out: CPMM branch selected above the nGMM price");
    }
    return q;
}

template <Scalar T>
struct CanonicalOrder
{
    BasicSwapOrder<T> order;
    BasicPool<T> pool;
    bool relabeled = false;
};

/// Rewrites a send-Y order as a send-X order on the relabeled pool.
template <Scalar T>
CanonicalOrder<T> canonicalize_direction(const BasicSwapOrder<T>& order, const BasicPool<T>& pool)
{
    if (order.send == Asset::X)
        return {order, pool, false};
    BasicSwapOrder<T> flipped = order;
    flipped.send = Asset::X;
    return {flipped, pool.relabeled(), true};
}

/// Quote for dx sent to pool i in the canonical (send-X) orientation.
template <Scalar T>
BasicQuote<T> quote_canonical(const T& dx, const BasicEcosystem<T>& eco, std::size_t i, Algorithm alg)
{
    switch (alg)
    {
    case Algorithm::Cpmm: {
        const auto& p = eco.pool(i);
        return {cpmm_out(dx, p.x(), p.y()), Branch::LocalCpmm, classify_swap(dx, eco, i)};
    }
    case Algorithm::Ngmm:
        return {ngmm_out(dx, eco, i), Branch::GlobalNgmm, classify_swap(dx, eco, i)};
    case Algorithm::Gmm:
        return gmm_out(dx, eco, i);
    case Algorithm::GmmRebal:
        break;
    }
    throw std::invalid_argument("GMM with rebalancing is quoted by the rebalance module");
}

/// Quote for an order in either orientation.
template <Scalar T>
BasicQuote<T> quote(const BasicEcosystem<T>& eco, const BasicSwapOrder<T>& order, Algorithm alg)
{
    if (order.send == Asset::X)
        return quote_canonical(order.amount_in, eco, order.pool, alg);
    return quote_canonical(order.amount_in, eco.relabeled(), order.pool, alg);
}

/// Executes an order. Only the target pool changes; the input is untouched.
template <Scalar T>
BasicSwapResult<T> apply_swap(const BasicEcosystem<T>& eco, const BasicSwapOrder<T>& order, Algorithm alg)
{
    detail::require_nonnegative(order.amount_in, "apply_swap");
    BasicQuote<T> q = quote(eco, order, alg);
    const auto& p = eco.pool(order.pool);
    const Asset receive = other(order.send);
    if (!(q.amount_out < p.reserve(receive)))
        throw InvariantViolation("apply_swap: output would deplete pool '" + p.id() + "'");
    T x = p.x();
    T y = p.y();
    if (order.send == Asset::X)
    {
        x += order.amount_in;
        y -= q.amount_out;
    }
    else
    {
        y += order.amount_in;
        x -= q.amount_out;
    }
    return {eco.with_pool(order.pool, std::move(x), std::move(y)), std::move(q)};
}

/// Pool holdings valued in Y at `price` (Y per X).
template <Scalar T>
T pool_value(const BasicPool<T>& pool, const T& price)
{
    if (!(price > 0))
        throw DomainError("pool_value: price must be positive");
    return pool.y() + price * pool.x();
}

} // namespace gmm
