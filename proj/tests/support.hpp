// Helpers shared by the test binaries.
#pragma once

#include "gmm/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gmm::test {

inline Rational R(const char* text) { return parse_decimal(text); }

/// Seeded source of exact random rationals.
class RandomRationals
{
public:
    explicit RandomRationals(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    /// Rational in [lo, hi] with a random denominator up to 1000.
    Rational between(std::int64_t lo, std::int64_t hi)
    {
        const std::uint64_t den = 1 + below(1000);
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) * den;
        return Rational(lo) + Rational(Integer(below(span + 1)), Integer(den));
    }

    /// Log-uniform rational between 10^lo_exp and 10^hi_exp (6 significant digits).
    Rational log_uniform(int lo_exp, int hi_exp)
    {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double v = std::pow(10.0, lo_exp + (hi_exp - lo_exp) * u);
        return round6(v);
    }

    /// Ecosystem of `n` pools with log-uniform reserves and ratios.
    Ecosystem ecosystem(std::size_t n)
    {
        std::vector<std::pair<Rational, Rational>> reserves;
        for (std::size_t i = 0; i < n; ++i)
        {
            Rational x = log_uniform(0, 4);
            Rational ratio = log_uniform(-1, 4);
            reserves.emplace_back(x, x * ratio);
        }
        return Ecosystem::from_reserves(reserves);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    static Rational round6(double v)
    {
        // Keep six significant digits so values stay short.
        const int e = static_cast<int>(std::floor(std::log10(v))) - 5;
        const double m = std::round(v / std::pow(10.0, e));
        Rational out(static_cast<long long>(m));
        if (e >= 0)
            out *= boost::multiprecision::pow(Integer(10), static_cast<unsigned>(e));
        else
            out /= boost::multiprecision::pow(Integer(10), static_cast<unsigned>(-e));
        return out;
    }

    std::mt19937_64 engine_;
};

} // namespace gmm::test
