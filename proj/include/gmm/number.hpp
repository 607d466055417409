// Number types shared by every pricing routine.
//
// All algorithms are templated on the scalar type. Rational is the reference
// semantics (no rounding anywhere), double is the throughput path, and Real
// (50 significant digits) backs the optimizers that need square roots and
// flat-objective line searches.
#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace gmm {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;
using Real = boost::multiprecision::cpp_bin_float_50;

/// Raised when an input lies outside an operation's domain.
struct DomainError : std::domain_error
{
    using std::domain_error::domain_error;
};

/// Raised when a state invariant that should hold by construction is broken.
struct InvariantViolation : std::logic_error
{
    using std::logic_error::logic_error;
};

template <typename T>
struct NumTraits;

template <>
struct NumTraits<Rational>
{
    static constexpr bool exact = true;
    static constexpr const char* name = "rational";
    // Exact when the argument is a square of a rational, otherwise truncated
    // to 256 fractional bits.
    static Rational sqrt(const Rational& v);
    static double to_double(const Rational& v) { return v.convert_to<double>(); }
};

template <>
struct NumTraits<double>
{
    static constexpr bool exact = false;
    static constexpr const char* name = "float64";
    static double sqrt(double v) { return std::sqrt(v); }
    static double to_double(double v) { return v; }
};

template <>
struct NumTraits<Real>
{
    static constexpr bool exact = false;
    static constexpr const char* name = "real50";
    static Real sqrt(const Real& v) { return boost::multiprecision::sqrt(v); }
    static double to_double(const Real& v) { return v.convert_to<double>(); }
};

template <typename T>
concept Scalar = requires { NumTraits<T>::exact; };

/// Converts between the supported scalar types. Conversions into Rational are
/// exact (binary floats are dyadic rationals).
template <typename To, typename From>
To num_cast(const From& v)
{
    if constexpr (std::is_same_v<To, From>)
        return v;
    else if constexpr (std::is_same_v<To, double>)
        return NumTraits<From>::to_double(v);
    else if constexpr (std::is_same_v<To, Real> && std::is_same_v<From, Rational>)
        return Real(boost::multiprecision::numerator(v)) /
               Real(boost::multiprecision::denominator(v));
    else
        return To(v);
}

template <Scalar T>
T num_sqrt(const T& v)
{
    return NumTraits<T>::sqrt(v);
}

template <Scalar T>
double to_double(const T& v)
{
    return NumTraits<T>::to_double(v);
}

template <Scalar T>
int sign(const T& v)
{
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

/// Sign of a*sqrt(s) + b for s >= 0. Exact for Rational: the comparison is
/// decided by squaring instead of evaluating the root.
template <Scalar T>
int surd_sign(const T& a, const T& b, const T& s)
{
    if constexpr (NumTraits<T>::exact)
    {
        if (s < 0)
            throw DomainError("surd_sign: negative radicand");
        const int sa = s == 0 ? 0 : sign(a);
        const int sb = sign(b);
        if (sa >= 0 && sb >= 0)
            return (sa > 0 || sb > 0) ? 1 : 0;
        if (sa <= 0 && sb <= 0)
            return -1;
        // Mixed signs: compare a^2 s against b^2.
        const int cmp = sign(T(a * a * s - b * b));
        return sa > 0 ? cmp : -cmp;
    }
    else
    {
        return sign(T(a * num_sqrt(s) + b));
    }
}

/// Parses a plain decimal ("-12.5", "0.001", "3e-4") into an exact rational.
/// Throws DomainError on anything else (thousands separators, hex, blanks).
Rational parse_decimal(std::string_view text);

/// Exact "p/q" rendering (or "p" for integers).
std::string to_fraction_string(const Rational& v);

/// Shortest round-trip decimal rendering of a double.
std::string to_full_precision(double v);

/// Fixed-point rendering used for human-readable tables.
std::string to_display(double v, int decimals = 2);

} // namespace gmm
