#include "gmm/number.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace gmm {

namespace {

constexpr unsigned kSqrtFractionBits = 256;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

} // namespace

Rational NumTraits<Rational>::sqrt(const Rational& v)
{
    if (v < 0)
        throw DomainError("sqrt of a negative rational");
    if (v == 0)
        return Rational(0);
    const Integer p = boost::multiprecision::numerator(v);
    const Integer q = boost::multiprecision::denominator(v);
    // sqrt(p/q) = sqrt(p*q)/q
    const Integer pq = p * q;
    const Integer root = boost::multiprecision::sqrt(pq);
    if (root * root == pq)
        return Rational(root, q);
    const Integer scale = Integer(1) << kSqrtFractionBits;
    const Integer scaled = boost::multiprecision::sqrt(Integer(pq * scale * scale));
    return Rational(scaled, q * scale);
}

Rational parse_decimal(std::string_view text)
{
    const auto fail = [&]() -> Rational {
        throw DomainError("not a decimal number: '" + std::string(text) + "'");
    };
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-'))
        negative = text[i++] == '-';

    std::string digits;
    std::size_t fraction_digits = 0;
    bool seen_point = false;
    for (; i < text.size(); ++i)
    {
        const char c = text[i];
        if (is_digit(c))
        {
            digits.push_back(c);
            if (seen_point)
                ++fraction_digits;
        }
        else if (c == '.' && !seen_point)
            seen_point = true;
        else
            break;
    }
    if (digits.empty())
        return fail();

    long exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E'))
    {
        ++i;
        bool exp_negative = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-'))
            exp_negative = text[i++] == '-';
        const std::size_t start = i;
        while (i < text.size() && is_digit(text[i]))
            ++i;
        if (i == start || i - start > 6)
            return fail();
        exponent = std::stol(std::string(text.substr(start, i - start)));
        if (exp_negative)
            exponent = -exponent;
    }
    if (i != text.size())
        return fail();

    // A leading zero would make the integer parser read octal.
    const std::size_t nonzero = digits.find_first_not_of('0');
    Integer mantissa(nonzero == std::string::npos ? std::string("0") : digits.substr(nonzero));
    if (negative)
        mantissa = -mantissa;
    const long shift = exponent - static_cast<long>(fraction_digits);
    Integer ten_power = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
    if (shift >= 0)
        return Rational(mantissa * ten_power);
    return Rational(mantissa, ten_power);
}

std::string to_fraction_string(const Rational& v)
{
    return v.str();
}

std::string to_full_precision(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string to_display(double v, int decimals)
{
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.*f", decimals, v);
    std::string s(buf.data());
    if (s == "-0" || s.rfind("-0.", 0) == 0)
    {
        bool all_zero = true;
        for (char c : s.substr(1))
            all_zero = all_zero && (c == '0' || c == '.');
        if (all_zero)
            s.erase(0, 1);
    }
    return s;
}

} // namespace gmm
