#include "gmm/core.hpp"

#include <algorithm>
#include <cctype>

namespace gmm {

namespace {

std::string normalize(std::string_view text)
{
    std::string s(text);
    for (char& c : s)
    {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (c == '_')
            c = '-';
    }
    return s;
}

} // namespace

std::string_view to_string(Asset a) { return a == Asset::X ? "X" : "Y"; }

std::string_view to_string(Algorithm a)
{
    switch (a)
    {
    case Algorithm::Cpmm: return "cpmm";
    case Algorithm::Ngmm: return "ngmm";
    case Algorithm::Gmm: return "gmm";
    case Algorithm::GmmRebal: return "gmm-rebal";
    }
    return "?";
}

std::string_view to_string(Branch b) { return b == Branch::LocalCpmm ? "local-cpmm" : "global-ngmm"; }

std::string_view to_string(SwapClass c)
{
    switch (c)
    {
    case SwapClass::Divergent: return "divergent";
    case SwapClass::Convergent: return "convergent";
    case SwapClass::Overshooting: return "overshooting";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view text)
{
    const std::string s = normalize(text);
    if (s == "cpmm")
        return Algorithm::Cpmm;
    if (s == "ngmm")
        return Algorithm::Ngmm;
    if (s == "gmm")
        return Algorithm::Gmm;
    if (s == "gmm-rebal")
        return Algorithm::GmmRebal;
    throw DomainError("unknown algorithm '" + std::string(text) + "'");
}

Asset parse_asset(std::string_view text)
{
    const std::string s = normalize(text);
    if (s == "x")
        return Asset::X;
    if (s == "y")
        return Asset::Y;
    throw DomainError("unknown asset '" + std::string(text) + "' (expected X or Y)");
}

} // namespace gmm
