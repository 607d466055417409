#pragma once

#include "gmm/number.hpp"

#include <functional>

namespace gmm {

struct MaxResult
{
    Real argmax;
    Real value;
    int iterations = 0;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// Stops when the bracket is narrower than rel_tol * max(|hi|, 1) or after
/// max_iter steps. The endpoints are compared against the interior optimum so
/// monotone objectives return the better boundary.
inline MaxResult golden_section_max(const std::function<Real(const Real&)>& f, Real lo, Real hi,
                                    double rel_tol = 1e-12, int max_iter = 500)
{
    if (hi < lo)
        throw DomainError("golden_section_max: empty interval");
    const Real inv_phi = (boost::multiprecision::sqrt(Real(5)) - 1) / 2;
    const Real abs_hi = boost::multiprecision::abs(hi);
    const Real scale = abs_hi > 1 ? abs_hi : Real(1);
    const Real tol = Real(rel_tol) * scale;

    Real a = lo;
    Real b = hi;
    Real c = b - inv_phi * (b - a);
    Real d = a + inv_phi * (b - a);
    Real fc = f(c);
    Real fd = f(d);
    int it = 0;
    while (b - a > tol && it < max_iter)
    {
        if (fc >= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++it;
    }
    MaxResult best{(a + b) / 2, Real(0), it};
    best.value = f(best.argmax);
    for (const Real& edge : {lo, hi})
    {
        Real v = f(edge);
        if (v > best.value)
        {
            best.argmax = edge;
            best.value = v;
        }
    }
    return best;
}

} // namespace gmm
