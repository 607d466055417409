#include "gmm/sweep.hpp"

#include "gmm/analytics.hpp"

#include <ostream>
#include <string>

namespace gmm {

std::vector<Rational> parse_range(std::string_view text)
{
    const auto first = text.find(':');
    const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos)
        throw DomainError("range must look like start:stop:step, got '" + std::string(text) + "'");
    const Rational start = parse_decimal(text.substr(0, first));
    const Rational stop = parse_decimal(text.substr(first + 1, second - first - 1));
    const Rational step = parse_decimal(text.substr(second + 1));
    if (!(step > 0))
        throw DomainError("range step must be positive");
    if (stop < start)
        throw DomainError("empty range '" + std::string(text) + "'");
    std::vector<Rational> out;
    for (Rational v = start; v <= stop; v += step)
        out.push_back(v);
    return out;
}

void sweep_mev(std::ostream& out, const Rational& x_i, const Rational& victim, const std::vector<Rational>& attacks,
               const Rational* x_global)
{
    out << "attack_dx,profit\n";
    for (const auto& a : attacks)
    {
        const Rational p = x_global ? sandwich_profit_gmm_closed(x_i, *x_global, victim, a)
                                    : sandwich_profit_cpmm_closed(x_i, victim, a);
        out << to_full_precision(to_double(a)) << ',' << to_full_precision(to_double(p)) << '\n';
    }
}

void sweep_il(std::ostream& out, const std::vector<Rational>& factors, const std::vector<Rational>& alphas)
{
    out << "ratio,alpha,il_cpmm,il_gmm\n";
    for (const auto& alpha : alphas)
        for (const auto& f : factors)
        {
            if (!(f > 0))
                throw DomainError("price ratio factors must be positive");
            const double cp = to_double(il_cpmm(Rational(1), f));
            const double gm = to_double(il_gmm_small_pool(Rational(1), f, alpha));
            out << to_full_precision(to_double(f)) << ',' << to_full_precision(to_double(alpha)) << ','
                << to_full_precision(cp) << ',' << to_full_precision(gm) << '\n';
        }
}

} // namespace gmm
