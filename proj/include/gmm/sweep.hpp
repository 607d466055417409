// Parameter sweeps producing the data behind the profit and loss curves.
#pragma once

#include "gmm/number.hpp"

#include <iosfwd>
#include <string_view>
#include <vector>

namespace gmm {

/// Inclusive arithmetic range "start:stop:step" parsed exactly. Throws
/// DomainError when malformed or empty (stop < start, step <= 0).
std::vector<Rational> parse_range(std::string_view text);

/// Sandwich profit over attack sizes. With x_global unset the single-pool
/// CPMM form is used; otherwise the equal-ratio GMM form.
void sweep_mev(std::ostream& out, const Rational& x_i, const Rational& victim, const std::vector<Rational>& attacks,
               const Rational* x_global);

/// Impermanent loss over price-ratio factors r_final/r_init: the CPMM curve
/// and one GMM small-pool curve per alpha.
void sweep_il(std::ostream& out, const std::vector<Rational>& factors, const std::vector<Rational>& alphas);

} // namespace gmm
