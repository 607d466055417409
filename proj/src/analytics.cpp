#include "gmm/analytics.hpp"

namespace gmm {

std::string_view to_string(Volatility v) { return v == Volatility::Low ? "low" : "high"; }

} // namespace gmm
