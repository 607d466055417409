// Scripted worked examples with their reference figures, used as a
// regression gate.
#pragma once

#include "gmm/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gmm {

struct ToyCheck
{
    std::string label;
    double expected = 0;
    double actual = 0;
    std::string unit;
    int decimals = 2; // decimals of the reference figure; one unit of the last digit is tolerated
    bool pass = false;
};

struct ToyReport
{
    int part = 0;
    std::string title;
    std::string algorithm;
    std::vector<ToyCheck> checks;
    bool pass() const;
};

/// Passes when |actual - expected| is within one unit of the reference
/// figure's last digit or within relative 1e-3.
bool toy_within_tolerance(double expected, double actual, int decimals);

/// Runs part 1..8. `alg` overrides the algorithm where a part supports it
/// (part 5: ngmm or gmm). Throws DomainError for unknown parts.
ToyReport run_toy_part(int part, std::optional<Algorithm> alg = std::nullopt);

std::string format_toy_report(const ToyReport& r);

} // namespace gmm
