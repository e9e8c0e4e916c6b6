#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace okan::app {

struct Check {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
    std::string detail;
};

/// Put-call parity residual and B-S vs B-S-M at q = 0 on `points` random parameter sets.
std::vector<Check> parity_suite(std::uint64_t seed, std::size_t points = 1000);

/// Closed form vs antithetic Monte Carlo on a 10-point grid, calls and puts.
/// measured = max |analytic - MC| / std_error, threshold 3.
std::vector<Check> monte_carlo_suite(std::uint64_t seed, std::size_t paths = 1'000'000, unsigned threads = 1);

/// Finite-difference PDE residual of the closed form on a 5 x 5 interior grid
/// against the payoff surface; passes when the payoff residual is >= 100x larger.
std::vector<Check> pde_suite();

/// Treats the payoff surface as a candidate price and applies the closed-form
/// residual tolerance. Expected to fail.
Check payoff_negative_control();

std::string format_check(const Check& c);

}  // namespace okan::app
