#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "okan/pricing.hpp"

namespace okan::verify {

/// Geometric Brownian motion dS = mu S dt + sigma S dz started at `initial`.
struct GbmSpec {
    double initial = 1.0;
    double drift = 0.0;
    double volatility = 0.0;
    double horizon = 1.0;
    /// Kept for path-dependent extensions; terminal sampling is exact.
    std::size_t steps = 1;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
};

struct McOptions {
    bool antithetic = true;
    /// Paths per block; each block draws from its own seed derived from the master seed.
    std::size_t block_size = 1 << 16;
    /// Worker threads. Output does not depend on this value.
    unsigned threads = 1;
};

/// Exact terminal values S0 exp((mu - sigma^2/2) T + sigma sqrt(T) Z).
std::vector<double> simulate_gbm_terminal(const GbmSpec& spec, std::size_t n_paths,
                                          std::uint64_t seed);

/// Discounted risk-neutral expected payoff under GBM with drift r - q.
///
/// With antithetic sampling, n_paths counts individual paths; the standard
/// error is computed over the n_paths/2 pair averages, which are i.i.d.
/// Strike may be zero and volatility may be zero here (both outside the
/// closed-form domain), which the oracle tests use.
McEstimate mc_price(const pricing::MarketParams& p, pricing::OptionKind kind, std::size_t n_paths,
                    std::uint64_t seed, const McOptions& options = {});

/// Price as a function of (spot, time to maturity), holding the rest of p fixed.
using PriceSurface = std::function<double(double spot, double tau)>;

/// Finite-difference residual of df/dt + (r-q) S f_S + 0.5 sigma^2 S^2 f_SS - r f
/// at (p.spot, p.maturity). Calendar time derivative: df/dt = -df/dtau.
double pde_residual(const PriceSurface& surface, const pricing::MarketParams& p, double dS,
                    double dt);

/// Residual of the closed-form BSM price.
double pde_residual(const pricing::MarketParams& p, pricing::OptionKind kind, double dS,
                    double dt);

/// Residual of the raw payoff surface (ignores tau); the negative control.
double payoff_pde_residual(const pricing::MarketParams& p, pricing::OptionKind kind, double dS,
                           double dt);

}  // namespace okan::verify
