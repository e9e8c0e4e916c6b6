#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "okan/errors.hpp"

namespace okan::vol {

/// GARCH(1,1): sigma2_t = omega + alpha * eps_{t-1}^2 + beta * sigma2_{t-1}.
struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    /// omega > 0, alpha >= 0, beta >= 0, alpha + beta < 1.
    void validate() const;
    double unconditional_variance() const { return omega / (1.0 - alpha - beta); }
};

/// Fit gave up at the iteration cap; carries the best point found.
class ConvergenceError : public Error {
public:
    ConvergenceError(const GarchParams& best, double log_likelihood, const std::string& what)
        : Error(what), best_(best), log_likelihood_(log_likelihood) {}
    const GarchParams& best() const noexcept { return best_; }
    double log_likelihood() const noexcept { return log_likelihood_; }

private:
    GarchParams best_;
    double log_likelihood_;
};

/// Conditional variances, one per return. sigma2_0 is the sample variance
/// (1/n, mean-removed) of the returns.
std::vector<double> garch_filter(const GarchParams& p, std::span<const double> returns);

/// Gaussian log-likelihood without the constant: -1/2 sum(ln sigma2_t + eps_t^2 / sigma2_t).
double garch_log_likelihood(const GarchParams& p, std::span<const double> returns);

struct GarchFitOptions {
    std::size_t max_iterations = 4000;
    double tolerance = 1e-12;
};

struct GarchFit {
    GarchParams params;
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
    /// Best log-likelihood among the multi-start grid points.
    double best_grid_log_likelihood = 0.0;
    std::vector<GarchParams> grid;
};

/// Maximum-likelihood fit by Nelder-Mead on a reparameterisation that keeps
/// every simplex vertex inside the stationary region. The search starts from
/// the best point of a fixed (alpha, beta) grid with variance-targeted omega,
/// so the result never scores below any grid point. Deterministic.
GarchFit garch_fit(std::span<const double> returns, const GarchFitOptions& options = {});

/// Draws a GARCH(1,1) return path with Gaussian innovations, started at the
/// unconditional variance.
std::vector<double> simulate_garch(const GarchParams& p, std::size_t n, std::uint64_t seed);

/// daily_sigma * sqrt(trading_days).
double annualize(double daily_sigma, double trading_days);

/// Annualized conditional volatility per date.
struct VolSeries {
    std::vector<std::chrono::sys_days> dates;  ///< strictly increasing
    std::vector<double> sigma;                 ///< > 0
};

/// Filters `returns` (one per date) and annualizes sqrt(sigma2_t).
VolSeries volatility_series(const GarchParams& p, std::span<const std::chrono::sys_days> dates,
                            std::span<const double> returns, double trading_days);

}  // namespace okan::vol
