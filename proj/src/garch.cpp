#include "okan/garch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "okan/rng.hpp"

namespace okan::vol {

namespace {

constexpr double kMaxPersistence = 1.0 - 1e-6;

double sample_variance(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double acc = 0.0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return acc / n;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// theta = (log omega, logit persistence, logit alpha share)
using Point = std::array<double, 3>;

GarchParams from_theta(const Point& t) {
    const double persistence = kMaxPersistence * logistic(t[1]);
    const double alpha = persistence * logistic(t[2]);
    return {std::exp(t[0]), alpha, persistence - alpha};
}

Point to_theta(const GarchParams& p) {
    const double persistence = p.alpha + p.beta;
    return {std::log(p.omega), logit(persistence / kMaxPersistence), logit(p.alpha / persistence)};
}

}  // namespace

void GarchParams::validate() const {
    if (!(omega > 0.0)) throw DomainError("GARCH: omega must be positive");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw DomainError("GARCH: alpha and beta must be non-negative");
    if (!(alpha + beta < 1.0)) throw DomainError("GARCH: alpha + beta must be below 1");
}

std::vector<double> garch_filter(const GarchParams& p, std::span<const double> returns) {
    p.validate();
    if (returns.size() < 2) throw DomainError("garch_filter: need at least two returns");
    std::vector<double> var(returns.size());
    var[0] = sample_variance(returns);
    if (!(var[0] > 0.0)) var[0] = p.omega;
    for (std::size_t t = 1; t < returns.size(); ++t)
        var[t] = p.omega + p.alpha * returns[t - 1] * returns[t - 1] + p.beta * var[t - 1];
    return var;
}

double garch_log_likelihood(const GarchParams& p, std::span<const double> returns) {
    const auto var = garch_filter(p, returns);
    double ll = 0.0;
    for (std::size_t t = 0; t < returns.size(); ++t) ll += std::log(var[t]) + returns[t] * returns[t] / var[t];
    return -0.5 * ll;
}

GarchFit garch_fit(std::span<const double> returns, const GarchFitOptions& options) {
    if (returns.size() < 100) throw DomainError("garch_fit: need at least 100 returns");
    const double s2 = sample_variance(returns);
    const bool constant = std::all_of(returns.begin(), returns.end(), [&](double r) { return r == returns[0]; });
    if (constant || !(s2 > 0.0)) throw DegenerateInputError("garch_fit: returns are constant");

    GarchFit fit;
    const std::array<double, 5> alphas{0.02, 0.05, 0.10, 0.15, 0.25};
    const std::array<double, 5> betas{0.50, 0.70, 0.80, 0.88, 0.94};
    double best_ll = -std::numeric_limits<double>::infinity();
    GarchParams best{};
    for (double a : alphas)
        for (double b : betas) {
            if (a + b >= 0.995) continue;
            const GarchParams g{s2 * (1.0 - a - b), a, b};
            fit.grid.push_back(g);
            const double ll = garch_log_likelihood(g, returns);
            if (ll > best_ll) {
                best_ll = ll;
                best = g;
            }
        }
    fit.best_grid_log_likelihood = best_ll;

    auto objective = [&](const Point& t) {
        const GarchParams g = from_theta(t);
        if (!(g.omega > 0.0) || !std::isfinite(g.omega)) return std::numeric_limits<double>::infinity();
        const double ll = garch_log_likelihood(g, returns);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    // Nelder-Mead with standard coefficients (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
    std::array<Point, 4> simplex;
    std::array<double, 4> value;
    simplex[0] = to_theta(best);
    for (std::size_t i = 1; i < 4; ++i) {
        simplex[i] = simplex[0];
        simplex[i][i - 1] += 0.5;
    }
    for (std::size_t i = 0; i < 4; ++i) value[i] = objective(simplex[i]);

    std::size_t iter = 0;
    bool converged = false;
    for (; iter < options.max_iterations; ++iter) {
        std::array<std::size_t, 4> idx{0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        std::array<Point, 4> s;
        std::array<double, 4> v;
        for (std::size_t i = 0; i < 4; ++i) {
            s[i] = simplex[idx[i]];
            v[i] = value[idx[i]];
        }
        simplex = s;
        value = v;

        // Flat directions (alpha -> 0 on i.i.d. data) never shrink in theta, so test values only.
        if (std::abs(value[3] - value[0]) <= options.tolerance * (1.0 + std::abs(value[0]))) {
            converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t d = 0; d < 3; ++d) centroid[d] += simplex[i][d] / 3.0;
        auto along = [&](double coef) {
            Point p;
            for (std::size_t d = 0; d < 3; ++d) p[d] = centroid[d] + coef * (simplex[3][d] - centroid[d]);
            return p;
        };

        const Point reflected = along(-1.0);
        const double fr = objective(reflected);
        if (fr < value[0]) {
            const Point expanded = along(-2.0);
            const double fe = objective(expanded);
            if (fe < fr) {
                simplex[3] = expanded;
                value[3] = fe;
            } else {
                simplex[3] = reflected;
                value[3] = fr;
            }
            continue;
        }
        if (fr < value[2]) {
            simplex[3] = reflected;
            value[3] = fr;
            continue;
        }
        const bool outside = fr < value[3];
        const Point contracted = along(outside ? -0.5 : 0.5);
        const double fc = objective(contracted);
        if (fc < (outside ? fr : value[3])) {
            simplex[3] = contracted;
            value[3] = fc;
            continue;
        }
        for (std::size_t i = 1; i < 4; ++i) {
            for (std::size_t d = 0; d < 3; ++d) simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
            value[i] = objective(simplex[i]);
        }
    }

    const auto best_vertex = std::min_element(value.begin(), value.end()) - value.begin();
    fit.params = from_theta(simplex[best_vertex]);
    fit.log_likelihood = -value[best_vertex];
    fit.iterations = iter;
    if (fit.log_likelihood < best_ll) {
        // The theta round trip can cost a few ulps; never report worse than the grid.
        fit.params = best;
        fit.log_likelihood = best_ll;
    }
    if (!converged)
        throw ConvergenceError(fit.params, fit.log_likelihood,
                               "garch_fit: no convergence after " + std::to_string(options.max_iterations) +
                                   " iterations");
    return fit;
}

std::vector<double> simulate_garch(const GarchParams& p, std::size_t n, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    std::vector<double> out(n);
    double var = p.unconditional_variance();
    double prev = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) var = p.omega + p.alpha * prev * prev + p.beta * var;
        prev = std::sqrt(var) * rng.normal();
        out[t] = prev;
    }
    return out;
}

double annualize(double daily_sigma, double trading_days) {
    if (!(daily_sigma >= 0.0)) throw DomainError("annualize: sigma must be non-negative");
    return daily_sigma * std::sqrt(trading_days);
}

}  // namespace okan::vol

namespace okan::vol {

VolSeries volatility_series(const GarchParams& p, std::span<const std::chrono::sys_days> dates,
                            std::span<const double> returns, double trading_days) {
    if (dates.size() != returns.size()) throw DomainError("volatility_series: one date per return required");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i])) throw DomainError("volatility_series: dates must be strictly increasing");
    const auto var = garch_filter(p, returns);
    VolSeries out;
    out.dates.assign(dates.begin(), dates.end());
    out.sigma.resize(var.size());
    for (std::size_t i = 0; i < var.size(); ++i) out.sigma[i] = annualize(std::sqrt(var[i]), trading_days);
    return out;
}

}  // namespace okan::vol
