#include "okan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "okan/errors.hpp"
#include "okan/rng.hpp"

namespace okan::verify {

using pricing::MarketParams;
using pricing::OptionKind;

void GbmSpec::validate() const {
    if (!(initial > 0.0)) throw DomainError("GbmSpec: initial must be positive");
    if (!(horizon > 0.0)) throw DomainError("GbmSpec: horizon must be positive");
    if (!(volatility >= 0.0)) throw DomainError("GbmSpec: volatility must be non-negative");
    if (steps < 1) throw DomainError("GbmSpec: steps must be >= 1");
    if (!std::isfinite(drift)) throw DomainError("GbmSpec: drift must be finite");
}

std::vector<double> simulate_gbm_terminal(const GbmSpec& spec, std::size_t n_paths,
                                          std::uint64_t seed) {
    spec.validate();
    if (n_paths < 1) throw DomainError("simulate_gbm_terminal: n_paths must be >= 1");

    const double drift_term = (spec.drift - 0.5 * spec.volatility * spec.volatility) * spec.horizon;
    const double diffusion = spec.volatility * std::sqrt(spec.horizon);
    std::vector<double> out(n_paths);
    if (spec.volatility == 0.0) {
        std::fill(out.begin(), out.end(), spec.initial * std::exp(spec.drift * spec.horizon));
        return out;
    }
    Rng rng(seed);
    for (auto& s : out) s = spec.initial * std::exp(drift_term + diffusion * rng.normal());
    return out;
}

namespace {

struct BlockSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t samples = 0;
};

// One block: `samples` i.i.d. payoff samples (pair averages when antithetic).
BlockSums run_block(const MarketParams& p, OptionKind kind, std::size_t samples, bool antithetic,
                    std::uint64_t seed) {
    const double drift_term =
        (p.rate - p.dividend_yield - 0.5 * p.volatility * p.volatility) * p.maturity;
    const double diffusion = p.volatility * std::sqrt(p.maturity);
    Rng rng(seed);
    BlockSums acc;
    acc.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
        const double z = rng.normal();
        double value = pricing::payoff(kind, p.spot * std::exp(drift_term + diffusion * z), p.strike);
        if (antithetic) {
            value = 0.5 * (value + pricing::payoff(kind, p.spot * std::exp(drift_term - diffusion * z),
                                                   p.strike));
        }
        acc.sum += value;
        acc.sum_sq += value * value;
    }
    return acc;
}

}  // namespace

McEstimate mc_price(const MarketParams& p, OptionKind kind, std::size_t n_paths, std::uint64_t seed,
                    const McOptions& options) {
    if (n_paths < 2) throw DomainError("mc_price: n_paths must be >= 2");
    if (!(p.maturity > 0.0)) throw DomainError("mc_price: maturity must be positive");
    if (!(p.spot > 0.0) || !(p.strike >= 0.0) || !(p.volatility >= 0.0) ||
        !(p.dividend_yield >= 0.0) || !std::isfinite(p.rate))
        throw DomainError("mc_price: invalid market parameters");
    if (options.block_size < 1) throw DomainError("mc_price: block_size must be >= 1");

    const std::size_t samples = options.antithetic ? n_paths / 2 : n_paths;
    if (samples < 2) throw DomainError("mc_price: too few samples for a standard error");

    const std::size_t n_blocks = (samples + options.block_size - 1) / options.block_size;
    std::vector<BlockSums> blocks(n_blocks);
    auto work = [&](std::size_t b) {
        const std::size_t begin = b * options.block_size;
        const std::size_t count = std::min(options.block_size, samples - begin);
        blocks[b] = run_block(p, kind, count, options.antithetic, derive_seed(seed, b));
    };

    const unsigned threads = std::max(1u, options.threads);
    if (threads == 1 || n_blocks == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) work(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < n_blocks; b += threads) work(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Reduction in block order keeps the result independent of the thread count.
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& blk : blocks) {
        sum += blk.sum;
        sum_sq += blk.sum_sq;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    const double discount = std::exp(-p.rate * p.maturity);
    return {discount * mean, discount * std::sqrt(var / n), options.antithetic ? 2 * samples : samples};
}

double pde_residual(const PriceSurface& f, const MarketParams& p, double dS, double dt) {
    if (!(dS > 0.0) || !(dt > 0.0)) throw DomainError("pde_residual: steps must be positive");
    if (!(p.spot - dS > 0.0)) throw DomainError("pde_residual: spot step crosses zero");
    if (!(p.maturity - dt > 0.0))
        throw DomainError("pde_residual: time step crosses the expiry boundary");

    const double s = p.spot;
    const double tau = p.maturity;
    const double f0 = f(s, tau);
    const double f_up = f(s + dS, tau);
    const double f_dn = f(s - dS, tau);
    const double f_S = (f_up - f_dn) / (2.0 * dS);
    const double f_SS = (f_up - 2.0 * f0 + f_dn) / (dS * dS);
    const double f_t = -(f(s, tau + dt) - f(s, tau - dt)) / (2.0 * dt);
    return f_t + (p.rate - p.dividend_yield) * s * f_S +
           0.5 * p.volatility * p.volatility * s * s * f_SS - p.rate * f0;
}

double pde_residual(const MarketParams& p, OptionKind kind, double dS, double dt) {
    p.validate();
    return pde_residual(
        [&](double spot, double tau) {
            MarketParams q = p;
            q.spot = spot;
            q.maturity = tau;
            return pricing::price_bsm(q, kind);
        },
        p, dS, dt);
}

double payoff_pde_residual(const MarketParams& p, OptionKind kind, double dS, double dt) {
    p.validate();
    return pde_residual(
        [&](double spot, double) { return pricing::payoff(kind, spot, p.strike); }, p, dS, dt);
}

}  // namespace okan::verify
