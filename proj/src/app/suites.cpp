#include "okan/app/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "okan/pricing.hpp"
#include "okan/rng.hpp"
#include "okan/verify.hpp"

namespace okan::app {

using pricing::MarketParams;
using pricing::OptionKind;

namespace {

constexpr double kPdeDs = 1e-2;
constexpr double kPdeDt = 1e-4;
// Closed-form residual tolerance: finite-difference truncation and rounding at the steps above.
constexpr double kPdeTolerance = 1e-4;

std::vector<MarketParams> pde_grid() {
    std::vector<MarketParams> grid;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            grid.push_back({105.0 + 5.0 * i, 100.0, 0.05, 0.01, 0.25, 0.2 + 0.2 * j});
    return grid;
}

}  // namespace

std::vector<Check> parity_suite(std::uint64_t seed, std::size_t points) {
    Rng rng(seed);
    double parity = 0.0, q0 = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        MarketParams p{rng.uniform(50, 150), rng.uniform(50, 150), rng.uniform(0, 0.1), rng.uniform(0, 0.05),
                       rng.uniform(0.05, 0.6), rng.uniform(0.05, 3.0)};
        const double c = pricing::price_bsm(p, OptionKind::Call);
        const double put = pricing::price_bsm(p, OptionKind::Put);
        const double rhs = p.spot * std::exp(-p.dividend_yield * p.maturity) - p.strike * std::exp(-p.rate * p.maturity);
        parity = std::max(parity, std::abs(c - put - rhs));
        p.dividend_yield = 0.0;
        for (auto k : {OptionKind::Call, OptionKind::Put})
            q0 = std::max(q0, std::abs(pricing::price_bsm(p, k) - pricing::price_bs(p, k)));
    }
    return {{"put-call parity residual", parity, 1e-10, parity < 1e-10, std::to_string(points) + " points"},
            {"B-S-M(q=0) vs B-S", q0, 1e-12, q0 < 1e-12, std::to_string(points) + " points"}};
}

std::vector<Check> monte_carlo_suite(std::uint64_t seed, std::size_t paths, unsigned threads) {
    std::vector<Check> out;
    verify::McOptions opts;
    opts.threads = threads;
    for (auto kind : {OptionKind::Call, OptionKind::Put}) {
        double worst = 0.0;
        std::string where;
        for (int i = 0; i < 10; ++i) {
            const MarketParams p{100.0, 80.0 + 5.0 * i, 0.05, 0.02 * (i % 3), 0.15 + 0.02 * i, 0.25 + 0.2 * i};
            const double exact = pricing::price_bsm(p, kind);
            const auto mc = verify::mc_price(p, kind, paths, derive_seed(seed, static_cast<std::uint64_t>(i)), opts);
            const double z = std::abs(exact - mc.mean) / mc.std_error;
            if (z >= worst) {
                worst = z;
                char buf[96];
                std::snprintf(buf, sizeof buf, "worst at K=%g: analytic %.6f, MC %.6f +- %.2g", p.strike, exact,
                              mc.mean, mc.std_error);
                where = buf;
            }
        }
        out.push_back({std::string("MC ") + std::string(pricing::to_string(kind)) + " |analytic-MC|/SE", worst, 3.0,
                       worst < 3.0, where});
    }
    return out;
}

std::vector<Check> pde_suite() {
    double analytic = 0.0, payoff_min = INFINITY;
    for (const auto& p : pde_grid()) {
        analytic = std::max(analytic, std::abs(verify::pde_residual(p, OptionKind::Call, kPdeDs, kPdeDt)));
        payoff_min = std::min(payoff_min, std::abs(verify::payoff_pde_residual(p, OptionKind::Call, kPdeDs, kPdeDt)));
    }
    const double ratio = payoff_min / analytic;
    char buf[96];
    std::snprintf(buf, sizeof buf, "max closed-form %.3g, min payoff %.3g", analytic, payoff_min);
    return {{"PDE residual, closed form", analytic, kPdeTolerance, analytic < kPdeTolerance, "25 points"},
            {"PDE payoff/closed-form ratio", ratio, 100.0, ratio >= 100.0, buf}};
}

Check payoff_negative_control() {
    double worst = 0.0;
    for (const auto& p : pde_grid())
        worst = std::max(worst, std::abs(verify::payoff_pde_residual(p, OptionKind::Call, kPdeDs, kPdeDt)));
    return {"negative control: payoff surface PDE residual", worst, kPdeTolerance, worst < kPdeTolerance,
            "the raw payoff is not a solution; FAIL is the expected outcome"};
}

std::string format_check(const Check& c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "[%s] %s: measured %.6g, threshold %.6g", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.measured, c.threshold);
    std::string out = buf;
    if (!c.detail.empty()) out += " (" + c.detail + ")";
    return out;
}

}  // namespace okan::app
