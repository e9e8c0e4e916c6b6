#include <doctest.h>

#include <cmath>

#include "okan/data.hpp"
#include "okan/errors.hpp"
#include "okan/garch.hpp"
#include "okan/rng.hpp"

using namespace okan;
using namespace okan::vol;

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((GarchParams{0.0, 0.1, 0.8}.validate()), DomainError);
    CHECK_THROWS_AS((GarchParams{1e-5, 0.3, 0.7}.validate()), DomainError);
    CHECK_THROWS_AS((GarchParams{1e-5, -0.1, 0.7}.validate()), DomainError);
    CHECK_NOTHROW((GarchParams{1e-5, 0.1, 0.8}.validate()));
    CHECK(GarchParams{1e-5, 0.1, 0.8}.unconditional_variance() == doctest::Approx(1e-4));
}

TEST_CASE("filter follows the recursion") {
    const std::vector<double> r{0.01, -0.02, 0.015, 0.0, -0.005};
    const GarchParams p{2e-5, 0.1, 0.85};
    const auto s2 = garch_filter(p, r);
    double mean = 0;
    for (double v : r) mean += v;
    mean /= 5;
    double var = 0;
    for (double v : r) var += (v - mean) * (v - mean);
    CHECK(s2[0] == doctest::Approx(var / 5));
    for (std::size_t t = 1; t < r.size(); ++t)
        CHECK(s2[t] == doctest::Approx(p.omega + p.alpha * r[t - 1] * r[t - 1] + p.beta * s2[t - 1]).epsilon(1e-14));
    double ll = 0;
    for (std::size_t t = 0; t < r.size(); ++t) ll -= 0.5 * (std::log(s2[t]) + r[t] * r[t] / s2[t]);
    CHECK(garch_log_likelihood(p, r) == doctest::Approx(ll).epsilon(1e-14));
}

TEST_CASE("zero alpha and beta is i.i.d. with variance omega") {
    const GarchParams p{4e-4, 0.0, 0.0};
    const auto r = simulate_garch(p, 200000, 3);
    double m2 = 0;
    for (double v : r) m2 += v * v;
    CHECK(m2 / static_cast<double>(r.size()) == doctest::Approx(4e-4).epsilon(0.01));
}

TEST_CASE("simulate then fit recovers the parameters") {
    const GarchParams truth{1e-5, 0.08, 0.9};
    const auto r = simulate_garch(truth, 10000, 17);
    const auto fit = garch_fit(r);
    CHECK(std::abs(fit.params.alpha - truth.alpha) < 0.05);
    CHECK(std::abs(fit.params.alpha + fit.params.beta - (truth.alpha + truth.beta)) < 0.05);
    CHECK(fit.log_likelihood >= fit.best_grid_log_likelihood);
    for (const auto& g : fit.grid) CHECK(fit.log_likelihood >= garch_log_likelihood(g, r));
    CHECK_NOTHROW(fit.params.validate());
}

TEST_CASE("fit rejects degenerate input") {
    CHECK_THROWS_AS(garch_fit(std::vector<double>(500, 0.01)), DegenerateInputError);
    CHECK_THROWS_AS(garch_fit(std::vector<double>(50, 0.01)), DomainError);
}

TEST_CASE("fit is deterministic") {
    const auto r = simulate_garch({2e-5, 0.1, 0.85}, 2000, 4);
    const auto a = garch_fit(r), b = garch_fit(r);
    CHECK(a.params.alpha == b.params.alpha);
    CHECK(a.params.beta == b.params.beta);
    CHECK(a.params.omega == b.params.omega);
}

TEST_CASE("annualized volatility series") {
    CHECK(annualize(0.01, 252) == doctest::Approx(0.01 * std::sqrt(252.0)));
    const auto dates = data::trading_calendar(data::parse_date("2021-01-04"), data::parse_date("2021-01-08"));
    const std::vector<double> r{0.01, -0.01, 0.02, 0.0, 0.01};
    const GarchParams p{1e-5, 0.1, 0.8};
    const auto vs = volatility_series(p, dates, r, 252);
    const auto s2 = garch_filter(p, r);
    REQUIRE(vs.sigma.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(vs.sigma[i] == doctest::Approx(std::sqrt(s2[i] * 252)));
    std::vector<std::chrono::sys_days> backwards(dates.rbegin(), dates.rend());
    CHECK_THROWS_AS(volatility_series(p, backwards, r, 252), DomainError);
}
