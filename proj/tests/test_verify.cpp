#include <doctest.h>

#include <cmath>
#include <numeric>

#include "okan/errors.hpp"
#include "okan/pricing.hpp"
#include "okan/verify.hpp"

using namespace okan;
using namespace okan::verify;
using pricing::MarketParams;
using pricing::OptionKind;

TEST_CASE("zero volatility GBM is deterministic") {
    const auto s = simulate_gbm_terminal({100, 0.05, 0.0, 1.0, 1}, 10, 1);
    for (double v : s) CHECK(v == doctest::Approx(100 * std::exp(0.05)).epsilon(1e-14));
}

TEST_CASE("GBM terminal moments") {
    const GbmSpec spec{100, 0.08, 0.25, 2.0, 1};
    const auto s = simulate_gbm_terminal(spec, 400000, 5);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double logm = 0;
    for (double v : s) logm += std::log(v / spec.initial);
    logm /= static_cast<double>(s.size());
    const double expected = spec.initial * std::exp(spec.drift * spec.horizon);
    const double sd = expected * std::sqrt(std::exp(spec.volatility * spec.volatility * spec.horizon) - 1);
    CHECK(std::abs(mean - expected) < 4 * sd / std::sqrt(400000.0));
    CHECK(logm == doctest::Approx((0.08 - 0.5 * 0.0625) * 2.0).epsilon(0.02));
    CHECK_THROWS_AS(simulate_gbm_terminal({-1, 0, 0.2, 1, 1}, 10, 1), DomainError);
}

TEST_CASE("MC oracle agrees with the closed form") {
    const MarketParams p{100, 100, 0.05, 0.0, 0.2, 1.0};
    const auto c = mc_price(p, OptionKind::Call, 400000, 3);
    const auto put = mc_price(p, OptionKind::Put, 400000, 4);
    CHECK(std::abs(c.mean - 10.4506) < 3 * c.std_error);
    CHECK(std::abs(put.mean - 5.5735) < 3 * put.std_error);
    CHECK(c.std_error < 0.03);
}

TEST_CASE("zero strike call is the discounted forward") {
    const MarketParams p{100, 0.0, 0.05, 0.02, 0.3, 1.5};
    const auto c = mc_price(p, OptionKind::Call, 200000, 8);
    CHECK(std::abs(c.mean - 100 * std::exp(-0.02 * 1.5)) < 3 * c.std_error + 1e-9);
}

TEST_CASE("MC results do not depend on the thread count") {
    const MarketParams p{100, 105, 0.03, 0.01, 0.25, 0.5};
    McOptions one, four;
    one.block_size = four.block_size = 10000;
    four.threads = 4;
    const auto a = mc_price(p, OptionKind::Call, 100000, 21, one);
    const auto b = mc_price(p, OptionKind::Call, 100000, 21, four);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("MC argument checks") {
    const MarketParams p{100, 100, 0.05, 0.0, 0.2, 1.0};
    CHECK_THROWS_AS(mc_price(p, OptionKind::Call, 1, 1), DomainError);
    CHECK_THROWS_AS(mc_price({100, 100, 0.05, 0, 0.2, 0.0}, OptionKind::Call, 100, 1), DomainError);
}

TEST_CASE("PDE residual: closed form vs payoff") {
    const MarketParams p{110, 100, 0.05, 0.01, 0.25, 0.6};
    const double analytic = pde_residual(p, OptionKind::Call, 1e-2, 1e-4);
    const double payoff = payoff_pde_residual(p, OptionKind::Call, 1e-2, 1e-4);
    CHECK(std::abs(analytic) < 1e-5);
    // Linear payoff region: residual is r K - q S.
    CHECK(payoff == doctest::Approx(0.05 * 100 - 0.01 * 110).epsilon(1e-6));
    CHECK(std::abs(pde_residual(p, OptionKind::Put, 1e-2, 1e-4)) < 1e-5);
}
