#include <doctest.h>

#include <cmath>

#include "okan/errors.hpp"
#include "okan/pricing.hpp"
#include "okan/rng.hpp"
#include "support.hpp"

using namespace okan;
using namespace okan::pricing;

TEST_CASE("normal cdf matches adaptive quadrature") {
    CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (double x = -6.0; x <= 6.0; x += 0.37) CHECK(std::abs(std_normal_cdf(x) - testing::simpson_cdf(x)) < 1e-12);
    CHECK(std::abs(std_normal_cdf(1.96) - 0.9750021048517795) < 1e-12);
    CHECK_THROWS_AS(std_normal_cdf(NAN), DomainError);
}

TEST_CASE("reference prices") {
    const MarketParams atm{100, 100, 0.05, 0.0, 0.2, 1.0};
    CHECK(price_bs(atm, OptionKind::Call) == doctest::Approx(10.4506).epsilon(5e-5));
    CHECK(price_bs(atm, OptionKind::Put) == doctest::Approx(5.5735).epsilon(5e-5));
    const auto d = d1_d2(atm);
    CHECK(d.d1 == doctest::Approx(0.35));
    CHECK(d.d2 == doctest::Approx(0.15));
}

TEST_CASE("expiry prices to the payoff") {
    CHECK(price_bsm({120, 100, 0.05, 0.01, 0.2, 0.0}, OptionKind::Call) == 20.0);
    CHECK(price_bsm({120, 100, 0.05, 0.01, 0.2, 0.0}, OptionKind::Put) == 0.0);
    CHECK(price_bsm({80, 100, 0.05, 0.0, 0.0, 0.0}, OptionKind::Put) == 20.0);
    CHECK_THROWS_AS(d1_d2({120, 100, 0.05, 0.0, 0.2, 0.0}), DomainError);
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(price_bsm({-1, 100, 0.05, 0, 0.2, 1}, OptionKind::Call), DomainError);
    CHECK_THROWS_AS(price_bsm({100, 0, 0.05, 0, 0.2, 1}, OptionKind::Call), DomainError);
    CHECK_THROWS_AS(price_bsm({100, 100, 0.05, 0, 0.0, 1}, OptionKind::Call), DomainError);
    CHECK_THROWS_AS(price_bsm({100, 100, 0.05, 0, 0.2, -1}, OptionKind::Call), DomainError);
    CHECK_THROWS_AS(price_bsm({100, 100, 0.05, -0.1, 0.2, 1}, OptionKind::Call), DomainError);
    CHECK_THROWS_AS(parse_option_kind("straddle"), ParseError);
    CHECK(parse_option_kind("put") == OptionKind::Put);
}

TEST_CASE("parity, q = 0 reduction, bounds") {
    Rng rng(11);
    for (int n = 0; n < 500; ++n) {
        MarketParams p{rng.uniform(20, 200), rng.uniform(20, 200), rng.uniform(0, 0.1), rng.uniform(0, 0.06),
                       rng.uniform(0.05, 0.8), rng.uniform(0.01, 4)};
        const double c = price_bsm(p, OptionKind::Call), put = price_bsm(p, OptionKind::Put);
        CHECK(std::abs(c - put - (p.spot * std::exp(-p.dividend_yield * p.maturity) -
                                  p.strike * std::exp(-p.rate * p.maturity))) < 1e-10);
        CHECK(c >= 0.0);
        CHECK(c <= p.spot * std::exp(-p.dividend_yield * p.maturity) + 1e-12);
        CHECK(put <= p.strike * std::exp(-p.rate * p.maturity) + 1e-12);
        const double dc = delta_bsm(p, OptionKind::Call), dp = delta_bsm(p, OptionKind::Put);
        CHECK(dc >= 0.0);
        CHECK(dc <= 1.0);
        CHECK(dp <= 0.0);
        CHECK(dp >= -1.0);
        // Strict signs hold wherever N(+-d1) is representable.
        if (std::abs(d1_d2(p).d1) < 37.0) {
            CHECK(dc > 0.0);
            CHECK(dp < 0.0);
        }
        p.dividend_yield = 0.0;
        CHECK(std::abs(price_bsm(p, OptionKind::Call) - price_bs(p, OptionKind::Call)) < 1e-12);
    }
}

TEST_CASE("delta matches a finite difference in spot") {
    MarketParams p{95, 100, 0.03, 0.02, 0.3, 0.7};
    for (auto k : {OptionKind::Call, OptionKind::Put}) {
        const double h = 1e-4;
        auto up = p, dn = p;
        up.spot += h;
        dn.spot -= h;
        CHECK(delta_bsm(p, k) == doctest::Approx((price_bsm(up, k) - price_bsm(dn, k)) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("call price increases with volatility and spot") {
    MarketParams p{100, 100, 0.05, 0.01, 0.1, 1.0};
    double prev = price_bsm(p, OptionKind::Call);
    for (double v = 0.15; v < 1.0; v += 0.05) {
        p.volatility = v;
        const double now = price_bsm(p, OptionKind::Call);
        CHECK(now > prev);
        prev = now;
    }
}
