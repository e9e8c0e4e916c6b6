#include "okan/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "okan/errors.hpp"

namespace okan::pricing {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

bool finite_all(const MarketParams& p) {
    return std::isfinite(p.spot) && std::isfinite(p.strike) && std::isfinite(p.rate) &&
           std::isfinite(p.dividend_yield) && std::isfinite(p.volatility) &&
           std::isfinite(p.maturity);
}

}  // namespace

std::string_view to_string(OptionKind kind) {
    return kind == OptionKind::Call ? "call" : "put";
}

OptionKind parse_option_kind(std::string_view text) {
    if (text == "call" || text == "Call" || text == "C" || text == "c") return OptionKind::Call;
    if (text == "put" || text == "Put" || text == "P" || text == "p") return OptionKind::Put;
    throw ParseError("unknown option kind '" + std::string(text) + "'");
}

void MarketParams::validate() const {
    if (!finite_all(*this)) throw DomainError("market parameters must be finite");
    if (spot <= 0.0) throw DomainError("spot must be positive");
    if (strike <= 0.0) throw DomainError("strike must be positive");
    if (maturity < 0.0) throw DomainError("maturity must be non-negative");
    if (dividend_yield < 0.0) throw DomainError("dividend yield must be non-negative");
    if (maturity > 0.0 && volatility <= 0.0)
        throw DomainError("volatility must be positive when maturity > 0");
}

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite input");
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

D1D2 d1_d2(const MarketParams& p) {
    p.validate();
    if (p.maturity == 0.0)
        throw DomainError("d1_d2: maturity is zero, use the payoff at the exercise boundary");
    const double vol_sqrt_t = p.volatility * std::sqrt(p.maturity);
    const double d1 = (std::log(p.spot / p.strike) +
                       (p.rate - p.dividend_yield + 0.5 * p.volatility * p.volatility) * p.maturity) /
                      vol_sqrt_t;
    return {d1, d1 - vol_sqrt_t};
}

double payoff(OptionKind kind, double spot, double strike) {
    return kind == OptionKind::Call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
}

double price_bsm(const MarketParams& p, OptionKind kind) {
    p.validate();
    if (p.maturity == 0.0) return payoff(kind, p.spot, p.strike);

    const auto [d1, d2] = d1_d2(p);
    const double spot_disc = p.spot * std::exp(-p.dividend_yield * p.maturity);
    const double strike_disc = p.strike * std::exp(-p.rate * p.maturity);
    double price;
    if (kind == OptionKind::Call) {
        price = spot_disc * std_normal_cdf(d1) - strike_disc * std_normal_cdf(d2);
    } else {
        price = strike_disc * std_normal_cdf(-d2) - spot_disc * std_normal_cdf(-d1);
    }
    // Cancellation can leave a few ulps below zero for far out-of-the-money contracts.
    return std::max(price, 0.0);
}

double price_bs(const MarketParams& p, OptionKind kind) {
    MarketParams no_div = p;
    no_div.dividend_yield = 0.0;
    return price_bsm(no_div, kind);
}

double delta_bsm(const MarketParams& p, OptionKind kind) {
    p.validate();
    const double carry = std::exp(-p.dividend_yield * p.maturity);
    if (p.maturity == 0.0) {
        if (kind == OptionKind::Call) return p.spot > p.strike ? 1.0 : 0.0;
        return p.spot < p.strike ? -1.0 : 0.0;
    }
    // N(d1) - 1 = -N(-d1), written so deep in-the-money calls keep a nonzero put delta.
    const double d1 = d1_d2(p).d1;
    return kind == OptionKind::Call ? carry * std_normal_cdf(d1) : -carry * std_normal_cdf(-d1);
}

}  // namespace okan::pricing
