#pragma once

#include <string_view>

namespace okan::pricing {

enum class OptionKind { Call, Put };

std::string_view to_string(OptionKind kind);
OptionKind parse_option_kind(std::string_view text);

/// Market inputs for a European option.
///
/// maturity is the time to expiry in years; maturity == 0 is the exercise
/// boundary and prices to the payoff. volatility must be positive whenever
/// maturity is.
struct MarketParams {
    double spot = 0.0;
    double strike = 0.0;
    double rate = 0.0;
    double dividend_yield = 0.0;
    double volatility = 0.0;
    double maturity = 0.0;

    /// Throws DomainError if the invariants do not hold.
    void validate() const;
};

struct D1D2 {
    double d1;
    double d2;
};

/// Phi(x) via erfc; absolute error at the level of double rounding.
double std_normal_cdf(double x);
double std_normal_pdf(double x);

/// Requires maturity > 0; the T = 0 boundary must go through payoff().
D1D2 d1_d2(const MarketParams& p);

double payoff(OptionKind kind, double spot, double strike);

/// Black-Scholes-Merton price with continuous dividend yield.
double price_bsm(const MarketParams& p, OptionKind kind);

/// Black-Scholes price: price_bsm with the dividend yield forced to zero.
double price_bs(const MarketParams& p, OptionKind kind);

/// dV/dS: e^{-qT} N(d1) for calls, e^{-qT} (N(d1) - 1) for puts.
double delta_bsm(const MarketParams& p, OptionKind kind);

}  // namespace okan::pricing
