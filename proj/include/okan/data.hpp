#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "okan/garch.hpp"
#include "okan/pricing.hpp"

namespace okan::data {

using Date = std::chrono::sys_days;

/// ISO-8601 calendar date (YYYY-MM-DD).
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Number of model input features per observation.
inline constexpr std::size_t kFeatureCount = 9;

/// Feature columns in model order; also their CSV column names.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "ttm_years", "opt_type", "delta", "strike", "spot", "theo_price", "div_rate", "rf_rate", "garch_vol"};

/// Exact header of the quote CSV dialect.
inline constexpr std::string_view kCsvHeader =
    "contract_id,date,ttm_years,opt_type,delta,strike,spot,theo_price,div_rate,rf_rate,garch_vol,target_price";

/// One dated observation of one option contract.
struct OptionQuote {
    std::string contract_id;
    Date date{};
    double time_to_maturity = 0.0;  ///< years
    pricing::OptionKind option_type = pricing::OptionKind::Call;
    double delta = 0.0;
    double strike = 0.0;
    double spot = 0.0;
    double theoretical_price = 0.0;
    double dividend_rate = 0.0;  ///< monthly, as quoted
    double risk_free_rate = 0.0;
    double garch_vol = 0.0;  ///< annualized
    double target_price = 0.0;

    /// Call = +1, Put = -1.
    double option_type_code() const { return option_type == pricing::OptionKind::Call ? 1.0 : -1.0; }
    std::array<double, kFeatureCount> features() const;

    /// Empty when valid, otherwise the first violated invariant.
    std::string invariant_violation() const;
};

struct LoadResult {
    std::vector<OptionQuote> quotes;
    /// Row-numbered reasons for rejected rows (row 1 is the header).
    std::vector<std::string> rejected;
    std::vector<std::string> warnings;
};

/// Reads the quote CSV. Throws ParseError on a missing file, a header that
/// differs from kCsvHeader, a wrong field count, or an unparseable number.
LoadResult load_csv(const std::filesystem::path& path);

/// Writes quotes with shortest round-trip number formatting.
void write_csv(const std::filesystem::path& path, std::span<const OptionQuote> quotes);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

struct GeneratorConfig {
    Date start_date = parse_date("2020-01-01");
    Date end_date = parse_date("2020-12-31");
    double spot0 = 4.0;
    double drift = 0.05;       ///< GBM mu, per year
    double volatility = 0.22;  ///< GBM sigma, per year
    double rate0 = 0.025;      ///< long-run risk-free rate
    double rate_vol = 0.0004;  ///< daily shock sd of the rate
    double dividend0 = 0.02;   ///< long-run annual dividend yield
    double dividend_vol = 0.0004;
    double reversion = 0.02;  ///< daily mean reversion of rate and dividend yield
    std::size_t issue_interval_days = 5;
    /// The issue schedule is phased so this date (or the first trading day after it) is an issue day.
    /// Outside the calendar the schedule starts on the first trading day.
    Date issue_anchor = parse_date("2020-08-31");
    std::size_t maturity_days = 40;
    std::vector<double> moneyness{0.95, 1.05};
    double strike_step = 0.05;
    double noise_level = 0.05;
    /// Cap on the number of contracts; 0 means no cap.
    std::size_t max_contracts = 0;
    /// Annual dividend yield = monthly dividend rate * this factor.
    double dividend_annualization = 12.0;
    double trading_days = 252.0;

    void validate() const;
};

/// The simulated underlying, for fit-garch and reporting.
struct UnderlyingPath {
    std::vector<Date> dates;
    std::vector<double> spot;
    /// Log return into each date; returns[0] is 0 (no prior close).
    std::vector<double> returns;
};

struct GeneratedData {
    std::vector<OptionQuote> quotes;  ///< chronological, ties by contract id
    UnderlyingPath underlying;
    vol::GarchParams garch;
    std::size_t contracts = 0;
};

/// Synthetic option chain on one GBM underlying path.
///
/// Contracts are issued every issue_interval_days trading days (weekdays), one
/// call and one put per moneyness level, and observed daily until the day
/// before expiry. garch_vol comes from a GARCH(1,1) fit on the path's returns;
/// theo_price is the dividend-adjusted closed form at that volatility and
/// target_price = theo_price * (1 + eta), eta ~ N(0, noise_level^2).
GeneratedData generate_synthetic(const GeneratorConfig& config, std::uint64_t seed);

/// Weekdays in [start, end].
std::vector<Date> trading_calendar(Date start, Date end);

struct DatasetSplit {
    std::vector<OptionQuote> train;  ///< dated <= cutoff
    std::vector<OptionQuote> test;   ///< dated > cutoff
    Date cutoff{};
};

/// Partitions purely by observation date; order within each side is chronological.
DatasetSplit split_by_cutoff(std::span<const OptionQuote> quotes, Date cutoff);

/// Per-feature z-score statistics with population (1/n) variance.
struct NormStats {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> std{};
    double target_mean = 0.0;
    double target_std = 1.0;

    std::array<double, kFeatureCount> apply(const std::array<double, kFeatureCount>& features) const;
    std::array<double, kFeatureCount> invert(const std::array<double, kFeatureCount>& normalized) const;
    double normalize_target(double price) const { return (price - target_mean) / target_std; }
    double denormalize_target(double z) const { return z * target_std + target_mean; }
};

/// Fit on the training side only. Throws DegenerateInputError naming any zero-variance column.
NormStats fit_norm(std::span<const OptionQuote> train);

/// Normalized feature rows, one per quote.
std::vector<std::array<double, kFeatureCount>> apply_norm(const NormStats& stats,
                                                          std::span<const OptionQuote> quotes);

/// Sliding windows of N consecutive observations of one contract.
struct WindowedSet {
    std::size_t window = 0;
    /// count x window x kFeatureCount normalized features (C = 1).
    std::vector<double> inputs;
    /// Normalized target of each window's last observation.
    std::vector<double> labels;
    /// Index of each window's last observation in its side of the split.
    std::vector<std::size_t> last_index;
    /// Contracts with fewer than `window` observations on this side.
    std::size_t short_contracts = 0;

    std::size_t size() const { return labels.size(); }
};

struct WindowedSplit {
    WindowedSet train;
    WindowedSet test;
};

/// Windows never span two contracts or the cutoff. Samples are ordered by
/// their last observation's position in the side list.
WindowedSplit window(const DatasetSplit& split, const NormStats& stats, std::size_t n);
WindowedSet window_side(std::span<const OptionQuote> side, const NormStats& stats, std::size_t n);

}  // namespace okan::data
