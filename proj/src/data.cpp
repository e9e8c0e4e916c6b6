#include "okan/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "okan/errors.hpp"
#include "okan/rng.hpp"

namespace okan::data {

namespace {

using namespace std::chrono;

double parse_number(std::string_view text, std::size_t row, std::string_view column) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty())
        throw ParseError("row " + std::to_string(row) + ": column " + std::string(column) + ": cannot parse '" +
                         std::string(text) + "' as a number");
    return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double round_to_step(double x, double step) { return std::round(x / step) * step; }

}  // namespace

Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    auto bad = [&] { return ParseError("invalid ISO date '" + std::string(text) + "'"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
    if (std::from_chars(text.data(), text.data() + 4, y).ptr != text.data() + 4) throw bad();
    if (std::from_chars(text.data() + 5, text.data() + 7, m).ptr != text.data() + 7) throw bad();
    if (std::from_chars(text.data() + 8, text.data() + 10, d).ptr != text.data() + 10) throw bad();
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw bad();
    return sys_days{ymd};
}

std::string format_date(Date date) {
    const year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw ContractError("format_double: conversion failed");
    return std::string(buf, ptr);
}

std::array<double, kFeatureCount> OptionQuote::features() const {
    return {time_to_maturity, option_type_code(), delta,          strike,   spot,
            theoretical_price, dividend_rate,     risk_free_rate, garch_vol};
}

std::string OptionQuote::invariant_violation() const {
    const auto f = features();
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) return std::string(kFeatureNames[i]) + " is not finite";
    if (!std::isfinite(target_price)) return "target_price is not finite";
    if (contract_id.empty()) return "contract_id is empty";
    if (time_to_maturity < 0.0) return "ttm_years is negative";
    if (strike <= 0.0) return "strike must be positive";
    if (spot <= 0.0) return "spot must be positive";
    if (garch_vol <= 0.0) return "garch_vol must be positive";
    return {};
}

LoadResult load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    LoadResult result;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) {
        const auto got = split_fields(line);
        const auto want = split_fields(kCsvHeader);
        std::string missing;
        for (auto w : want)
            if (std::find(got.begin(), got.end(), w) == got.end()) missing += (missing.empty() ? "" : ", ") + std::string(w);
        throw ParseError(path.string() + ": header mismatch" +
                         (missing.empty() ? std::string(" (column order differs)") : "; missing columns: " + missing));
    }

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 12)
            throw ParseError("row " + std::to_string(row) + ": expected 12 fields, got " + std::to_string(f.size()));
        OptionQuote q;
        q.contract_id = std::string(f[0]);
        try {
            q.date = parse_date(f[1]);
        } catch (const ParseError& e) {
            throw ParseError("row " + std::to_string(row) + ": " + e.what());
        }
        q.time_to_maturity = parse_number(f[2], row, "ttm_years");
        const double type = parse_number(f[3], row, "opt_type");
        q.delta = parse_number(f[4], row, "delta");
        q.strike = parse_number(f[5], row, "strike");
        q.spot = parse_number(f[6], row, "spot");
        q.theoretical_price = parse_number(f[7], row, "theo_price");
        q.dividend_rate = parse_number(f[8], row, "div_rate");
        q.risk_free_rate = parse_number(f[9], row, "rf_rate");
        q.garch_vol = parse_number(f[10], row, "garch_vol");
        q.target_price = parse_number(f[11], row, "target_price");
        if (type != 1.0 && type != -1.0) {
            result.rejected.push_back("row " + std::to_string(row) + ": opt_type must be +1 or -1");
            continue;
        }
        q.option_type = type > 0 ? pricing::OptionKind::Call : pricing::OptionKind::Put;
        if (auto why = q.invariant_violation(); !why.empty()) {
            result.rejected.push_back("row " + std::to_string(row) + ": " + why);
            continue;
        }
        result.quotes.push_back(std::move(q));
    }
    if (row == 1) result.warnings.push_back(path.string() + ": no data rows");
    return result;
}

void write_csv(const std::filesystem::path& path, std::span<const OptionQuote> quotes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << kCsvHeader << '\n';
    for (const auto& q : quotes) {
        out << q.contract_id << ',' << format_date(q.date) << ',' << format_double(q.time_to_maturity) << ','
            << (q.option_type == pricing::OptionKind::Call ? "1" : "-1") << ',' << format_double(q.delta) << ','
            << format_double(q.strike) << ',' << format_double(q.spot) << ',' << format_double(q.theoretical_price)
            << ',' << format_double(q.dividend_rate) << ',' << format_double(q.risk_free_rate) << ','
            << format_double(q.garch_vol) << ',' << format_double(q.target_price) << '\n';
    }
}

void GeneratorConfig::validate() const {
    if (!(start_date < end_date)) throw DomainError("generator: start_date must precede end_date");
    if (moneyness.empty()) throw DomainError("generator: zero contracts (empty moneyness grid)");
    if (issue_interval_days < 1 || maturity_days < 2)
        throw DomainError("generator: issue interval must be >= 1 and maturity >= 2 trading days");
    if (!(spot0 > 0.0) || !(volatility > 0.0) || !(strike_step > 0.0) || !(noise_level >= 0.0))
        throw DomainError("generator: spot0, volatility and strike_step must be positive, noise >= 0");
    for (double m : moneyness)
        if (!(m > 0.0)) throw DomainError("generator: moneyness levels must be positive");
    if (!(trading_days > 0.0) || !(dividend_annualization > 0.0))
        throw DomainError("generator: trading_days and dividend_annualization must be positive");
}

std::vector<Date> trading_calendar(Date start, Date end) {
    std::vector<Date> out;
    for (Date d = start; d <= end; d += days{1}) {
        const weekday wd{d};
        if (wd != Saturday && wd != Sunday) out.push_back(d);
    }
    return out;
}

GeneratedData generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto dates = trading_calendar(cfg.start_date, cfg.end_date);
    const std::size_t n = dates.size();
    if (n < 102) throw DomainError("generator: need at least 102 trading days for the GARCH fit");

    GeneratedData out;
    auto& u = out.underlying;
    u.dates = dates;
    u.spot.resize(n);
    u.returns.assign(n, 0.0);

    const double dt = 1.0 / cfg.trading_days;
    Rng path_rng(derive_seed(seed, 0));
    u.spot[0] = cfg.spot0;
    for (std::size_t t = 1; t < n; ++t) {
        const double r = (cfg.drift - 0.5 * cfg.volatility * cfg.volatility) * dt +
                         cfg.volatility * std::sqrt(dt) * path_rng.normal();
        u.returns[t] = r;
        u.spot[t] = u.spot[t - 1] * std::exp(r);
    }

    Rng carry_rng(derive_seed(seed, 1));
    std::vector<double> rate(n), div_annual(n);
    rate[0] = cfg.rate0;
    div_annual[0] = cfg.dividend0;
    for (std::size_t t = 1; t < n; ++t) {
        rate[t] = rate[t - 1] + cfg.reversion * (cfg.rate0 - rate[t - 1]) + cfg.rate_vol * carry_rng.normal();
        div_annual[t] = std::max(0.0, div_annual[t - 1] + cfg.reversion * (cfg.dividend0 - div_annual[t - 1]) +
                                          cfg.dividend_vol * carry_rng.normal());
    }

    // One GARCH(1,1) on the underlying, broadcast to every contract.
    const std::span<const double> rets(u.returns.data() + 1, n - 1);
    try {
        out.garch = vol::garch_fit(rets).params;
    } catch (const vol::ConvergenceError& e) {
        out.garch = e.best();
    }
    const auto series = vol::volatility_series(out.garch, std::span<const Date>(dates.data() + 1, n - 1), rets,
                                               cfg.trading_days);
    std::vector<double> sigma(n);
    sigma[0] = series.sigma[0];
    for (std::size_t t = 1; t < n; ++t) sigma[t] = series.sigma[t - 1];

    Rng noise_rng(derive_seed(seed, 2));
    std::set<std::string> seen;
    const auto anchor =
        static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), cfg.issue_anchor) - dates.begin());
    const std::size_t first_issue = anchor < n ? anchor % cfg.issue_interval_days : 0;
    for (std::size_t issue = first_issue; issue < n; issue += cfg.issue_interval_days) {
        for (double m : cfg.moneyness) {
            const double strike = round_to_step(u.spot[issue] * m, cfg.strike_step);
            if (!(strike > 0.0)) continue;
            for (auto kind : {pricing::OptionKind::Call, pricing::OptionKind::Put}) {
                if (cfg.max_contracts && out.contracts >= cfg.max_contracts) break;
                const long strike_milli = std::lround(strike * 1000.0);
                std::string id = format_date(dates[issue]);
                id.erase(std::remove(id.begin(), id.end(), '-'), id.end());
                id += (kind == pricing::OptionKind::Call ? "-C-" : "-P-") + std::to_string(strike_milli);
                if (!seen.insert(id).second) continue;
                ++out.contracts;
                const std::size_t expiry = issue + cfg.maturity_days;
                for (std::size_t d = issue; d < std::min(expiry, n); ++d) {
                    OptionQuote q;
                    q.contract_id = id;
                    q.date = dates[d];
                    q.time_to_maturity = static_cast<double>(expiry - d) / cfg.trading_days;
                    q.option_type = kind;
                    q.strike = strike;
                    q.spot = u.spot[d];
                    q.dividend_rate = div_annual[d] / cfg.dividend_annualization;
                    q.risk_free_rate = rate[d];
                    q.garch_vol = sigma[d];
                    const pricing::MarketParams p{q.spot, q.strike, q.risk_free_rate, div_annual[d], q.garch_vol,
                                                  q.time_to_maturity};
                    q.theoretical_price = pricing::price_bsm(p, kind);
                    q.delta = pricing::delta_bsm(p, kind);
                    const double eta = cfg.noise_level > 0.0 ? cfg.noise_level * noise_rng.normal() : 0.0;
                    q.target_price = q.theoretical_price * (1.0 + eta);
                    out.quotes.push_back(std::move(q));
                }
            }
        }
    }
    if (out.contracts == 0) throw DomainError("generator: configuration yields zero contracts");

    std::stable_sort(out.quotes.begin(), out.quotes.end(), [](const OptionQuote& a, const OptionQuote& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.contract_id < b.contract_id;
    });
    return out;
}

DatasetSplit split_by_cutoff(std::span<const OptionQuote> quotes, Date cutoff) {
    DatasetSplit split;
    split.cutoff = cutoff;
    for (const auto& q : quotes) (q.date <= cutoff ? split.train : split.test).push_back(q);
    auto by_date = [](const OptionQuote& a, const OptionQuote& b) { return a.date < b.date; };
    std::stable_sort(split.train.begin(), split.train.end(), by_date);
    std::stable_sort(split.test.begin(), split.test.end(), by_date);
    return split;
}

std::array<double, kFeatureCount> NormStats::apply(const std::array<double, kFeatureCount>& features) const {
    std::array<double, kFeatureCount> out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = (features[i] - mean[i]) / std[i];
    return out;
}

std::array<double, kFeatureCount> NormStats::invert(const std::array<double, kFeatureCount>& normalized) const {
    std::array<double, kFeatureCount> out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = normalized[i] * std[i] + mean[i];
    return out;
}

NormStats fit_norm(std::span<const OptionQuote> train) {
    if (train.empty()) throw DegenerateInputError("fit_norm: empty training set");
    const double n = static_cast<double>(train.size());
    NormStats s;
    std::array<double, kFeatureCount> sq{};
    double target_sq = 0.0;
    for (const auto& q : train) {
        const auto f = q.features();
        for (std::size_t i = 0; i < kFeatureCount; ++i) s.mean[i] += f[i];
        s.target_mean += q.target_price;
    }
    for (auto& m : s.mean) m /= n;
    s.target_mean /= n;
    for (const auto& q : train) {
        const auto f = q.features();
        for (std::size_t i = 0; i < kFeatureCount; ++i) sq[i] += (f[i] - s.mean[i]) * (f[i] - s.mean[i]);
        target_sq += (q.target_price - s.target_mean) * (q.target_price - s.target_mean);
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        s.std[i] = std::sqrt(sq[i] / n);
        if (!(s.std[i] > 0.0))
            throw DegenerateInputError("fit_norm: column '" + std::string(kFeatureNames[i]) + "' has zero variance");
    }
    s.target_std = std::sqrt(target_sq / n);
    if (!(s.target_std > 0.0)) throw DegenerateInputError("fit_norm: column 'target_price' has zero variance");
    return s;
}

std::vector<std::array<double, kFeatureCount>> apply_norm(const NormStats& stats, std::span<const OptionQuote> quotes) {
    std::vector<std::array<double, kFeatureCount>> out;
    out.reserve(quotes.size());
    for (const auto& q : quotes) out.push_back(stats.apply(q.features()));
    return out;
}

WindowedSet window_side(std::span<const OptionQuote> side, const NormStats& stats, std::size_t n) {
    if (n < 1) throw DomainError("window: length must be >= 1");
    WindowedSet set;
    set.window = n;

    std::map<std::string, std::vector<std::size_t>> by_contract;
    for (std::size_t i = 0; i < side.size(); ++i) by_contract[side[i].contract_id].push_back(i);

    // (last index, first index) pairs, sorted so samples follow the side order.
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> windows;
    for (const auto& [id, idx] : by_contract) {
        if (idx.size() < n) {
            ++set.short_contracts;
            continue;
        }
        for (std::size_t j = 0; j + n <= idx.size(); ++j)
            windows.emplace_back(idx[j + n - 1], std::vector<std::size_t>(idx.begin() + j, idx.begin() + j + n));
    }
    std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const auto normalized = apply_norm(stats, side);
    set.inputs.reserve(windows.size() * n * kFeatureCount);
    for (const auto& [last, members] : windows) {
        for (std::size_t m : members) set.inputs.insert(set.inputs.end(), normalized[m].begin(), normalized[m].end());
        set.labels.push_back(stats.normalize_target(side[last].target_price));
        set.last_index.push_back(last);
    }
    return set;
}

WindowedSplit window(const DatasetSplit& split, const NormStats& stats, std::size_t n) {
    return {window_side(split.train, stats, n), window_side(split.test, stats, n)};
}

}  // namespace okan::data
