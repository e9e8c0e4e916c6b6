#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <set>

#include "okan/data.hpp"
#include "okan/errors.hpp"

using namespace okan;
using namespace okan::data;
namespace fs = std::filesystem;

namespace {

OptionQuote quote(const std::string& id, const std::string& date, double target = 1.0) {
    OptionQuote q;
    q.contract_id = id;
    q.date = parse_date(date);
    q.time_to_maturity = 0.1;
    q.delta = 0.5;
    q.strike = 100;
    q.spot = 101;
    q.theoretical_price = 3;
    q.dividend_rate = 0.001;
    q.risk_free_rate = 0.02;
    q.garch_vol = 0.2;
    q.target_price = target;
    return q;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("okan_test_" + name); }

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("dates") {
    CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");
    CHECK_THROWS_AS(parse_date("2021-02-29"), ParseError);
    CHECK_THROWS_AS(parse_date("2020/01/01"), ParseError);
    CHECK(trading_calendar(parse_date("2021-01-01"), parse_date("2021-01-10")).size() == 6);
}

TEST_CASE("feature vector order and encoding") {
    auto q = quote("a", "2020-07-01");
    q.option_type = pricing::OptionKind::Put;
    const auto f = q.features();
    CHECK(f.size() == 9);
    CHECK(f[0] == 0.1);
    CHECK(f[1] == -1.0);
    CHECK(f[4] == 101);
    CHECK(f[8] == 0.2);
    CHECK(kFeatureNames[5] == "theo_price");
}

TEST_CASE("csv round trip is exact") {
    auto g = generate_synthetic({}, 3);
    g.quotes.resize(200);
    const auto path = temp_file("roundtrip.csv");
    write_csv(path, g.quotes);
    const auto back = load_csv(path);
    REQUIRE(back.quotes.size() == 200);
    CHECK(back.rejected.empty());
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(back.quotes[i].features() == g.quotes[i].features());
        CHECK(back.quotes[i].target_price == g.quotes[i].target_price);
        CHECK(back.quotes[i].contract_id == g.quotes[i].contract_id);
        CHECK(back.quotes[i].date == g.quotes[i].date);
    }
    CHECK(format_double(0.1) == "0.1");
    fs::remove(path);
}

TEST_CASE("csv diagnostics") {
    const auto path = temp_file("diag.csv");
    const std::string header(kCsvHeader);

    write_file(path, header + "\n");
    auto r = load_csv(path);
    CHECK(r.quotes.empty());
    CHECK(r.warnings.size() == 1);

    write_file(path, header + "\nx,2020-07-01,0.1,1,0.5,100,-5,3,0.001,0.02,0.2,3\n"
                              "y,2020-07-01,0.1,1,0.5,100,101,3,0.001,0.02,0.2,3\n");
    r = load_csv(path);
    CHECK(r.quotes.size() == 1);
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].find("row 2") != std::string::npos);
    CHECK(r.rejected[0].find("spot") != std::string::npos);

    write_file(path, header + "\nx,2020-07-01,0.1,1,abc,100,101,3,0.001,0.02,0.2,3\n");
    CHECK_THROWS_AS(load_csv(path), ParseError);

    write_file(path, "contract_id,date\n");
    try {
        load_csv(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("garch_vol") != std::string::npos);
    }

    write_file(path, "");
    CHECK_THROWS_AS(load_csv(path), ParseError);
    fs::remove(path);
    CHECK_THROWS_AS(load_csv(path), ParseError);
}

TEST_CASE("generator properties") {
    GeneratorConfig cfg;
    cfg.noise_level = 0.0;
    const auto g = generate_synthetic(cfg, 5);
    CHECK(g.contracts > 0);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < g.quotes.size(); ++i) {
        const auto& q = g.quotes[i];
        CHECK(q.target_price == q.theoretical_price);
        CHECK(q.invariant_violation().empty());
        if (q.option_type == pricing::OptionKind::Call) {
            CHECK(q.delta > 0.0);
            CHECK(q.delta <= 1.0);
        } else {
            CHECK(q.delta < 0.0);
            CHECK(q.delta >= -1.0);
        }
        if (i) CHECK(g.quotes[i - 1].date <= q.date);
        ids.insert(q.contract_id);
    }
    CHECK(ids.size() == g.contracts);

    const auto a = generate_synthetic({}, 9), b = generate_synthetic({}, 9);
    REQUIRE(a.quotes.size() == b.quotes.size());
    for (std::size_t i = 0; i < a.quotes.size(); ++i) CHECK(a.quotes[i].target_price == b.quotes[i].target_price);
    CHECK(generate_synthetic({}, 10).quotes[0].target_price != a.quotes[0].target_price);
}

TEST_CASE("issue schedule is phased on the anchor date") {
    GeneratorConfig cfg;
    cfg.noise_level = 0.0;
    auto issued_on = [](const GeneratedData& g, Date d) {
        auto prefix = format_date(d);
        std::erase(prefix, '-');
        std::set<std::string> ids;
        for (const auto& q : g.quotes)
            if (q.contract_id.starts_with(prefix + "-")) ids.insert(q.contract_id);
        return ids.size();
    };
    const auto anchor = parse_date("2020-08-31");
    const auto g = generate_synthetic(cfg, 5);
    CHECK(issued_on(g, anchor) == 2 * cfg.moneyness.size());
    // Adjacent trading days are not issue days with a 5-day interval.
    CHECK(issued_on(g, parse_date("2020-08-28")) == 0);
    CHECK(issued_on(g, parse_date("2020-09-01")) == 0);

    cfg.issue_anchor = parse_date("2030-01-01");  // outside the calendar: start on the first trading day
    const auto h = generate_synthetic(cfg, 5);
    CHECK(issued_on(h, parse_date("2020-01-01")) == 2 * cfg.moneyness.size());
}

TEST_CASE("generator rejects degenerate configs") {
    GeneratorConfig cfg;
    cfg.end_date = cfg.start_date;
    CHECK_THROWS_AS(generate_synthetic(cfg, 1), DomainError);
    cfg = {};
    cfg.moneyness.clear();
    CHECK_THROWS_AS(generate_synthetic(cfg, 1), DomainError);
}

TEST_CASE("split by cutoff") {
    std::vector<OptionQuote> q{quote("alive", "2020-07-01"), quote("alive", "2020-08-31"),
                               quote("alive", "2020-09-01"), quote("alive", "2020-09-15"),
                               quote("fresh", "2020-08-31"), quote("fresh", "2020-09-01"),
                               quote("late", "2020-09-02")};
    const auto s = split_by_cutoff(q, parse_date("2020-08-31"));
    CHECK(s.train.size() == 3);
    CHECK(s.test.size() == 4);
    std::size_t fresh_train = 0, late_train = 0;
    for (const auto& t : s.train) {
        CHECK(t.date <= s.cutoff);
        fresh_train += t.contract_id == "fresh";
        late_train += t.contract_id == "late";
    }
    for (const auto& t : s.test) CHECK(t.date > s.cutoff);
    CHECK(fresh_train == 1);
    CHECK(late_train == 0);
}

TEST_CASE("normalization") {
    std::vector<OptionQuote> q{quote("a", "2020-07-01", 1), quote("a", "2020-07-02", 2), quote("a", "2020-07-03", 3)};
    for (std::size_t i = 0; i < 3; ++i) {
        q[i].spot = 1.0 + static_cast<double>(i);
        q[i].strike = 10.0 * static_cast<double>(i + 1);
        q[i].time_to_maturity = 0.1 * static_cast<double>(i + 1);
        q[i].delta = 0.2 * static_cast<double>(i + 1);
        q[i].theoretical_price = static_cast<double>(i * i) + 1;
        q[i].dividend_rate = 0.001 * static_cast<double>(i + 1);
        q[i].risk_free_rate = 0.01 * static_cast<double>(i + 1);
        q[i].garch_vol = 0.1 * static_cast<double>(i + 1);
        q[i].option_type = i == 1 ? pricing::OptionKind::Put : pricing::OptionKind::Call;
    }
    const auto st = fit_norm(q);
    CHECK(st.mean[4] == doctest::Approx(2.0));
    CHECK(st.std[4] * st.std[4] == doctest::Approx(2.0 / 3.0));
    const auto z = apply_norm(st, q);
    CHECK(z[0][4] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(z[1][4] == doctest::Approx(0.0));
    CHECK(z[2][4] == doctest::Approx(1.2247).epsilon(1e-4));
    const auto back = st.invert(z[2]);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(back[i] - q[2].features()[i]) < 1e-12);
    CHECK(st.denormalize_target(st.normalize_target(2.5)) == doctest::Approx(2.5).epsilon(1e-15));

    q[1].spot = q[0].spot;
    q[2].spot = q[0].spot;
    try {
        fit_norm(q);
        FAIL("expected DegenerateInputError");
    } catch (const DegenerateInputError& e) {
        CHECK(std::string(e.what()).find("spot") != std::string::npos);
    }
}

TEST_CASE("windows") {
    auto g = generate_synthetic({}, 2);
    const auto s = split_by_cutoff(g.quotes, parse_date("2020-08-31"));
    const auto st = fit_norm(s.train);
    const auto w1 = window_side(s.train, st, 1);
    CHECK(w1.size() == s.train.size());
    CHECK_THROWS_AS(window_side(s.train, st, 0), DomainError);

    std::vector<OptionQuote> five;
    for (int d = 1; d <= 5; ++d) five.push_back(quote("x", "2020-07-0" + std::to_string(d), d));
    five.push_back(quote("short", "2020-07-02"));
    const auto w3 = window_side(five, st, 3);
    CHECK(w3.size() == 3);
    CHECK(w3.short_contracts == 1);
    CHECK(w3.inputs.size() == 3 * 3 * 9);
    CHECK(w3.labels[2] == doctest::Approx(st.normalize_target(5.0)));

    // Interleaved contracts: windows count per contract and never mix strikes.
    auto mixed = five;
    for (int d = 1; d <= 4; ++d) {
        auto q = quote("y", "2020-07-0" + std::to_string(d));
        q.strike = 200;
        mixed.push_back(q);
    }
    std::stable_sort(mixed.begin(), mixed.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
    const auto wm = window_side(mixed, st, 3);
    CHECK(wm.size() == 3 + 2);
    for (std::size_t k = 0; k < wm.size(); ++k)
        for (std::size_t r = 1; r < 3; ++r) CHECK(wm.inputs[(k * 3 + r) * 9 + 3] == wm.inputs[(k * 3) * 9 + 3]);

    const auto w = window(s, st, 5);
    for (std::size_t k = 0; k < w.test.size(); ++k) {
        const auto last = w.test.last_index[k];
        CHECK(s.test[last].date > s.cutoff);
    }
    for (std::size_t k = 0; k < w.train.size(); ++k) {
        // The window's final row is the normalized last observation.
        const auto z = st.apply(s.train[w.train.last_index[k]].features());
        for (std::size_t f = 0; f < 9; ++f) CHECK(w.train.inputs[(k * 5 + 4) * 9 + f] == z[f]);
    }
}
