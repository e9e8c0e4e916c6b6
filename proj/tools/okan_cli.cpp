#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "okan/app/bench.hpp"
#include "okan/app/config.hpp"
#include "okan/app/suites.hpp"
#include "okan/errors.hpp"
#include "okan/pricing.hpp"

namespace fs = std::filesystem;
using namespace okan;

namespace {

constexpr const char* kOutputRootEnv = "OKAN_OUTPUT_ROOT";

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
};

app::BenchConfig load_config(const Globals& g) {
    app::Config c = g.config_path.empty() ? app::Config{} : app::Config::load(g.config_path);
    for (const auto& o : g.overrides) c.apply_override(o);
    if (g.seed) c.set("seed", std::to_string(*g.seed));
    return app::BenchConfig::from(c);
}

fs::path output_dir(const Globals& g, const std::string& subcommand) {
    if (!g.out.empty()) return g.out;
    const char* root = std::getenv(kOutputRootEnv);
    return fs::path(root && *root ? root : "okan-out") / subcommand;
}

int cmd_price(double spot, double strike, double rate, double div, double vol, double ttm, const std::string& kind) {
    pricing::MarketParams p{spot, strike, rate, div, vol, ttm};
    p.validate();
    std::vector<pricing::OptionKind> kinds;
    if (kind == "both") {
        kinds = {pricing::OptionKind::Call, pricing::OptionKind::Put};
    } else {
        kinds = {pricing::parse_option_kind(kind)};
    }
    auto bs_params = p;
    bs_params.dividend_yield = 0.0;
    std::printf("%-6s %14s %14s\n", "kind", "B-S", "B-S-M");
    for (auto k : kinds)
        std::printf("%-6s %14.6f %14.6f\n", std::string(pricing::to_string(k)).c_str(), pricing::price_bs(bs_params, k),
                    pricing::price_bsm(p, k));
    if (ttm > 0.0) {
        const auto d = pricing::d1_d2(p);
        const auto d0 = pricing::d1_d2(bs_params);
        std::printf("d1 %14.6f %14.6f\nd2 %14.6f %14.6f\n", d0.d1, d.d1, d0.d2, d.d2);
    } else {
        std::printf("d1, d2: undefined at expiry (price is the payoff)\n");
    }
    const double parity = pricing::price_bsm(p, pricing::OptionKind::Call) - pricing::price_bsm(p, pricing::OptionKind::Put) -
                          (spot * std::exp(-div * ttm) - strike * std::exp(-rate * ttm));
    std::printf("put-call parity residual: %.3e\n", parity);
    return 0;
}

int cmd_verify(bool negative_control, std::uint64_t seed, std::size_t paths, unsigned threads) {
    std::vector<app::Check> checks;
    if (negative_control) {
        checks.push_back(app::payoff_negative_control());
    } else {
        for (auto& c : app::parity_suite(seed)) checks.push_back(c);
        for (auto& c : app::monte_carlo_suite(seed, paths, threads)) checks.push_back(c);
        for (auto& c : app::pde_suite()) checks.push_back(c);
    }
    bool ok = true;
    for (const auto& c : checks) {
        std::printf("%s\n", app::format_check(c).c_str());
        ok = ok && c.passed;
    }
    std::printf("%s\n", ok ? "all checks passed" : "verification FAILED");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Option pricing with Kolmogorov-Arnold and recurrent networks"};
    cli.require_subcommand(1);
    Globals g;
    cli.add_option("--seed", g.seed, "Master seed (overrides the config file)");
    cli.add_option("--config", g.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
    cli.add_option("--set", g.overrides, "Config override key=value (repeatable)");
    cli.add_option("--out", g.out, std::string("Output directory (default: $") + kOutputRootEnv + "/<subcommand>)");

    auto* price = cli.add_subcommand("price", "Closed-form prices, d1/d2 and parity residual");
    double spot = 0, strike = 0, rate = 0, div = 0, vol = 0.2, ttm = 0;
    std::string kind = "both";
    price->add_option("--spot", spot, "Spot price")->required();
    price->add_option("--strike", strike, "Strike")->required();
    price->add_option("--ttm", ttm, "Time to maturity in years")->required();
    price->add_option("--rate", rate, "Risk-free rate")->capture_default_str();
    price->add_option("--div", div, "Continuous dividend yield")->capture_default_str();
    price->add_option("--vol", vol, "Volatility")->capture_default_str();
    price->add_option("--kind", kind, "call, put or both")->check(CLI::IsMember({"call", "put", "both"}))->capture_default_str();

    auto* verify = cli.add_subcommand("verify", "Parity, Monte Carlo and PDE checks");
    bool negative_control = false;
    std::size_t paths = 1'000'000;
    unsigned threads = 1;
    verify->add_flag("--negative-control", negative_control, "Run the payoff residual case, which must FAIL");
    verify->add_option("--paths", paths, "Monte Carlo paths")->capture_default_str();
    verify->add_option("--threads", threads, "Monte Carlo threads")->capture_default_str();

    auto* gen = cli.add_subcommand("gen-data", "Write a synthetic option chain CSV");
    auto* garch = cli.add_subcommand("fit-garch", "Fit GARCH(1,1) and write the volatility series");
    std::string garch_input;
    garch->add_option("--input", garch_input, "CSV with date,price columns (default: generated underlying)")
        ->check(CLI::ExistingFile);
    auto* train = cli.add_subcommand("train", "Train one neural model");
    std::string model = "kan";
    train->add_option("--model", model, "lstm, conv-lstm, kan or conv-kan")->capture_default_str();
    auto* bench = cli.add_subcommand("bench", "Full six-model benchmark");
    auto* report = cli.add_subcommand("report", "Print a bench report and re-render its plots");
    std::string report_dir;
    report->add_option("--dir", report_dir, "Bench output directory");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (price->parsed()) return cmd_price(spot, strike, rate, div, vol, ttm, kind);
        const auto cfg = load_config(g);
        if (verify->parsed()) return cmd_verify(negative_control, cfg.seed, paths, threads);
        if (gen->parsed()) {
            const auto dir = output_dir(g, "gen-data");
            app::run_gen_data(cfg, dir, g.config_path);
            std::printf("wrote %s\n", (dir / "quotes.csv").string().c_str());
        } else if (garch->parsed()) {
            const auto dir = output_dir(g, "fit-garch");
            std::optional<fs::path> input;
            if (!garch_input.empty()) input = garch_input;
            const auto fit = app::run_fit_garch(cfg, input, dir, g.config_path);
            std::printf("omega %.6g  alpha %.6f  beta %.6f  log-likelihood %.6f\n", fit.params.omega, fit.params.alpha,
                        fit.params.beta, fit.log_likelihood);
            std::printf("wrote %s\n", (dir / "volatility.csv").string().c_str());
        } else if (train->parsed()) {
            const auto dir = output_dir(g, "train");
            const auto row = app::run_train(cfg, model, dir, g.config_path, &std::cerr);
            std::printf("%s", app::format_metrics_table({row}).c_str());
        } else if (bench->parsed()) {
            const auto dir = output_dir(g, "bench");
            const auto result = app::run_bench(cfg, dir, g.config_path, &std::cerr);
            std::printf("%s", app::format_metrics_table(result.rows).c_str());
            std::printf("report: %s\n", (dir / "report.txt").string().c_str());
        } else if (report->parsed()) {
            const fs::path dir = report_dir.empty() ? output_dir(g, "bench") : fs::path(report_dir);
            std::printf("%s", app::format_metrics_table(app::read_metrics_csv(dir / "metrics.csv")).c_str());
            for (const auto& f : app::render_plots(dir)) std::printf("rendered %s\n", f.string().c_str());
        }
        return 0;
    } catch (const okan::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const okan::DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
