#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "okan/app/config.hpp"
#include "okan/data.hpp"
#include "okan/garch.hpp"
#include "okan/model.hpp"
#include "okan/train.hpp"

namespace okan::app {

/// Every knob of the experiment. Defaults reproduce the documented setup.
struct BenchConfig {
    std::uint64_t seed = 20240701;
    /// Load quotes from this CSV instead of generating them.
    std::optional<std::filesystem::path> csv;
    data::GeneratorConfig generator;
    data::Date cutoff = data::parse_date("2020-08-31");
    std::size_t window = 5;
    std::size_t report_days = 240;

    std::size_t batch_size = 32;
    double learning_rate = 1e-5;
    std::size_t kan_epochs = 50;        ///< KAN and Conv-KAN
    std::size_t recurrent_epochs = 200; ///< LSTM and Conv-LSTM
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    std::vector<std::size_t> kan_hidden{8};
    std::vector<std::size_t> conv_kan_filters{4};
    std::size_t conv_kan_kernel = 3;
    std::vector<std::size_t> conv_kan_head{16};
    std::size_t lstm_hidden = 16;
    std::size_t conv_lstm_channels = 4;
    std::size_t conv_lstm_kernel = 3;

    /// Models trained concurrently; results do not depend on it.
    unsigned threads = 1;

    /// Reads known keys; throws ParseError on an unknown key.
    static BenchConfig from(const Config& config);
    /// Canonical `key = value` text; from(parse(to_text())) reproduces this config.
    std::string to_text() const;

    train::TrainConfig train_config(const std::string& model, std::uint64_t seed) const;
};

/// Model names in report order.
const std::vector<std::string>& model_names();
/// File-name slug: "B-S-M" -> "bsm", "Conv-LSTM" -> "conv_lstm".
std::string model_slug(const std::string& name);

std::unique_ptr<nn::Model> make_model(const std::string& name, const BenchConfig& config, std::uint64_t seed);

struct PreparedData {
    std::vector<data::OptionQuote> quotes;
    std::optional<data::GeneratedData> generated;
    std::vector<std::string> load_warnings;
    data::DatasetSplit split;
    data::NormStats stats;
    data::WindowedSplit windows;
};

PreparedData prepare_data(const BenchConfig& config);

struct BenchResult {
    std::vector<train::MetricsRow> rows;
    std::filesystem::path out_dir;
};

/// Full pipeline: data, split, six models, metrics, CSVs, SVGs, report and manifest.
BenchResult run_bench(const BenchConfig& config, const std::filesystem::path& out_dir,
                      const std::string& config_path = {}, std::ostream* log = nullptr);

/// Trains one neural model; writes its checkpoint, loss curve and metrics row.
train::MetricsRow run_train(const BenchConfig& config, const std::string& model, const std::filesystem::path& out_dir,
                            const std::string& config_path = {}, std::ostream* log = nullptr);

/// Writes quotes.csv and underlying.csv.
void run_gen_data(const BenchConfig& config, const std::filesystem::path& out_dir, const std::string& config_path = {});

/// GARCH(1,1) on a price series CSV (`date,price` in the first two columns,
/// header row required) or, without input, on the generated underlying.
/// Writes garch.json and volatility.csv.
vol::GarchFit run_fit_garch(const BenchConfig& config, const std::optional<std::filesystem::path>& input,
                            const std::filesystem::path& out_dir, const std::string& config_path = {});

/// Fixed-width metrics table (model x MSE, RMSE, MAE, MAPE) from a metrics CSV.
std::string format_metrics_table(const std::vector<train::MetricsRow>& rows);
std::vector<train::MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Re-renders every SVG in a bench directory from its CSVs; returns the files written.
std::vector<std::filesystem::path> render_plots(const std::filesystem::path& dir);

}  // namespace okan::app
