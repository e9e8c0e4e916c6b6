#include "okan/app/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "okan/app/manifest.hpp"
#include "okan/app/svg.hpp"
#include "okan/conv_kan.hpp"
#include "okan/errors.hpp"
#include "okan/kan.hpp"
#include "okan/lstm.hpp"
#include "okan/rng.hpp"

namespace okan::app {

namespace fs = std::filesystem;
using data::format_double;

namespace {

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "seed",  "data.csv", "gen.start", "gen.end", "gen.spot0", "gen.drift", "gen.volatility", "gen.rate0",
        "gen.rate_vol", "gen.dividend0", "gen.dividend_vol", "gen.reversion", "gen.issue_interval_days",
        "gen.issue_anchor", "gen.maturity_days", "gen.moneyness", "gen.strike_step", "gen.noise_level",
        "gen.max_contracts", "gen.dividend_annualization", "gen.trading_days", "split.cutoff", "window", "report.days",
        "train.batch_size", "train.learning_rate", "train.kan_epochs", "train.recurrent_epochs", "train.adam_beta1",
        "train.adam_beta2", "train.adam_eps", "kan.hidden", "conv_kan.filters", "conv_kan.kernel_width",
        "conv_kan.head_hidden", "lstm.hidden", "conv_lstm.hidden_channels", "conv_lstm.kernel_width", "threads"};
    return keys;
}

bool is_neural(const std::string& name) { return name != "B-S" && name != "B-S-M"; }

std::uint64_t model_index(const std::string& name) {
    const auto& names = model_names();
    return static_cast<std::uint64_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

std::string resolve_model(const std::string& text) {
    std::string key = text;
    std::replace(key.begin(), key.end(), '-', '_');
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const auto& n : model_names())
        if (model_slug(n) == key || n == text) return n;
    if (key == "kans") return "KANs";
    if (key == "conv_kans") return "Conv-KANs";
    throw ParseError("unknown model '" + text + "' (expected one of lstm, conv-lstm, kan, conv-kan)");
}

struct EvalRow {
    const data::OptionQuote* quote;
    double actual;
};

std::vector<EvalRow> eval_rows(const PreparedData& d) {
    std::vector<EvalRow> rows;
    for (std::size_t idx : d.windows.test.last_index) rows.push_back({&d.split.test[idx], d.split.test[idx].target_price});
    return rows;
}

std::vector<double> analytic_predictions(const std::vector<EvalRow>& rows, bool dividend, double annualization) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        const auto& q = *r.quote;
        const double yield = dividend ? q.dividend_rate * annualization : 0.0;
        const pricing::MarketParams p{q.spot, q.strike, q.risk_free_rate, yield, q.garch_vol, q.time_to_maturity};
        out.push_back(dividend ? pricing::price_bsm(p, q.option_type) : pricing::price_bs(p, q.option_type));
    }
    return out;
}

struct NeuralRun {
    std::vector<double> predictions;
    train::TrainResult result;
    nlohmann::json describe;
    std::size_t parameters = 0;
};

// Recurrent models read the window as T = N steps of [C x D]; with C = 1 the layout is the same.
train::Dataset model_dataset(const std::string& name, const data::WindowedSet& set) {
    auto ds = train::to_dataset(set);
    if (name == "LSTM" || name == "Conv-LSTM") ds.sample_shape = {set.window, 1, data::kFeatureCount};
    return ds;
}

NeuralRun train_neural(const std::string& name, const BenchConfig& cfg, const PreparedData& d, const fs::path& out_dir) {
    const auto idx = model_index(name);
    auto model = make_model(name, cfg, derive_seed(cfg.seed, 100 + idx));
    const auto train_set = model_dataset(name, d.windows.train);
    NeuralRun run;
    run.result = train::train(*model, train_set, cfg.train_config(name, derive_seed(cfg.seed, 200 + idx)),
                              out_dir / ("checkpoint_" + model_slug(name) + ".json"));
    run.predictions = train::predict(*model, model_dataset(name, d.windows.test));
    for (auto& v : run.predictions) v = d.stats.denormalize_target(v);
    run.describe = model->describe();
    run.parameters = model->parameter_count();
    return run;
}

void write_loss_csv(const fs::path& path, const std::vector<double>& loss) {
    std::string text = "epoch,loss\n";
    for (std::size_t e = 0; e < loss.size(); ++e) text += std::to_string(e + 1) + "," + format_double(loss[e]) + "\n";
    write_text(path, text);
}

void write_predictions_csv(const fs::path& path, const std::vector<EvalRow>& rows, const std::vector<double>& pred,
                           std::size_t days) {
    std::set<data::Date> dates;
    for (const auto& r : rows) dates.insert(r.quote->date);
    data::Date last_kept = dates.empty() ? data::Date{} : *dates.rbegin();
    if (dates.size() > days) last_kept = *std::next(dates.begin(), static_cast<std::ptrdiff_t>(days - 1));
    std::string text = "date,contract_id,opt_type,actual,predicted\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& q = *rows[i].quote;
        if (days == 0 || q.date > last_kept) continue;
        text += data::format_date(q.date) + "," + q.contract_id + "," + (q.option_type_code() > 0 ? "1" : "-1") + "," +
                format_double(rows[i].actual) + "," + format_double(pred[i]) + "\n";
    }
    write_text(path, text);
}

void write_metrics_csv(const fs::path& path, const std::vector<train::MetricsRow>& rows) {
    std::string text = "model,MSE,RMSE,MAE,MAPE\n";
    for (const auto& r : rows)
        text += r.model + "," + format_double(r.mse) + "," + format_double(r.rmse) + "," + format_double(r.mae) + "," +
                format_double(r.mape) + "\n";
    write_text(path, text);
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path, const std::string& header) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw ParseError(path.string() + ": expected header '" + header + "'");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        rows.push_back(std::move(fields));
    }
    return rows;
}

double to_double(const std::string& s, const fs::path& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": cannot parse number '" + s + "'");
    }
}

std::string report_text(const BenchConfig& cfg, const PreparedData& d, const std::vector<train::MetricsRow>& rows,
                        const std::map<std::string, NeuralRun>& runs) {
    std::ostringstream o;
    o << "Option pricing benchmark\n========================\n\n";
    o << "Configuration (every value below is reproducible from this block and the seed)\n";
    o << cfg.to_text() << "\n";
    o << "Choices not fixed by the experiment protocol\n"
      << "  window length N               = " << cfg.window << " observations\n"
      << "  KAN hidden widths             = [" << join_sizes(cfg.kan_hidden) << "]\n"
      << "  Conv-KAN filters / kernel     = [" << join_sizes(cfg.conv_kan_filters) << "] / " << cfg.conv_kan_kernel
      << ", head hidden [" << join_sizes(cfg.conv_kan_head) << "]\n"
      << "  LSTM hidden units             = " << cfg.lstm_hidden << "\n"
      << "  Conv-LSTM channels / kernel   = " << cfg.conv_lstm_channels << " / " << cfg.conv_lstm_kernel << "\n"
      << "  B-spline grid                 = 5 intervals, degree 3, range [-1.5, 1.5]\n"
      << "  volatility feature            = GARCH(1,1), Gaussian quasi-likelihood\n"
      << "  Adam beta1 / beta2 / eps      = " << format_double(cfg.adam_beta1) << " / " << format_double(cfg.adam_beta2)
      << " / " << format_double(cfg.adam_eps) << "\n"
      << "  dividend annualization factor = " << format_double(cfg.generator.dividend_annualization) << "\n"
      << "  metrics                       = computed on denormalized prices\n"
      << "  evaluation rows               = final observation of every test window\n\n";

    o << "Data\n";
    o << "  source                 = " << (cfg.csv ? cfg.csv->generic_string() : std::string("synthetic generator"))
      << "\n";
    o << "  observations           = " << d.quotes.size() << " (train " << d.split.train.size() << ", test "
      << d.split.test.size() << ")\n";
    o << "  cutoff                 = " << data::format_date(d.split.cutoff) << "\n";
    o << "  windows                = train " << d.windows.train.size() << ", test " << d.windows.test.size() << "\n";
    o << "  contracts shorter than N = train " << d.windows.train.short_contracts << ", test "
      << d.windows.test.short_contracts << "\n";
    if (d.generated) {
        const auto& g = d.generated->garch;
        o << "  contracts              = " << d.generated->contracts << "\n";
        o << "  GARCH(1,1)             = omega " << format_double(g.omega) << ", alpha " << format_double(g.alpha)
          << ", beta " << format_double(g.beta) << "\n";
    }
    for (const auto& w : d.load_warnings) o << "  warning: " << w << "\n";
    o << "\n";

    o << "Results (test set)\n" << format_metrics_table(rows);
    for (const auto& r : rows)
        if (r.guarded) o << "  " << r.model << ": " << r.guarded << " rows excluded from MAPE (|y| < 1e-8)\n";
    o << "\n";

    auto ranked = rows;
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.mse < b.mse; });
    o << "Ranking by MSE\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) o << "  " << i + 1 << ". " << ranked[i].model << "\n";
    o << "\n";

    o << "Models\n";
    for (const auto& [name, run] : runs) {
        o << "  " << name << ": " << run.parameters << " parameters, " << run.result.epoch_loss.size()
          << " epochs, final train loss " << format_double(run.result.epoch_loss.back()) << "\n";
        o << "    " << run.describe.dump() << "\n";
    }
    return o.str();
}

}  // namespace

BenchConfig BenchConfig::from(const Config& c) {
    for (const auto& [k, v] : c.entries())
        if (!known_keys().count(k)) throw ParseError("unknown config key '" + k + "'");
    BenchConfig b;
    b.seed = c.get_u64("seed", b.seed);
    if (c.has("data.csv") && !c.get_string("data.csv", "").empty()) b.csv = c.get_string("data.csv", "");
    auto& g = b.generator;
    if (c.has("gen.start")) g.start_date = data::parse_date(c.get_string("gen.start", ""));
    if (c.has("gen.end")) g.end_date = data::parse_date(c.get_string("gen.end", ""));
    g.spot0 = c.get_double("gen.spot0", g.spot0);
    g.drift = c.get_double("gen.drift", g.drift);
    g.volatility = c.get_double("gen.volatility", g.volatility);
    g.rate0 = c.get_double("gen.rate0", g.rate0);
    g.rate_vol = c.get_double("gen.rate_vol", g.rate_vol);
    g.dividend0 = c.get_double("gen.dividend0", g.dividend0);
    g.dividend_vol = c.get_double("gen.dividend_vol", g.dividend_vol);
    g.reversion = c.get_double("gen.reversion", g.reversion);
    g.issue_interval_days = c.get_size("gen.issue_interval_days", g.issue_interval_days);
    if (c.has("gen.issue_anchor")) g.issue_anchor = data::parse_date(c.get_string("gen.issue_anchor", ""));
    g.maturity_days = c.get_size("gen.maturity_days", g.maturity_days);
    g.moneyness = c.get_doubles("gen.moneyness", g.moneyness);
    g.strike_step = c.get_double("gen.strike_step", g.strike_step);
    g.noise_level = c.get_double("gen.noise_level", g.noise_level);
    g.max_contracts = c.get_size("gen.max_contracts", g.max_contracts);
    g.dividend_annualization = c.get_double("gen.dividend_annualization", g.dividend_annualization);
    g.trading_days = c.get_double("gen.trading_days", g.trading_days);
    if (c.has("split.cutoff")) b.cutoff = data::parse_date(c.get_string("split.cutoff", ""));
    b.window = c.get_size("window", b.window);
    b.report_days = c.get_size("report.days", b.report_days);
    b.batch_size = c.get_size("train.batch_size", b.batch_size);
    b.learning_rate = c.get_double("train.learning_rate", b.learning_rate);
    b.kan_epochs = c.get_size("train.kan_epochs", b.kan_epochs);
    b.recurrent_epochs = c.get_size("train.recurrent_epochs", b.recurrent_epochs);
    b.adam_beta1 = c.get_double("train.adam_beta1", b.adam_beta1);
    b.adam_beta2 = c.get_double("train.adam_beta2", b.adam_beta2);
    b.adam_eps = c.get_double("train.adam_eps", b.adam_eps);
    b.kan_hidden = c.get_sizes("kan.hidden", b.kan_hidden);
    b.conv_kan_filters = c.get_sizes("conv_kan.filters", b.conv_kan_filters);
    b.conv_kan_kernel = c.get_size("conv_kan.kernel_width", b.conv_kan_kernel);
    b.conv_kan_head = c.get_sizes("conv_kan.head_hidden", b.conv_kan_head);
    b.lstm_hidden = c.get_size("lstm.hidden", b.lstm_hidden);
    b.conv_lstm_channels = c.get_size("conv_lstm.hidden_channels", b.conv_lstm_channels);
    b.conv_lstm_kernel = c.get_size("conv_lstm.kernel_width", b.conv_lstm_kernel);
    b.threads = static_cast<unsigned>(c.get_size("threads", b.threads));
    if (b.threads < 1) b.threads = 1;
    b.generator.validate();
    if (b.window < 1) throw DomainError("window must be >= 1");
    b.train_config("KANs", 0).validate();
    return b;
}

std::string BenchConfig::to_text() const {
    const auto& g = generator;
    std::ostringstream o;
    o << "seed = " << seed << "\n";
    o << "data.csv = " << (csv ? csv->generic_string() : std::string()) << "\n";
    o << "gen.start = " << data::format_date(g.start_date) << "\n";
    o << "gen.end = " << data::format_date(g.end_date) << "\n";
    o << "gen.spot0 = " << format_double(g.spot0) << "\n";
    o << "gen.drift = " << format_double(g.drift) << "\n";
    o << "gen.volatility = " << format_double(g.volatility) << "\n";
    o << "gen.rate0 = " << format_double(g.rate0) << "\n";
    o << "gen.rate_vol = " << format_double(g.rate_vol) << "\n";
    o << "gen.dividend0 = " << format_double(g.dividend0) << "\n";
    o << "gen.dividend_vol = " << format_double(g.dividend_vol) << "\n";
    o << "gen.reversion = " << format_double(g.reversion) << "\n";
    o << "gen.issue_interval_days = " << g.issue_interval_days << "\n";
    o << "gen.issue_anchor = " << data::format_date(g.issue_anchor) << "\n";
    o << "gen.maturity_days = " << g.maturity_days << "\n";
    o << "gen.moneyness = " << join_doubles(g.moneyness) << "\n";
    o << "gen.strike_step = " << format_double(g.strike_step) << "\n";
    o << "gen.noise_level = " << format_double(g.noise_level) << "\n";
    o << "gen.max_contracts = " << g.max_contracts << "\n";
    o << "gen.dividend_annualization = " << format_double(g.dividend_annualization) << "\n";
    o << "gen.trading_days = " << format_double(g.trading_days) << "\n";
    o << "split.cutoff = " << data::format_date(cutoff) << "\n";
    o << "window = " << window << "\n";
    o << "report.days = " << report_days << "\n";
    o << "train.batch_size = " << batch_size << "\n";
    o << "train.learning_rate = " << format_double(learning_rate) << "\n";
    o << "train.kan_epochs = " << kan_epochs << "\n";
    o << "train.recurrent_epochs = " << recurrent_epochs << "\n";
    o << "train.adam_beta1 = " << format_double(adam_beta1) << "\n";
    o << "train.adam_beta2 = " << format_double(adam_beta2) << "\n";
    o << "train.adam_eps = " << format_double(adam_eps) << "\n";
    o << "kan.hidden = " << join_sizes(kan_hidden) << "\n";
    o << "conv_kan.filters = " << join_sizes(conv_kan_filters) << "\n";
    o << "conv_kan.kernel_width = " << conv_kan_kernel << "\n";
    o << "conv_kan.head_hidden = " << join_sizes(conv_kan_head) << "\n";
    o << "lstm.hidden = " << lstm_hidden << "\n";
    o << "conv_lstm.hidden_channels = " << conv_lstm_channels << "\n";
    o << "conv_lstm.kernel_width = " << conv_lstm_kernel << "\n";
    return o.str();
}

train::TrainConfig BenchConfig::train_config(const std::string& model, std::uint64_t train_seed) const {
    train::TrainConfig t;
    t.batch_size = batch_size;
    t.learning_rate = learning_rate;
    t.epochs = (model == "LSTM" || model == "Conv-LSTM") ? recurrent_epochs : kan_epochs;
    t.adam_beta1 = adam_beta1;
    t.adam_beta2 = adam_beta2;
    t.adam_eps = adam_eps;
    t.seed = train_seed;
    return t;
}

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names{"B-S", "B-S-M", "LSTM", "Conv-LSTM", "KANs", "Conv-KANs"};
    return names;
}

std::string model_slug(const std::string& name) {
    if (name == "B-S") return "bs";
    if (name == "B-S-M") return "bsm";
    if (name == "KANs") return "kan";
    if (name == "Conv-KANs") return "conv_kan";
    std::string s = name;
    std::replace(s.begin(), s.end(), '-', '_');
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::unique_ptr<nn::Model> make_model(const std::string& requested, const BenchConfig& cfg, std::uint64_t seed) {
    const auto name = resolve_model(requested);
    if (name == "KANs") {
        nn::KanModelConfig c;
        c.window = cfg.window;
        c.hidden = cfg.kan_hidden;
        return std::make_unique<nn::KanModel>(c, seed);
    }
    if (name == "Conv-KANs") {
        nn::ConvKanConfig c;
        c.window = cfg.window;
        c.filters = cfg.conv_kan_filters;
        c.kernel_width = cfg.conv_kan_kernel;
        c.head_hidden = cfg.conv_kan_head;
        return std::make_unique<nn::ConvKanModel>(c, seed);
    }
    if (name == "LSTM") {
        nn::LstmConfig c;
        c.window = cfg.window;
        c.hidden = cfg.lstm_hidden;
        return std::make_unique<nn::LstmModel>(c, seed);
    }
    if (name == "Conv-LSTM") {
        nn::ConvLstmConfig c;
        c.window = cfg.window;
        c.hidden_channels = cfg.conv_lstm_channels;
        c.kernel_width = cfg.conv_lstm_kernel;
        return std::make_unique<nn::ConvLstmModel>(c, seed);
    }
    throw ParseError("model '" + requested + "' has no trainable form");
}

PreparedData prepare_data(const BenchConfig& cfg) {
    PreparedData d;
    if (cfg.csv) {
        auto loaded = data::load_csv(*cfg.csv);
        d.quotes = std::move(loaded.quotes);
        d.load_warnings = std::move(loaded.warnings);
        for (const auto& r : loaded.rejected) d.load_warnings.push_back("rejected " + r);
    } else {
        d.generated = data::generate_synthetic(cfg.generator, cfg.seed);
        d.quotes = d.generated->quotes;
    }
    if (d.quotes.empty()) throw DomainError("no quotes to work with");
    d.split = data::split_by_cutoff(d.quotes, cfg.cutoff);
    if (d.split.train.empty() || d.split.test.empty())
        throw DomainError("cutoff " + data::format_date(cfg.cutoff) + " leaves an empty train or test side");
    d.stats = data::fit_norm(d.split.train);
    d.windows = data::window(d.split, d.stats, cfg.window);
    if (d.windows.train.size() == 0 || d.windows.test.size() == 0)
        throw DomainError("window length " + std::to_string(cfg.window) + " leaves no train or test samples");
    return d;
}

BenchResult run_bench(const BenchConfig& cfg, const fs::path& out_dir, const std::string& config_path,
                      std::ostream* log) {
    Manifest manifest("bench", out_dir);
    manifest.set("config_path", config_path);
    manifest.set("seed", cfg.seed);
    auto say = [log](const std::string& msg) {
        if (log) *log << msg << std::endl;
    };

    PreparedData d;
    std::vector<EvalRow> rows;
    std::map<std::string, std::vector<double>> predictions;
    std::map<std::string, NeuralRun> runs;
    BenchResult result;
    result.out_dir = out_dir;

    manifest.stage("config", [&] {
        write_text(out_dir / "config.txt", cfg.to_text());
        manifest.add_artifact("config.txt");
    });
    manifest.stage("data", [&] {
        d = prepare_data(cfg);
        rows = eval_rows(d);
        say("data: " + std::to_string(d.windows.train.size()) + " train windows, " +
            std::to_string(d.windows.test.size()) + " test windows");
    });
    manifest.stage("analytic", [&] {
        predictions["B-S"] = analytic_predictions(rows, false, cfg.generator.dividend_annualization);
        predictions["B-S-M"] = analytic_predictions(rows, true, cfg.generator.dividend_annualization);
    });

    std::vector<std::string> neural;
    for (const auto& n : model_names())
        if (is_neural(n)) neural.push_back(n);
    if (cfg.threads > 1) {
        manifest.stage("train", [&] {
            std::vector<NeuralRun> out(neural.size());
            std::vector<std::exception_ptr> errors(neural.size());
            for (std::size_t begin = 0; begin < neural.size(); begin += cfg.threads) {
                std::vector<std::thread> pool;
                for (std::size_t i = begin; i < std::min(neural.size(), begin + cfg.threads); ++i)
                    pool.emplace_back([&, i] {
                        try {
                            out[i] = train_neural(neural[i], cfg, d, out_dir);
                        } catch (...) {
                            errors[i] = std::current_exception();
                        }
                    });
                for (auto& t : pool) t.join();
            }
            for (std::size_t i = 0; i < neural.size(); ++i) {
                if (errors[i]) std::rethrow_exception(errors[i]);
                runs[neural[i]] = std::move(out[i]);
            }
        });
    } else {
        for (const auto& name : neural) {
            manifest.stage("train " + name, [&] {
                say("training " + name);
                runs[name] = train_neural(name, cfg, d, out_dir);
            });
        }
    }
    for (const auto& name : neural) {
        predictions[name] = runs[name].predictions;
        manifest.add_artifact("checkpoint_" + model_slug(name) + ".json");
    }

    manifest.stage("evaluate", [&] {
        std::vector<double> actual;
        for (const auto& r : rows) actual.push_back(r.actual);
        for (const auto& name : model_names()) result.rows.push_back(train::evaluate(predictions[name], actual, name));
    });

    manifest.stage("report", [&] {
        write_metrics_csv(out_dir / "metrics.csv", result.rows);
        manifest.add_artifact("metrics.csv");
        for (const auto& name : model_names()) {
            const auto slug = model_slug(name);
            write_predictions_csv(out_dir / ("predictions_" + slug + ".csv"), rows, predictions[name], cfg.report_days);
            manifest.add_artifact("predictions_" + slug + ".csv");
            if (is_neural(name)) {
                write_loss_csv(out_dir / ("loss_" + slug + ".csv"), runs[name].result.epoch_loss);
                manifest.add_artifact("loss_" + slug + ".csv");
            }
        }
        for (const auto& f : render_plots(out_dir)) manifest.add_artifact(f.filename());
        write_text(out_dir / "report.txt", report_text(cfg, d, result.rows, runs));
        manifest.add_artifact("report.txt");
    });
    manifest.write();
    return result;
}

train::MetricsRow run_train(const BenchConfig& cfg, const std::string& requested, const fs::path& out_dir,
                            const std::string& config_path, std::ostream* log) {
    const auto name = resolve_model(requested);
    if (!is_neural(name)) throw ParseError("model '" + requested + "' has no parameters to train");
    Manifest manifest("train", out_dir);
    manifest.set("config_path", config_path);
    manifest.set("seed", cfg.seed);
    manifest.set("model", name);
    const auto slug = model_slug(name);
    PreparedData d;
    NeuralRun run;
    train::MetricsRow row;
    manifest.stage("data", [&] { d = prepare_data(cfg); });
    manifest.stage("train", [&] {
        if (log) *log << "training " << name << std::endl;
        run = train_neural(name, cfg, d, out_dir);
    });
    manifest.add_artifact("checkpoint_" + slug + ".json");
    manifest.stage("evaluate", [&] {
        const auto rows = eval_rows(d);
        std::vector<double> actual;
        for (const auto& r : rows) actual.push_back(r.actual);
        row = train::evaluate(run.predictions, actual, name);
        write_loss_csv(out_dir / ("loss_" + slug + ".csv"), run.result.epoch_loss);
        write_metrics_csv(out_dir / ("metrics_" + slug + ".csv"), {row});
        manifest.add_artifact("loss_" + slug + ".csv");
        manifest.add_artifact("metrics_" + slug + ".csv");
    });
    manifest.write();
    return row;
}

void run_gen_data(const BenchConfig& cfg, const fs::path& out_dir, const std::string& config_path) {
    Manifest manifest("gen-data", out_dir);
    manifest.set("config_path", config_path);
    manifest.set("seed", cfg.seed);
    manifest.stage("generate", [&] {
        const auto g = data::generate_synthetic(cfg.generator, cfg.seed);
        data::write_csv(out_dir / "quotes.csv", g.quotes);
        std::string text = "date,spot,log_return\n";
        for (std::size_t i = 0; i < g.underlying.dates.size(); ++i)
            text += data::format_date(g.underlying.dates[i]) + "," + format_double(g.underlying.spot[i]) + "," +
                    format_double(g.underlying.returns[i]) + "\n";
        write_text(out_dir / "underlying.csv", text);
        manifest.set("quotes", g.quotes.size());
        manifest.set("contracts", g.contracts);
    });
    manifest.add_artifact("quotes.csv");
    manifest.add_artifact("underlying.csv");
    manifest.write();
}

vol::GarchFit run_fit_garch(const BenchConfig& cfg, const std::optional<fs::path>& input, const fs::path& out_dir,
                            const std::string& config_path) {
    Manifest manifest("fit-garch", out_dir);
    manifest.set("config_path", config_path);
    manifest.set("seed", cfg.seed);
    manifest.set("input", input ? input->generic_string() : std::string("generated underlying"));
    std::vector<data::Date> dates;
    std::vector<double> returns;
    vol::GarchFit fit;
    manifest.stage("load", [&] {
        if (input) {
            std::istringstream in(read_text(*input));
            std::string line;
            if (!std::getline(in, line)) throw ParseError(input->string() + ": empty file");
            std::size_t row = 1;
            double prev = 0.0;
            while (std::getline(in, line)) {
                ++row;
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                const auto c1 = line.find(',');
                if (c1 == std::string::npos) throw ParseError("row " + std::to_string(row) + ": expected date,price");
                const auto c2 = line.find(',', c1 + 1);
                const auto date = data::parse_date(line.substr(0, c1));
                const double price = to_double(line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1), *input);
                if (!(price > 0.0)) throw ParseError("row " + std::to_string(row) + ": price must be positive");
                if (row > 2) {
                    dates.push_back(date);
                    returns.push_back(std::log(price / prev));
                }
                prev = price;
            }
        } else {
            const auto g = data::generate_synthetic(cfg.generator, cfg.seed);
            dates.assign(g.underlying.dates.begin() + 1, g.underlying.dates.end());
            returns.assign(g.underlying.returns.begin() + 1, g.underlying.returns.end());
        }
    });
    manifest.stage("fit", [&] { fit = vol::garch_fit(returns); });
    manifest.stage("write", [&] {
        const auto series = vol::volatility_series(fit.params, dates, returns, cfg.generator.trading_days);
        std::string text = "date,sigma_annual\n";
        for (std::size_t i = 0; i < series.dates.size(); ++i)
            text += data::format_date(series.dates[i]) + "," + format_double(series.sigma[i]) + "\n";
        write_text(out_dir / "volatility.csv", text);
        nlohmann::json j{{"omega", fit.params.omega},
                         {"alpha", fit.params.alpha},
                         {"beta", fit.params.beta},
                         {"log_likelihood", fit.log_likelihood},
                         {"best_grid_log_likelihood", fit.best_grid_log_likelihood},
                         {"iterations", fit.iterations},
                         {"observations", returns.size()}};
        write_text(out_dir / "garch.json", j.dump(2) + "\n");
        manifest.add_artifact("volatility.csv");
        manifest.add_artifact("garch.json");
    });
    manifest.write();
    return fit;
}

std::string format_metrics_table(const std::vector<train::MetricsRow>& rows) {
    std::ostringstream o;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %10s %10s %10s %10s\n", "", "MSE", "RMSE", "MAE", "MAPE");
    o << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-10s %10.5f %10.5f %10.5f %10.5f\n", r.model.c_str(), r.mse, r.rmse, r.mae,
                      r.mape);
        o << buf;
    }
    return o.str();
}

std::vector<train::MetricsRow> read_metrics_csv(const fs::path& path) {
    std::vector<train::MetricsRow> out;
    for (const auto& f : read_csv_rows(path, "model,MSE,RMSE,MAE,MAPE")) {
        if (f.size() != 5) throw ParseError(path.string() + ": expected 5 fields");
        train::MetricsRow r;
        r.model = f[0];
        r.mse = to_double(f[1], path);
        r.rmse = to_double(f[2], path);
        r.mae = to_double(f[3], path);
        r.mape = to_double(f[4], path);
        out.push_back(r);
    }
    return out;
}

std::vector<fs::path> render_plots(const fs::path& dir) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::vector<fs::path> written;
    std::vector<LineSeries> losses;
    for (std::size_t m = 0; m < model_names().size(); ++m) {
        const auto& name = model_names()[m];
        const auto slug = model_slug(name);
        const auto pred_path = dir / ("predictions_" + slug + ".csv");
        if (fs::exists(pred_path)) {
            // Daily means over the contracts quoted that day.
            std::map<std::string, std::pair<double, double>> sums;
            std::map<std::string, std::size_t> counts;
            for (const auto& f : read_csv_rows(pred_path, "date,contract_id,opt_type,actual,predicted")) {
                if (f.size() != 5) throw ParseError(pred_path.string() + ": expected 5 fields");
                auto& s = sums[f[0]];
                s.first += to_double(f[3], pred_path);
                s.second += to_double(f[4], pred_path);
                ++counts[f[0]];
            }
            LineSeries actual{"actual", "#333333", {}}, predicted{"predicted", palette[m], {}};
            for (const auto& [date, s] : sums) {
                actual.y.push_back(s.first / static_cast<double>(counts[date]));
                predicted.y.push_back(s.second / static_cast<double>(counts[date]));
            }
            const auto out = dir / ("predictions_" + slug + ".svg");
            write_text(out, line_plot_svg(name + ": predicted vs actual (daily mean)", "test day", "option price",
                                          {actual, predicted}));
            written.push_back(out);
        }
        const auto loss_path = dir / ("loss_" + slug + ".csv");
        if (fs::exists(loss_path)) {
            LineSeries s{name, palette[m], {}};
            for (const auto& f : read_csv_rows(loss_path, "epoch,loss")) {
                if (f.size() != 2) throw ParseError(loss_path.string() + ": expected 2 fields");
                s.y.push_back(to_double(f[1], loss_path));
            }
            losses.push_back(std::move(s));
        }
    }
    if (!losses.empty()) {
        const auto out = dir / "loss_curves.svg";
        write_text(out, line_plot_svg("Training loss (normalized MSE)", "epoch", "loss", losses));
        written.push_back(out);
    }
    return written;
}

}  // namespace okan::app
