#include "okan/train.hpp"

#include <cmath>
#include <numeric>

#include "okan/checkpoint.hpp"
#include "okan/errors.hpp"
#include "okan/rng.hpp"

namespace okan::train {

void TrainConfig::validate() const {
    if (batch_size < 1) throw DomainError("train: batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw DomainError("train: learning_rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw DomainError("train: Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw DomainError("train: adam_eps must be positive");
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw ShapeError("mse_loss: shape mismatch " + shape_to_string(pred.shape()) + " vs " +
                         shape_to_string(target.shape()));
    const auto diff = sub(pred, target);
    return mean(mul(diff, diff));
}

Adam::Adam(std::vector<Tensor> params, double learning_rate, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& p = params_[k];
        if (!p.has_grad()) continue;
        const auto g = p.grad();
        auto w = p.mutable_data();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

std::pair<Tensor, Tensor> Dataset::batch(std::span<const std::size_t> indices) const {
    const std::size_t per = sample_numel();
    std::vector<double> x;
    x.reserve(indices.size() * per);
    std::vector<double> y;
    y.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= size()) throw ContractError("Dataset::batch: index out of range");
        x.insert(x.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * per),
                 inputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
        y.push_back(targets[i]);
    }
    Shape shape{indices.size()};
    shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
    return {Tensor::from_data(std::move(shape), std::move(x)), Tensor::from_data({indices.size(), 1}, std::move(y))};
}

Dataset to_dataset(const data::WindowedSet& set) {
    return {Shape{1, set.window, data::kFeatureCount}, set.inputs, set.labels};
}

TrainResult train(const ForwardFn& forward, const std::vector<Tensor>& params, const Dataset& dataset,
                  const TrainConfig& config) {
    config.validate();
    if (dataset.size() == 0) throw DomainError("train: empty dataset");
    Adam opt(params, config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
    Rng rng(config.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            auto [x, y] = dataset.batch(std::span<const std::size_t>(order.data() + start, len));
            opt.zero_grad();
            const auto loss = mse_loss(forward(x), y);
            const double value = loss.item();
            if (!std::isfinite(value))
                throw DivergenceError(epoch, "train: non-finite loss at epoch " + std::to_string(epoch));
            loss.backward();
            opt.step();
            total += value;
            ++batches;
        }
        result.epoch_loss.push_back(total / static_cast<double>(batches));
    }
    result.steps = opt.steps();
    return result;
}

TrainResult train(nn::Model& model, const Dataset& dataset, const TrainConfig& config,
                  const std::optional<std::filesystem::path>& checkpoint) {
    auto result = train([&model](const Tensor& x) { return model.forward(x); }, model.parameters(), dataset,
                        config);
    if (checkpoint) nn::save_checkpoint(model, *checkpoint);
    return result;
}

std::vector<double> predict(const ForwardFn& forward, const Dataset& dataset, std::size_t chunk) {
    NoGradGuard guard;
    std::vector<double> out;
    out.reserve(dataset.size());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < dataset.size(); start += chunk) {
        const std::size_t len = std::min(chunk, dataset.size() - start);
        idx.resize(len);
        std::iota(idx.begin(), idx.end(), start);
        const auto y = forward(dataset.batch(idx).first);
        out.insert(out.end(), y.data().begin(), y.data().end());
    }
    return out;
}

std::vector<double> predict(const nn::Model& model, const Dataset& dataset, std::size_t chunk) {
    return predict([&model](const Tensor& x) { return model.forward(x); }, dataset, chunk);
}

MetricsRow evaluate(std::span<const double> predictions, std::span<const double> targets, std::string model) {
    if (predictions.size() != targets.size()) throw ShapeError("evaluate: length mismatch");
    if (targets.empty()) throw DomainError("evaluate: empty input");
    MetricsRow row;
    row.model = std::move(model);
    row.n = targets.size();
    double se = 0.0, ae = 0.0, pe = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double e = targets[i] - predictions[i];
        se += e * e;
        ae += std::abs(e);
        if (std::abs(targets[i]) < kMapeGuard) {
            ++row.guarded;
            continue;
        }
        pe += std::abs(e / targets[i]);
        ++counted;
    }
    if (counted == 0) throw DegenerateInputError("evaluate: every target is below the MAPE guard");
    const double n = static_cast<double>(row.n);
    row.mse = se / n;
    row.rmse = std::sqrt(row.mse);
    row.mae = ae / n;
    row.mape = pe / static_cast<double>(counted);
    return row;
}

}  // namespace okan::train
