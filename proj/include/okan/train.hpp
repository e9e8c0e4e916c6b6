#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "okan/data.hpp"
#include "okan/model.hpp"
#include "okan/tensor.hpp"

namespace okan::train {

struct TrainConfig {
    std::size_t batch_size = 32;
    double learning_rate = 1e-5;
    std::size_t epochs = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// (1/N) sum (pred - target)^2; shapes must match.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

/// Bias-corrected Adam over a fixed parameter list.
class Adam {
public:
    Adam(std::vector<Tensor> params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    /// Applies one update from the accumulated grads.
    void step();
    void zero_grad();
    std::size_t steps() const { return t_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
};

/// Samples stored contiguously: inputs is size() x prod(sample_shape).
struct Dataset {
    Shape sample_shape;
    std::vector<double> inputs;
    std::vector<double> targets;

    std::size_t size() const { return targets.size(); }
    std::size_t sample_numel() const { return shape_numel(sample_shape); }
    /// Rows `indices` stacked into [B x sample_shape...] and targets [B x 1].
    std::pair<Tensor, Tensor> batch(std::span<const std::size_t> indices) const;
};

/// Window set as samples of shape [1 x N x 9].
Dataset to_dataset(const data::WindowedSet& set);

using ForwardFn = std::function<Tensor(const Tensor& batch)>;

struct TrainResult {
    std::vector<double> epoch_loss;  ///< mean mini-batch loss per epoch
    std::size_t steps = 0;
};

/// Seeded shuffled mini-batch Adam. Throws DivergenceError on a non-finite loss.
TrainResult train(const ForwardFn& forward, const std::vector<Tensor>& params, const Dataset& dataset,
                  const TrainConfig& config);

/// As above; saves a checkpoint of `model` when `checkpoint` is set.
TrainResult train(nn::Model& model, const Dataset& dataset, const TrainConfig& config,
                  const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

/// Forward pass without graph recording, in chunks.
std::vector<double> predict(const ForwardFn& forward, const Dataset& dataset, std::size_t chunk = 256);
std::vector<double> predict(const nn::Model& model, const Dataset& dataset, std::size_t chunk = 256);

inline constexpr double kMapeGuard = 1e-8;

struct MetricsRow {
    std::string model;
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    double mape = 0.0;
    std::size_t n = 0;
    /// Rows left out of MAPE because |target| < kMapeGuard.
    std::size_t guarded = 0;
};

MetricsRow evaluate(std::span<const double> predictions, std::span<const double> targets,
                    std::string model = {});

}  // namespace okan::train
