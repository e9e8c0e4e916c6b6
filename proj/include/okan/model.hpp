#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "okan/rng.hpp"
#include "okan/tensor.hpp"

namespace okan::nn {

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

/// Common surface of the trainable price models.
///
/// Every model maps a batch of windows [B x C x N x D] (equivalently
/// [B x T x C x D] for the recurrent models, with C = 1) to [B x 1].
class Model {
public:
    virtual ~Model() = default;

    virtual std::string name() const = 0;
    virtual Tensor forward(const Tensor& batch) const = 0;
    virtual std::vector<NamedTensor> named_parameters() const = 0;
    /// Architecture hyperparameters, echoed into reports and checkpoints.
    virtual nlohmann::json describe() const = 0;

    std::vector<Tensor> parameters() const;
    std::size_t parameter_count() const;
};

/// Affine layer y = x W + b with W [in x out].
class Dense {
public:
    /// Weights ~ U(-bound, bound) with bound = 1/sqrt(in), bias zero.
    Dense(std::size_t in, std::size_t out, Rng& rng);
    /// Weights ~ U(-bound, bound), bias ~ U(-bound, bound).
    Dense(std::size_t in, std::size_t out, Rng& rng, double bound);

    Tensor forward(const Tensor& x) const;  // [B x in] -> [B x out]

    std::size_t in_features() const { return weight_.size(0); }
    std::size_t out_features() const { return weight_.size(1); }
    Tensor& weight() { return weight_; }
    Tensor& bias() { return bias_; }
    const Tensor& weight() const { return weight_; }
    const Tensor& bias() const { return bias_; }

private:
    Tensor weight_;
    Tensor bias_;
};

}  // namespace okan::nn
