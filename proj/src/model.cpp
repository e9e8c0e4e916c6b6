#include "okan/model.hpp"

#include <cmath>

#include "okan/errors.hpp"

namespace okan::nn {

std::vector<Tensor> Model::parameters() const {
    std::vector<Tensor> out;
    for (auto& p : named_parameters()) out.push_back(p.tensor);
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (auto& p : named_parameters()) n += p.tensor.numel();
    return n;
}

Dense::Dense(std::size_t in, std::size_t out, Rng& rng) {
    if (in < 1 || out < 1) throw ShapeError("Dense: widths must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::vector<double> w(in * out);
    for (auto& v : w) v = rng.uniform(-bound, bound);
    weight_ = Tensor::from_data({in, out}, std::move(w), true);
    bias_ = Tensor::zeros({out}, true);
}

Dense::Dense(std::size_t in, std::size_t out, Rng& rng, double bound) {
    if (in < 1 || out < 1) throw ShapeError("Dense: widths must be >= 1");
    std::vector<double> w(in * out);
    for (auto& v : w) v = rng.uniform(-bound, bound);
    std::vector<double> b(out);
    for (auto& v : b) v = rng.uniform(-bound, bound);
    weight_ = Tensor::from_data({in, out}, std::move(w), true);
    bias_ = Tensor::from_data({out}, std::move(b), true);
}

Tensor Dense::forward(const Tensor& x) const { return add_row(matmul(x, weight_), bias_); }

}  // namespace okan::nn
