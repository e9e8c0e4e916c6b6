#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "okan/model.hpp"
#include "okan/rng.hpp"
#include "okan/tensor.hpp"

namespace okan::nn {

/// Degree-k B-spline basis on a uniform grid of G intervals over [lo, hi].
///
/// The knot vector is extended by k knots on each side, giving G + k basis
/// functions that sum to one everywhere on [lo, hi]. Inputs outside the range
/// are clamped to it; the derivative reported there is zero.
class SplineBasis {
public:
    static constexpr std::size_t kMaxDegree = 7;

    SplineBasis(std::size_t intervals = 5, std::size_t degree = 3, double lo = -1.5, double hi = 1.5);

    std::size_t intervals() const noexcept { return intervals_; }
    std::size_t degree() const noexcept { return degree_; }
    /// Number of basis functions, G + k.
    std::size_t size() const noexcept { return intervals_ + degree_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double spacing() const noexcept { return step_; }
    std::span<const double> knots() const noexcept { return knots_; }

    /// The k + 1 basis functions that can be nonzero at x, starting at index `first`.
    struct Local {
        std::size_t first = 0;
        std::array<double, kMaxDegree + 1> values{};
        /// d/dx of each value; zero when x was clamped.
        std::array<double, kMaxDegree + 1> derivs{};
    };

    Local evaluate(double x) const;

    bool operator==(const SplineBasis& other) const {
        return intervals_ == other.intervals_ && degree_ == other.degree_ && lo_ == other.lo_ &&
               hi_ == other.hi_;
    }

private:
    std::size_t intervals_;
    std::size_t degree_;
    double lo_;
    double hi_;
    double step_;
    std::vector<double> knots_;
};

/// sum_i coeffs[i] B_i(clamp(x)).
double spline_eval(const SplineBasis& basis, std::span<const double> coeffs, double x);

/// Differentiable spline applied elementwise to x; coeffs has shape [G + k].
Tensor spline(const SplineBasis& basis, const Tensor& x, const Tensor& coeffs);

/// One learnable edge function phi(x) = w_spline * spline(x) + w_silu * silu(x).
struct KanEdge {
    Tensor spline_coeffs;  ///< [G + k]
    Tensor w_spline;       ///< scalar
    Tensor w_silu;         ///< scalar
};

/// Applies the edge elementwise to any-shaped x.
Tensor edge_forward(const SplineBasis& basis, const KanEdge& edge, const Tensor& x);

/// Scalar evaluation of an edge from plain values; handy for reference loops.
double edge_value(const SplineBasis& basis, std::span<const double> coeffs, double w_spline,
                  double w_silu, double x);

/// Fused KAN layer op.
///
/// x [B x n_in], coeffs [n_out x n_in x (G+k)], w_spline and w_silu [n_out x n_in].
/// out[b, i] = sum_p w_spline[i,p] spline_{i,p}(x[b,p]) + w_silu[i,p] silu(x[b,p]).
Tensor kan_linear(const SplineBasis& basis, const Tensor& x, const Tensor& coeffs, const Tensor& w_spline,
                  const Tensor& w_silu);

/// Dense n_out x n_in grid of edge functions.
class KanLayer {
public:
    /// Coefficients ~ N(0, init_sd^2), w_spline = 1/sqrt(n_in), w_silu ~ U(+-1/sqrt(n_in)).
    KanLayer(std::size_t n_in, std::size_t n_out, const SplineBasis& basis, Rng& rng, double init_sd = 0.1);

    std::size_t in_features() const noexcept { return n_in_; }
    std::size_t out_features() const noexcept { return n_out_; }
    const SplineBasis& basis() const noexcept { return basis_; }

    /// x [n_in] or [B x n_in].
    Tensor forward(const Tensor& x) const;

    /// Detached copy of edge (out, in).
    KanEdge edge(std::size_t out, std::size_t in) const;

    Tensor& spline_coeffs() { return coeffs_; }
    Tensor& w_spline() { return w_spline_; }
    Tensor& w_silu() { return w_silu_; }
    const Tensor& spline_coeffs() const { return coeffs_; }
    const Tensor& w_spline() const { return w_spline_; }
    const Tensor& w_silu() const { return w_silu_; }

    std::vector<Tensor> parameters() const { return {coeffs_, w_spline_, w_silu_}; }

private:
    std::size_t n_in_;
    std::size_t n_out_;
    SplineBasis basis_;
    Tensor coeffs_;
    Tensor w_spline_;
    Tensor w_silu_;
};

Tensor layer_forward(const KanLayer& layer, const Tensor& x);

/// Stack of KAN layers with widths [n_0, ..., n_L].
class KanNetwork {
public:
    KanNetwork(const std::vector<std::size_t>& widths, const SplineBasis& basis, Rng& rng, double init_sd = 0.1);

    const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    std::vector<KanLayer>& layers() { return layers_; }
    const std::vector<KanLayer>& layers() const { return layers_; }

    /// x [..., n_0] -> [..., n_L]; leading axes are flattened into a batch.
    Tensor forward(const Tensor& x) const;

    std::vector<Tensor> parameters() const;

private:
    std::vector<std::size_t> widths_;
    std::vector<KanLayer> layers_;
};

Tensor network_forward(const KanNetwork& net, const Tensor& x);

struct KanModelConfig {
    std::size_t window = 5;
    std::size_t features = 9;
    std::vector<std::size_t> hidden{8};
    SplineBasis basis{};
};

/// KAN price model: flattens each [C x N x D] window into one input vector.
class KanModel : public Model {
public:
    KanModel(const KanModelConfig& config, std::uint64_t seed);

    std::string name() const override { return "KANs"; }
    Tensor forward(const Tensor& batch) const override;
    std::vector<NamedTensor> named_parameters() const override;
    nlohmann::json describe() const override;

    const KanNetwork& network() const { return net_; }

private:
    KanModelConfig config_;
    KanNetwork net_;
};

}  // namespace okan::nn
