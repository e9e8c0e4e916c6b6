#pragma once

#include <cstddef>
#include <vector>

#include "okan/kan.hpp"
#include "okan/model.hpp"

namespace okan::nn {

/// One KAN convolution filter: a learnable edge function per (channel, tap).
///
/// Tensors hold the edges for all C input channels and W taps:
/// spline_coeffs [C x W x (G+k)], w_spline and w_silu [C x W].
struct KanConvKernel1d {
    Tensor spline_coeffs;
    Tensor w_spline;
    Tensor w_silu;
    std::size_t stride = 1;

    std::size_t channels() const { return w_spline.size(0); }
    std::size_t width() const { return w_spline.size(1); }
};

/// out[j] = sum_c sum_k phi_{c,k}(input[c, j*stride + k]); input [C x L] -> [L'].
Tensor kan_conv1d(const SplineBasis& basis, const Tensor& input, const KanConvKernel1d& kernel);

/// Fused bank of F filters.
///
/// input [B x C x L], coeffs [F x C x W x (G+k)], w_spline/w_silu [F x C x W]
/// -> [B x F x L'], valid padding.
Tensor kan_conv1d_bank(const SplineBasis& basis, const Tensor& input, const Tensor& coeffs,
                       const Tensor& w_spline, const Tensor& w_silu, std::size_t stride);

/// F KAN filters over C input channels.
class KanConvBank {
public:
    KanConvBank(std::size_t in_channels, std::size_t filters, std::size_t width, std::size_t stride,
                const SplineBasis& basis, Rng& rng, double init_sd = 0.1);

    /// [B x C x L] -> [B x F x L']
    Tensor forward(const Tensor& input) const;
    std::size_t output_length(std::size_t input_length) const;

    /// Detached copy of filter f.
    KanConvKernel1d kernel(std::size_t filter) const;

    std::size_t in_channels() const { return in_channels_; }
    std::size_t filters() const { return filters_; }
    std::size_t width() const { return width_; }
    std::size_t stride() const { return stride_; }
    Tensor& spline_coeffs() { return coeffs_; }
    Tensor& w_spline() { return w_spline_; }
    Tensor& w_silu() { return w_silu_; }
    const Tensor& spline_coeffs() const { return coeffs_; }
    const Tensor& w_spline() const { return w_spline_; }
    const Tensor& w_silu() const { return w_silu_; }

private:
    std::size_t in_channels_;
    std::size_t filters_;
    std::size_t width_;
    std::size_t stride_;
    SplineBasis basis_;
    Tensor coeffs_;
    Tensor w_spline_;
    Tensor w_silu_;
};

struct ConvKanConfig {
    std::size_t channels = 1;  ///< C
    std::size_t window = 5;    ///< N
    std::size_t features = 9;  ///< D
    /// Filters per bank; each bank's input channels are the previous bank's filters.
    std::vector<std::size_t> filters{4};
    std::size_t kernel_width = 3;
    std::size_t stride = 1;
    std::vector<std::size_t> head_hidden{16};
    SplineBasis basis{};
};

/// KAN convolution banks followed by a conventional affine + SiLU head.
///
/// The C x N window rows enter the first bank as C*N input channels and the
/// convolution slides along the D feature axis, i.e. a full-height 2-D KAN
/// kernel restricted to valid positions in one direction.
class ConvKanModel : public Model {
public:
    ConvKanModel(const ConvKanConfig& config, std::uint64_t seed);

    std::string name() const override { return "Conv-KANs"; }
    Tensor forward(const Tensor& batch) const override;
    std::vector<NamedTensor> named_parameters() const override;
    nlohmann::json describe() const override;

    std::vector<KanConvBank>& banks() { return banks_; }
    std::vector<Dense>& head() { return head_; }
    const std::vector<KanConvBank>& banks() const { return banks_; }
    const std::vector<Dense>& head() const { return head_; }

private:
    ConvKanConfig config_;
    std::vector<KanConvBank> banks_;
    std::vector<Dense> head_;
};

Tensor conv_kan_forward(const ConvKanModel& model, const Tensor& batch);

}  // namespace okan::nn
