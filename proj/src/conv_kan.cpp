#include "okan/conv_kan.hpp"

#include <cmath>
#include <string>

#include "okan/errors.hpp"

namespace okan::nn {

namespace {

struct SiluLocal {
    double value;
    double deriv;
};

SiluLocal silu_local(double x) {
    const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return {x * s, s * (1.0 + x * (1.0 - s))};
}

struct InputLocal {
    SplineBasis::Local spline;
    SiluLocal silu;
};

}  // namespace

Tensor kan_conv1d_bank(const SplineBasis& basis, const Tensor& input, const Tensor& coeffs,
                       const Tensor& w_spline, const Tensor& w_silu, std::size_t stride) {
    if (input.dim() != 3) throw ShapeError("kan_conv1d: input must be [B x C x L], got " + shape_to_string(input.shape()));
    if (coeffs.dim() != 4 || w_spline.dim() != 3)
        throw ShapeError("kan_conv1d: kernel tensors must be [F x C x W x nb] and [F x C x W]");
    if (stride < 1) throw ShapeError("kan_conv1d: stride must be >= 1");
    const std::size_t B = input.size(0), C = input.size(1), L = input.size(2);
    const std::size_t F = coeffs.size(0), W = coeffs.size(2), nb = basis.size();
    if (coeffs.size(1) != C || coeffs.size(3) != nb)
        throw ShapeError("kan_conv1d: kernel " + shape_to_string(coeffs.shape()) + " does not match input " +
                         shape_to_string(input.shape()));
    const Shape wshape{F, C, W};
    if (w_spline.shape() != wshape || w_silu.shape() != wshape)
        throw ShapeError("kan_conv1d: edge weights must be " + shape_to_string(wshape));
    if (W < 1) throw ShapeError("kan_conv1d: kernel width must be >= 1");
    if (W > L)
        throw ShapeError("kan_conv1d: kernel width " + std::to_string(W) + " exceeds input length " + std::to_string(L));
    const std::size_t Lout = (L - W) / stride + 1;
    const std::size_t k = basis.degree();

    auto locals_for = [basis, input]() {
        auto dx = input.data();
        std::vector<InputLocal> locals(dx.size());
        for (std::size_t i = 0; i < dx.size(); ++i) locals[i] = {basis.evaluate(dx[i]), silu_local(dx[i])};
        return locals;
    };

    const auto locals = locals_for();
    auto dc = coeffs.data();
    auto dws = w_spline.data();
    auto dwu = w_silu.data();
    std::vector<double> out(B * F * Lout, 0.0);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t tap = 0; tap < W; ++tap) {
                    const std::size_t e = (f * C + c) * W + tap;
                    const double* ce = dc.data() + e * nb;
                    for (std::size_t j = 0; j < Lout; ++j) {
                        const auto& loc = locals[(b * C + c) * L + j * stride + tap];
                        double sp = 0.0;
                        for (std::size_t r = 0; r <= k; ++r) sp += ce[loc.spline.first + r] * loc.spline.values[r];
                        out[(b * F + f) * Lout + j] += dws[e] * sp + dwu[e] * loc.silu.value;
                    }
                }

    return make_op_result(
        {B, F, Lout}, std::move(out), {input, coeffs, w_spline, w_silu},
        [locals_for, input, coeffs, w_spline, w_silu, B, C, L, F, W, nb, k, Lout, stride](std::span<const double> g) {
            const auto locals = locals_for();
            auto dc = coeffs.data();
            auto dws = w_spline.data();
            auto dwu = w_silu.data();
            std::span<double> gx, gc, gws, gwu;
            if (input.requires_grad()) gx = input.grad_accumulator();
            if (coeffs.requires_grad()) gc = coeffs.grad_accumulator();
            if (w_spline.requires_grad()) gws = w_spline.grad_accumulator();
            if (w_silu.requires_grad()) gwu = w_silu.grad_accumulator();
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t f = 0; f < F; ++f)
                    for (std::size_t c = 0; c < C; ++c)
                        for (std::size_t tap = 0; tap < W; ++tap) {
                            const std::size_t e = (f * C + c) * W + tap;
                            const double* ce = dc.data() + e * nb;
                            for (std::size_t j = 0; j < Lout; ++j) {
                                const double gj = g[(b * F + f) * Lout + j];
                                const std::size_t xi = (b * C + c) * L + j * stride + tap;
                                const auto& loc = locals[xi];
                                double sp = 0.0, dsp = 0.0;
                                for (std::size_t r = 0; r <= k; ++r) {
                                    sp += ce[loc.spline.first + r] * loc.spline.values[r];
                                    dsp += ce[loc.spline.first + r] * loc.spline.derivs[r];
                                }
                                if (!gws.empty()) gws[e] += gj * sp;
                                if (!gwu.empty()) gwu[e] += gj * loc.silu.value;
                                if (!gc.empty())
                                    for (std::size_t r = 0; r <= k; ++r)
                                        gc[e * nb + loc.spline.first + r] += gj * dws[e] * loc.spline.values[r];
                                if (!gx.empty()) gx[xi] += gj * (dws[e] * dsp + dwu[e] * loc.silu.deriv);
                            }
                        }
        });
}

Tensor kan_conv1d(const SplineBasis& basis, const Tensor& input, const KanConvKernel1d& kernel) {
    if (input.dim() != 2) throw ShapeError("kan_conv1d: input must be [C x L], got " + shape_to_string(input.shape()));
    const std::size_t C = kernel.channels(), W = kernel.width(), nb = basis.size();
    if (kernel.spline_coeffs.shape() != Shape{C, W, nb} || kernel.w_silu.shape() != Shape{C, W})
        throw ShapeError("kan_conv1d: inconsistent kernel tensors");
    Tensor out = kan_conv1d_bank(basis, reshape(input, {1, input.size(0), input.size(1)}),
                                 reshape(kernel.spline_coeffs, {1, C, W, nb}), reshape(kernel.w_spline, {1, C, W}),
                                 reshape(kernel.w_silu, {1, C, W}), kernel.stride);
    return reshape(out, {out.size(2)});
}

KanConvBank::KanConvBank(std::size_t in_channels, std::size_t filters, std::size_t width, std::size_t stride,
                         const SplineBasis& basis, Rng& rng, double init_sd)
    : in_channels_(in_channels), filters_(filters), width_(width), stride_(stride), basis_(basis) {
    if (in_channels < 1 || filters < 1 || width < 1 || stride < 1)
        throw ShapeError("KanConvBank: channels, filters, width and stride must be >= 1");
    std::vector<double> c(filters * in_channels * width * basis.size());
    for (auto& v : c) v = rng.normal(0.0, init_sd);
    coeffs_ = Tensor::from_data({filters, in_channels, width, basis.size()}, std::move(c), true);
    w_spline_ = Tensor::full({filters, in_channels, width}, 1.0, true);
    w_silu_ = Tensor::full({filters, in_channels, width}, 1.0, true);
}

Tensor KanConvBank::forward(const Tensor& input) const {
    return kan_conv1d_bank(basis_, input, coeffs_, w_spline_, w_silu_, stride_);
}

std::size_t KanConvBank::output_length(std::size_t input_length) const {
    if (width_ > input_length)
        throw ShapeError("KanConvBank: kernel width " + std::to_string(width_) + " exceeds length " +
                         std::to_string(input_length));
    return (input_length - width_) / stride_ + 1;
}

KanConvKernel1d KanConvBank::kernel(std::size_t filter) const {
    if (filter >= filters_) throw ShapeError("KanConvBank::kernel: filter index out of range");
    const std::size_t per = in_channels_ * width_;
    const std::size_t nb = basis_.size();
    auto c = coeffs_.data().subspan(filter * per * nb, per * nb);
    auto ws = w_spline_.data().subspan(filter * per, per);
    auto wu = w_silu_.data().subspan(filter * per, per);
    return {Tensor::from_data({in_channels_, width_, nb}, {c.begin(), c.end()}),
            Tensor::from_data({in_channels_, width_}, {ws.begin(), ws.end()}),
            Tensor::from_data({in_channels_, width_}, {wu.begin(), wu.end()}), stride_};
}

ConvKanModel::ConvKanModel(const ConvKanConfig& config, std::uint64_t seed) : config_(config) {
    if (config.filters.empty()) throw ShapeError("ConvKanModel: need at least one convolution bank");
    Rng rng(seed);
    std::size_t channels = config.channels * config.window;
    std::size_t length = config.features;
    for (std::size_t f : config.filters) {
        banks_.emplace_back(channels, f, config.kernel_width, config.stride, config.basis, rng);
        length = banks_.back().output_length(length);
        channels = f;
    }
    std::size_t width = channels * length;
    for (std::size_t h : config.head_hidden) {
        head_.emplace_back(width, h, rng);
        width = h;
    }
    head_.emplace_back(width, 1, rng);
}

Tensor ConvKanModel::forward(const Tensor& batch) const {
    if (batch.dim() != 4 || batch.size(1) != config_.channels || batch.size(2) != config_.window ||
        batch.size(3) != config_.features)
        throw ShapeError("ConvKanModel: expected [B x " + std::to_string(config_.channels) + " x " +
                         std::to_string(config_.window) + " x " + std::to_string(config_.features) + "], got " +
                         shape_to_string(batch.shape()));
    const std::size_t b = batch.size(0);
    Tensor h = reshape(batch, {b, config_.channels * config_.window, config_.features});
    for (const auto& bank : banks_) h = bank.forward(h);
    h = reshape(h, {b, h.size(1) * h.size(2)});
    for (std::size_t i = 0; i + 1 < head_.size(); ++i) h = silu(head_[i].forward(h));
    return head_.back().forward(h);
}

std::vector<NamedTensor> ConvKanModel::named_parameters() const {
    std::vector<NamedTensor> out;
    for (std::size_t i = 0; i < banks_.size(); ++i) {
        const std::string p = "conv." + std::to_string(i) + ".";
        out.push_back({p + "spline_coeffs", banks_[i].spline_coeffs()});
        out.push_back({p + "w_spline", banks_[i].w_spline()});
        out.push_back({p + "w_silu", banks_[i].w_silu()});
    }
    for (std::size_t i = 0; i < head_.size(); ++i) {
        const std::string p = "head." + std::to_string(i) + ".";
        out.push_back({p + "weight", head_[i].weight()});
        out.push_back({p + "bias", head_[i].bias()});
    }
    return out;
}

nlohmann::json ConvKanModel::describe() const {
    return {{"type", "conv_kan"},
            {"input_channels", config_.channels * config_.window},
            {"filters", config_.filters},
            {"kernel_width", config_.kernel_width},
            {"stride", config_.stride},
            {"padding", "valid"},
            {"head_hidden", config_.head_hidden},
            {"head_activation", "silu"},
            {"grid_intervals", config_.basis.intervals()},
            {"spline_degree", config_.basis.degree()},
            {"grid_range", {config_.basis.lo(), config_.basis.hi()}}};
}

Tensor conv_kan_forward(const ConvKanModel& model, const Tensor& batch) { return model.forward(batch); }

}  // namespace okan::nn
