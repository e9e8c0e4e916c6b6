#include "okan/kan.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "okan/errors.hpp"

namespace okan::nn {

namespace {

double sigmoid_scalar(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct SiluLocal {
    double value;
    double deriv;
};

SiluLocal silu_local(double x) {
    const double s = sigmoid_scalar(x);
    return {x * s, s * (1.0 + x * (1.0 - s))};
}

}  // namespace

SplineBasis::SplineBasis(std::size_t intervals, std::size_t degree, double lo, double hi)
    : intervals_(intervals), degree_(degree), lo_(lo), hi_(hi) {
    if (intervals_ < 1) throw DomainError("SplineBasis: need at least one interval");
    if (degree_ > kMaxDegree) throw DomainError("SplineBasis: degree above " + std::to_string(kMaxDegree));
    if (!(hi_ > lo_) || !std::isfinite(lo_) || !std::isfinite(hi_))
        throw DomainError("SplineBasis: range must be finite with lo < hi");
    step_ = (hi_ - lo_) / static_cast<double>(intervals_);
    const std::size_t n_knots = intervals_ + 2 * degree_ + 1;
    knots_.resize(n_knots);
    for (std::size_t j = 0; j < n_knots; ++j)
        knots_[j] = lo_ + (static_cast<double>(j) - static_cast<double>(degree_)) * step_;
    knots_[degree_] = lo_;
    knots_[degree_ + intervals_] = hi_;
}

SplineBasis::Local SplineBasis::evaluate(double x) const {
    Local out;
    const bool clamped = x < lo_ || x > hi_;
    const double xc = std::clamp(x, lo_, hi_);
    const std::size_t k = degree_;
    const auto cell = std::min(static_cast<std::size_t>(std::max(0.0, std::floor((xc - lo_) / step_))),
                               intervals_ - 1);
    const std::size_t span = cell + k;
    out.first = cell;

    // Cox-de Boor triangle restricted to the nonzero functions on this span.
    std::array<double, kMaxDegree + 1> n{};
    std::array<double, kMaxDegree + 1> lower{};
    std::array<double, kMaxDegree + 2> left{};
    std::array<double, kMaxDegree + 2> right{};
    n[0] = 1.0;
    if (k == 1) lower[0] = 1.0;
    for (std::size_t j = 1; j <= k; ++j) {
        left[j] = xc - knots_[span + 1 - j];
        right[j] = knots_[span + j] - xc;
        double saved = 0.0;
        for (std::size_t r = 0; r < j; ++r) {
            const double temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
        if (j + 1 == k) lower = n;
    }
    out.values = n;

    if (!clamped && k >= 1) {
        // d/dx B_{i,k} = (B_{i,k-1} - B_{i+1,k-1}) / h on a uniform grid.
        for (std::size_t r = 0; r <= k; ++r) {
            const double from_left = r >= 1 ? lower[r - 1] : 0.0;
            const double from_right = r + 1 <= k ? lower[r] : 0.0;
            out.derivs[r] = (from_left - from_right) / step_;
        }
    }
    return out;
}

double spline_eval(const SplineBasis& basis, std::span<const double> coeffs, double x) {
    if (coeffs.size() != basis.size())
        throw ShapeError("spline_eval: expected " + std::to_string(basis.size()) + " coefficients, got " +
                         std::to_string(coeffs.size()));
    const auto loc = basis.evaluate(x);
    double acc = 0.0;
    for (std::size_t r = 0; r <= basis.degree(); ++r) acc += coeffs[loc.first + r] * loc.values[r];
    return acc;
}

Tensor spline(const SplineBasis& basis, const Tensor& x, const Tensor& coeffs) {
    if (coeffs.dim() != 1 || coeffs.size(0) != basis.size())
        throw ShapeError("spline: coefficients must have shape [" + std::to_string(basis.size()) + "], got " +
                         shape_to_string(coeffs.shape()));
    auto dx = x.data();
    auto dc = coeffs.data();
    std::vector<double> out(dx.size());
    for (std::size_t i = 0; i < dx.size(); ++i) out[i] = spline_eval(basis, dc, dx[i]);
    return make_op_result(x.shape(), std::move(out), {x, coeffs}, [basis, x, coeffs](std::span<const double> g) {
        auto dx = x.data();
        auto dc = coeffs.data();
        std::span<double> gx, gc;
        if (x.requires_grad()) gx = x.grad_accumulator();
        if (coeffs.requires_grad()) gc = coeffs.grad_accumulator();
        const std::size_t k = basis.degree();
        for (std::size_t i = 0; i < dx.size(); ++i) {
            const auto loc = basis.evaluate(dx[i]);
            if (!gx.empty()) {
                double d = 0.0;
                for (std::size_t r = 0; r <= k; ++r) d += dc[loc.first + r] * loc.derivs[r];
                gx[i] += g[i] * d;
            }
            if (!gc.empty())
                for (std::size_t r = 0; r <= k; ++r) gc[loc.first + r] += g[i] * loc.values[r];
        }
    });
}

Tensor edge_forward(const SplineBasis& basis, const KanEdge& edge, const Tensor& x) {
    if (edge.w_spline.numel() != 1 || edge.w_silu.numel() != 1)
        throw ShapeError("edge_forward: edge weights must be scalars");
    return add(mul(edge.w_spline, spline(basis, x, edge.spline_coeffs)), mul(edge.w_silu, silu(x)));
}

double edge_value(const SplineBasis& basis, std::span<const double> coeffs, double w_spline, double w_silu,
                  double x) {
    return w_spline * spline_eval(basis, coeffs, x) + w_silu * silu_local(x).value;
}

Tensor kan_linear(const SplineBasis& basis, const Tensor& x, const Tensor& coeffs, const Tensor& w_spline,
                  const Tensor& w_silu) {
    if (x.dim() != 2) throw ShapeError("kan_linear: input must be [B x n_in], got " + shape_to_string(x.shape()));
    const std::size_t batch = x.size(0);
    const std::size_t n_in = x.size(1);
    const std::size_t nb = basis.size();
    if (coeffs.dim() != 3 || coeffs.size(1) != n_in || coeffs.size(2) != nb)
        throw ShapeError("kan_linear: coefficient shape " + shape_to_string(coeffs.shape()) +
                         " does not match input width " + std::to_string(n_in));
    const std::size_t n_out = coeffs.size(0);
    const Shape wshape{n_out, n_in};
    if (w_spline.shape() != wshape || w_silu.shape() != wshape)
        throw ShapeError("kan_linear: edge weights must be " + shape_to_string(wshape));

    const std::size_t k = basis.degree();
    auto dx = x.data();
    auto dc = coeffs.data();
    auto dws = w_spline.data();
    auto dwu = w_silu.data();
    std::vector<double> out(batch * n_out, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t p = 0; p < n_in; ++p) {
            const double xv = dx[b * n_in + p];
            const auto loc = basis.evaluate(xv);
            const double sx = silu_local(xv).value;
            for (std::size_t i = 0; i < n_out; ++i) {
                const double* c = dc.data() + (i * n_in + p) * nb + loc.first;
                double sp = 0.0;
                for (std::size_t r = 0; r <= k; ++r) sp += c[r] * loc.values[r];
                out[b * n_out + i] += dws[i * n_in + p] * sp + dwu[i * n_in + p] * sx;
            }
        }

    return make_op_result(
        {batch, n_out}, std::move(out), {x, coeffs, w_spline, w_silu},
        [basis, x, coeffs, w_spline, w_silu, batch, n_in, n_out, nb, k](std::span<const double> g) {
            auto dx = x.data();
            auto dc = coeffs.data();
            auto dws = w_spline.data();
            auto dwu = w_silu.data();
            std::span<double> gx, gc, gws, gwu;
            if (x.requires_grad()) gx = x.grad_accumulator();
            if (coeffs.requires_grad()) gc = coeffs.grad_accumulator();
            if (w_spline.requires_grad()) gws = w_spline.grad_accumulator();
            if (w_silu.requires_grad()) gwu = w_silu.grad_accumulator();
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t p = 0; p < n_in; ++p) {
                    const double xv = dx[b * n_in + p];
                    const auto loc = basis.evaluate(xv);
                    const auto sl = silu_local(xv);
                    double gxv = 0.0;
                    for (std::size_t i = 0; i < n_out; ++i) {
                        const double gi = g[b * n_out + i];
                        if (gi == 0.0) continue;
                        const std::size_t e = i * n_in + p;
                        const double* c = dc.data() + e * nb + loc.first;
                        double sp = 0.0, dsp = 0.0;
                        for (std::size_t r = 0; r <= k; ++r) {
                            sp += c[r] * loc.values[r];
                            dsp += c[r] * loc.derivs[r];
                        }
                        if (!gws.empty()) gws[e] += gi * sp;
                        if (!gwu.empty()) gwu[e] += gi * sl.value;
                        if (!gc.empty())
                            for (std::size_t r = 0; r <= k; ++r) gc[e * nb + loc.first + r] += gi * dws[e] * loc.values[r];
                        gxv += gi * (dws[e] * dsp + dwu[e] * sl.deriv);
                    }
                    if (!gx.empty()) gx[b * n_in + p] += gxv;
                }
        });
}

KanLayer::KanLayer(std::size_t n_in, std::size_t n_out, const SplineBasis& basis, Rng& rng, double init_sd)
    : n_in_(n_in), n_out_(n_out), basis_(basis) {
    if (n_in < 1 || n_out < 1) throw ShapeError("KanLayer: widths must be >= 1");
    std::vector<double> c(n_out * n_in * basis.size());
    for (auto& v : c) v = rng.normal(0.0, init_sd);
    coeffs_ = Tensor::from_data({n_out, n_in, basis.size()}, std::move(c), true);
    const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
    w_spline_ = Tensor::full({n_out, n_in}, bound, true);
    std::vector<double> u(n_out * n_in);
    for (auto& v : u) v = rng.uniform(-bound, bound);
    w_silu_ = Tensor::from_data({n_out, n_in}, std::move(u), true);
}

Tensor KanLayer::forward(const Tensor& x) const {
    if (x.dim() == 1) {
        if (x.size(0) != n_in_)
            throw ShapeError("KanLayer: input width " + std::to_string(x.size(0)) + " != " + std::to_string(n_in_));
        return reshape(kan_linear(basis_, reshape(x, {1, n_in_}), coeffs_, w_spline_, w_silu_), {n_out_});
    }
    if (x.dim() != 2 || x.size(1) != n_in_)
        throw ShapeError("KanLayer: expected [B x " + std::to_string(n_in_) + "], got " + shape_to_string(x.shape()));
    return kan_linear(basis_, x, coeffs_, w_spline_, w_silu_);
}

KanEdge KanLayer::edge(std::size_t out, std::size_t in) const {
    if (out >= n_out_ || in >= n_in_) throw ShapeError("KanLayer::edge: index out of range");
    const std::size_t nb = basis_.size();
    const std::size_t e = out * n_in_ + in;
    auto c = coeffs_.data().subspan(e * nb, nb);
    return {Tensor::from_data({nb}, {c.begin(), c.end()}), Tensor::scalar(w_spline_.data()[e]),
            Tensor::scalar(w_silu_.data()[e])};
}

Tensor layer_forward(const KanLayer& layer, const Tensor& x) { return layer.forward(x); }

KanNetwork::KanNetwork(const std::vector<std::size_t>& widths, const SplineBasis& basis, Rng& rng, double init_sd)
    : widths_(widths) {
    if (widths_.size() < 2) throw ShapeError("KanNetwork: need at least input and output widths");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l)
        layers_.emplace_back(widths_[l], widths_[l + 1], basis, rng, init_sd);
}

Tensor KanNetwork::forward(const Tensor& x) const {
    const std::size_t n0 = widths_.front();
    if (x.dim() < 1 || x.shape().back() != n0)
        throw ShapeError("KanNetwork: input " + shape_to_string(x.shape()) + " does not end in width " +
                         std::to_string(n0));
    const std::size_t rows = x.numel() / n0;
    Tensor h = reshape(x, {rows, n0});
    for (const auto& layer : layers_) h = layer.forward(h);
    Shape out_shape(x.shape().begin(), x.shape().end() - 1);
    out_shape.push_back(widths_.back());
    return reshape(h, std::move(out_shape));
}

std::vector<Tensor> KanNetwork::parameters() const {
    std::vector<Tensor> params;
    for (const auto& layer : layers_)
        for (auto& t : layer.parameters()) params.push_back(t);
    return params;
}

Tensor network_forward(const KanNetwork& net, const Tensor& x) { return net.forward(x); }

}  // namespace okan::nn

namespace okan::nn {

namespace {

std::vector<std::size_t> kan_widths(const KanModelConfig& c) {
    std::vector<std::size_t> w{c.window * c.features};
    w.insert(w.end(), c.hidden.begin(), c.hidden.end());
    w.push_back(1);
    return w;
}

}  // namespace

KanModel::KanModel(const KanModelConfig& config, std::uint64_t seed)
    : config_(config), net_([&] {
          Rng rng(seed);
          return KanNetwork(kan_widths(config), config.basis, rng);
      }()) {}

Tensor KanModel::forward(const Tensor& batch) const {
    if (batch.dim() != 4 || batch.size(1) * batch.size(2) != config_.window || batch.size(3) != config_.features)
        throw ShapeError("KanModel: expected [B x 1 x " + std::to_string(config_.window) + " x " +
                         std::to_string(config_.features) + "], got " + shape_to_string(batch.shape()));
    const std::size_t b = batch.size(0);
    return net_.forward(reshape(batch, {b, config_.window * config_.features}));
}

std::vector<NamedTensor> KanModel::named_parameters() const {
    std::vector<NamedTensor> out;
    for (std::size_t l = 0; l < net_.layers().size(); ++l) {
        const auto& layer = net_.layers()[l];
        const std::string prefix = "kan." + std::to_string(l) + ".";
        out.push_back({prefix + "spline_coeffs", layer.spline_coeffs()});
        out.push_back({prefix + "w_spline", layer.w_spline()});
        out.push_back({prefix + "w_silu", layer.w_silu()});
    }
    return out;
}

nlohmann::json KanModel::describe() const {
    return {{"type", "kan"},
            {"widths", net_.widths()},
            {"grid_intervals", config_.basis.intervals()},
            {"spline_degree", config_.basis.degree()},
            {"grid_range", {config_.basis.lo(), config_.basis.hi()}}};
}

}  // namespace okan::nn
