// Independent reference implementations used by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "okan/conv_kan.hpp"
#include "okan/kan.hpp"
#include "okan/lstm.hpp"
#include "okan/rng.hpp"
#include "okan/tensor.hpp"

namespace okan::testing {

// ---------------------------------------------------------------------------
// Finite-difference gradient check
// ---------------------------------------------------------------------------

struct GradCheck {
    double max_rel = 0.0;
    double max_abs = 0.0;
    std::string where;
};

/// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps gradients
/// that are zero up to rounding from dominating the ratio.
inline GradCheck gradcheck(const std::function<Tensor()>& f, const std::vector<Tensor>& leaves, double h = 1e-5,
                           double floor = 1e-3) {
    for (auto t : leaves) t.zero_grad();
    f().backward();
    GradCheck out;
    for (std::size_t l = 0; l < leaves.size(); ++l) {
        Tensor t = leaves[l];
        const std::vector<double> analytic(t.grad().begin(), t.grad().end());
        for (std::size_t i = 0; i < t.numel(); ++i) {
            auto data = t.mutable_data();
            const double x0 = data[i];
            double fp = 0.0, fm = 0.0;
            {
                NoGradGuard guard;
                data[i] = x0 + h;
                fp = f().item();
                data[i] = x0 - h;
                fm = f().item();
            }
            data[i] = x0;
            const double numeric = (fp - fm) / (2 * h);
            const double err = std::abs(analytic[i] - numeric);
            const double rel = err / std::max({std::abs(analytic[i]), std::abs(numeric), floor});
            out.max_abs = std::max(out.max_abs, err);
            if (rel > out.max_rel) {
                out.max_rel = rel;
                out.where = "leaf " + std::to_string(l) + " element " + std::to_string(i);
            }
        }
    }
    return out;
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = true) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::from_data(std::move(shape), std::move(v), grad);
}

/// sum(out o R) with a fixed random R, so every output element gets a distinct weight.
inline Tensor weighted_sum(const Tensor& out, std::uint64_t seed = 99) {
    Rng rng(seed);
    return sum(mul(out, random_tensor(out.shape(), rng, -1.0, 1.0, false)));
}

// ---------------------------------------------------------------------------
// Scalar references
// ---------------------------------------------------------------------------

/// Phi(x) = 1/2 + integral_0^x phi, adaptive Simpson.
inline double simpson_cdf(double x) {
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double a, double b, double fa, double fm, double fb, double whole, int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = pdf(lm), frm = pdf(rm);
            const double left = (m - a) / 6 * (fa + 4 * flm + fm);
            const double right = (b - m) / 6 * (fm + 4 * frm + fb);
            if (depth > 40 || std::abs(left + right - whole) < 1e-15)
                return left + right + (left + right - whole) / 15;
            return rec(a, m, fa, flm, fm, left, depth + 1) + rec(m, b, fm, frm, fb, right, depth + 1);
        };
    const double a = 0.0, b = x;
    const double fa = pdf(a), fb = pdf(b), fm = pdf(0.5 * (a + b));
    return 0.5 + rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 0);
}

/// Cox-de Boor recursion, B_{i,k}(x) over an arbitrary knot vector.
inline double cox_de_boor(std::span<const double> t, std::size_t i, std::size_t k, double x) {
    if (k == 0) return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
    double left = 0.0, right = 0.0;
    if (t[i + k] != t[i]) left = (x - t[i]) / (t[i + k] - t[i]) * cox_de_boor(t, i, k - 1, x);
    if (t[i + k + 1] != t[i + 1]) right = (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * cox_de_boor(t, i + 1, k - 1, x);
    return left + right;
}

inline double silu_ref(double x) { return x / (1.0 + std::exp(-x)); }
inline double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// phi(x) = w_b silu(x) + w_s sum_i c_i B_i(x), basis from the recursion.
inline double edge_ref(const nn::SplineBasis& basis, std::span<const double> c, double ws, double wu, double x) {
    const double xc = std::clamp(x, basis.lo(), basis.hi());
    // The last knot interval is half-open; evaluate just inside it at hi.
    const double xe = xc == basis.hi() ? std::nextafter(xc, basis.lo()) : xc;
    double s = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) s += c[i] * cox_de_boor(basis.knots(), i, basis.degree(), xe);
    return wu * silu_ref(x) + ws * s;
}

/// x_{l+1,j} = sum_i phi_{l,j,i}(x_{l,i}), loops over every edge.
inline std::vector<double> kan_layer_ref(const nn::KanLayer& layer, std::span<const double> x) {
    const auto nb = layer.basis().size();
    const auto c = layer.spline_coeffs().data();
    const auto ws = layer.w_spline().data();
    const auto wu = layer.w_silu().data();
    std::vector<double> out(layer.out_features(), 0.0);
    for (std::size_t j = 0; j < layer.out_features(); ++j)
        for (std::size_t i = 0; i < layer.in_features(); ++i) {
            const std::size_t e = j * layer.in_features() + i;
            out[j] += edge_ref(layer.basis(), c.subspan(e * nb, nb), ws[e], wu[e], x[i]);
        }
    return out;
}

/// out[j] = sum_c sum_k phi_{c,k}(in[c][j*s + k]).
inline std::vector<double> kan_conv_ref(const nn::SplineBasis& basis, const std::vector<std::vector<double>>& in,
                                        const nn::KanConvKernel1d& k) {
    const std::size_t nb = basis.size(), C = k.channels(), W = k.width(), L = in[0].size();
    const std::size_t out_len = (L - W) / k.stride + 1;
    const auto c = k.spline_coeffs.data();
    const auto ws = k.w_spline.data();
    const auto wu = k.w_silu.data();
    std::vector<double> out(out_len, 0.0);
    for (std::size_t j = 0; j < out_len; ++j)
        for (std::size_t ch = 0; ch < C; ++ch)
            for (std::size_t t = 0; t < W; ++t) {
                const std::size_t e = ch * W + t;
                out[j] += edge_ref(basis, c.subspan(e * nb, nb), ws[e], wu[e], in[ch][j * k.stride + t]);
            }
    return out;
}

/// Dense LSTM step for one sample, written out per unit.
inline void lstm_ref(const nn::DenseLstmParams& p, std::span<const double> x, std::vector<double>& h,
                     std::vector<double>& c) {
    const std::size_t H = p.hidden_size(), in = x.size();
    const auto wx = p.w_x.data(), wh = p.w_h.data(), b = p.bias.data();
    auto pre = [&](std::size_t col) {
        double s = b[col];
        for (std::size_t r = 0; r < in; ++r) s += x[r] * wx[r * 4 * H + col];
        for (std::size_t r = 0; r < H; ++r) s += h[r] * wh[r * 4 * H + col];
        return s;
    };
    std::vector<double> hn(H), cn(H);
    for (std::size_t u = 0; u < H; ++u) {
        const double i = sigmoid_ref(pre(u));
        const double f = sigmoid_ref(pre(H + u));
        const double g = std::tanh(pre(2 * H + u));
        const double o = sigmoid_ref(pre(3 * H + u));
        cn[u] = f * c[u] + i * g;
        hn[u] = o * std::tanh(cn[u]);
    }
    h = hn;
    c = cn;
}

/// Width-1 conv LSTM step for one sample; x [C][D], h and c [Ch][D].
inline void conv_lstm_ref(const nn::ConvLstmParams& p, const std::vector<std::vector<double>>& x,
                          std::vector<std::vector<double>>& h, std::vector<std::vector<double>>& c) {
    const std::size_t Ch = p.hidden_channels(), D = p.length(), C = x.size();
    const auto wx = p.w_x.data(), wh = p.w_h.data(), b = p.bias.data();
    const auto wci = p.w_ci.data(), wcf = p.w_cf.data(), wco = p.w_co.data();
    auto conv = [&](std::size_t gate, std::size_t ch, std::size_t d) {
        const std::size_t row = gate * Ch + ch;
        double s = b[row];
        for (std::size_t k = 0; k < C; ++k) s += wx[row * C + k] * x[k][d];
        for (std::size_t k = 0; k < Ch; ++k) s += wh[row * Ch + k] * h[k][d];
        return s;
    };
    auto hn = h, cn = c;
    for (std::size_t ch = 0; ch < Ch; ++ch)
        for (std::size_t d = 0; d < D; ++d) {
            const double i = sigmoid_ref(conv(0, ch, d) + wci[ch * D + d] * c[ch][d]);
            const double f = sigmoid_ref(conv(1, ch, d) + wcf[ch * D + d] * c[ch][d]);
            cn[ch][d] = f * c[ch][d] + i * std::tanh(conv(2, ch, d));
            const double o = sigmoid_ref(conv(3, ch, d) + wco[ch * D + d] * cn[ch][d]);
            hn[ch][d] = o * std::tanh(cn[ch][d]);
        }
    h = hn;
    c = cn;
}

struct MetricsRef {
    double mse = 0, rmse = 0, mae = 0, mape = 0;
};

inline MetricsRef metrics_ref(const std::vector<double>& yhat, const std::vector<double>& y) {
    MetricsRef m;
    double n = 0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        m.mse += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        m.mae += std::abs(y[i] - yhat[i]);
        if (std::abs(y[i]) >= 1e-8) {
            m.mape += std::abs((y[i] - yhat[i]) / y[i]);
            ++kept;
        }
        n += 1;
    }
    m.mse /= n;
    m.mae /= n;
    m.mape /= static_cast<double>(kept);
    m.rmse = std::sqrt(m.mse);
    return m;
}

inline void randomize(const std::vector<Tensor>& params, Rng& rng, double lo, double hi) {
    for (auto p : params)
        for (auto& v : p.mutable_data()) v = rng.uniform(lo, hi);
}

}  // namespace okan::testing
