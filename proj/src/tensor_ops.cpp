#include <algorithm>
#include <cmath>
#include <string>

#include "okan/errors.hpp"
#include "okan/tensor.hpp"

namespace okan {

namespace {

double sigmoid_scalar(double x) {
    // Split by sign so exp never overflows.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

enum class BinaryKind { Add, Sub, Mul };

Tensor binary(BinaryKind kind, const Tensor& a, const Tensor& b, const char* name) {
    const std::size_t na = a.numel();
    const std::size_t nb = b.numel();
    Shape out_shape;
    if (a.shape() == b.shape()) {
        out_shape = a.shape();
    } else if (nb == 1) {
        out_shape = a.shape();
    } else if (na == 1) {
        out_shape = b.shape();
    } else {
        throw ShapeError(std::string(name) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
    const std::size_t n = shape_numel(out_shape);
    const std::size_t sa = na == 1 ? 0 : 1;
    const std::size_t sb = nb == 1 ? 0 : 1;
    auto da = a.data();
    auto db = b.data();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = da[i * sa];
        const double y = db[i * sb];
        switch (kind) {
            case BinaryKind::Add: out[i] = x + y; break;
            case BinaryKind::Sub: out[i] = x - y; break;
            case BinaryKind::Mul: out[i] = x * y; break;
        }
    }
    return make_op_result(std::move(out_shape), std::move(out), {a, b},
                          [a, b, kind, n, sa, sb](std::span<const double> g) {
                              if (a.requires_grad()) {
                                  auto ga = a.grad_accumulator();
                                  auto db = b.data();
                                  for (std::size_t i = 0; i < n; ++i) {
                                      const double d = kind == BinaryKind::Mul ? db[i * sb] : 1.0;
                                      ga[i * sa] += g[i] * d;
                                  }
                              }
                              if (b.requires_grad()) {
                                  auto gb = b.grad_accumulator();
                                  auto da = a.data();
                                  for (std::size_t i = 0; i < n; ++i) {
                                      double d = 1.0;
                                      if (kind == BinaryKind::Sub) d = -1.0;
                                      if (kind == BinaryKind::Mul) d = da[i * sa];
                                      gb[i * sb] += g[i] * d;
                                  }
                              }
                          });
}

// Unary op where the local derivative is a function of (input, output).
template <class F, class DF>
Tensor unary(const Tensor& a, F f, DF df) {
    auto da = a.data();
    std::vector<double> out(da.size());
    for (std::size_t i = 0; i < da.size(); ++i) out[i] = f(da[i]);
    std::vector<double> values = out;
    return make_op_result(a.shape(), std::move(out), {a},
                          [a, values = std::move(values), df](std::span<const double> g) {
                              auto ga = a.grad_accumulator();
                              auto da = a.data();
                              for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(da[i], values[i]);
                          });
}

void require_dim(const Tensor& t, std::size_t d, const char* what) {
    if (t.dim() != d)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(d) + "-D tensor, got " +
                         shape_to_string(t.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(BinaryKind::Add, a, b, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(BinaryKind::Sub, a, b, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(BinaryKind::Mul, a, b, "mul"); }

Tensor scale(const Tensor& a, double factor) {
    return unary(a, [factor](double x) { return factor * x; },
                 [factor](double, double) { return factor; });
}

Tensor silu(const Tensor& a) {
    return unary(
        a, [](double x) { return x * sigmoid_scalar(x); },
        [](double x, double) {
            const double s = sigmoid_scalar(x);
            return s * (1.0 + x * (1.0 - s));
        });
}

Tensor sigmoid(const Tensor& a) {
    return unary(a, sigmoid_scalar, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor elementwise(Elementwise op, const Tensor& a, const std::optional<Tensor>& b) {
    auto need_b = [&]() -> const Tensor& {
        if (!b || !b->defined()) throw ContractError("elementwise: binary op needs a second operand");
        return *b;
    };
    switch (op) {
        case Elementwise::Add: return add(a, need_b());
        case Elementwise::Sub: return sub(a, need_b());
        case Elementwise::Mul:
        case Elementwise::Hadamard: return mul(a, need_b());
        case Elementwise::Silu: return silu(a);
        case Elementwise::Sigmoid: return sigmoid(a);
        case Elementwise::Tanh: return tanh(a);
    }
    throw ContractError("elementwise: unknown op");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_dim(a, 2, "matmul");
    require_dim(b, 2, "matmul");
    const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
    if (b.size(0) != k)
        throw ShapeError("matmul: inner dimensions differ, " + shape_to_string(a.shape()) + " . " +
                         shape_to_string(b.shape()));
    auto da = a.data();
    auto db = b.data();
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* row = out.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = da[i * k + p];
            const double* brow = db.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
        }
    }
    return make_op_result({m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g) {
        if (a.requires_grad()) {
            // dA = G . B^T
            auto ga = a.grad_accumulator();
            auto db = b.data();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * db[p * n + j];
                    ga[i * k + p] += acc;
                }
        }
        if (b.requires_grad()) {
            // dB = A^T . G
            auto gb = b.grad_accumulator();
            auto da = a.data();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = da[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
                }
        }
    });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
    require_dim(bias, 1, "add_row bias");
    if (a.dim() < 1 || a.shape().back() != bias.size(0))
        throw ShapeError("add_row: bias " + shape_to_string(bias.shape()) + " does not match " +
                         shape_to_string(a.shape()));
    const std::size_t n = bias.size(0);
    const std::size_t rows = a.numel() / n;
    auto da = a.data();
    auto db = bias.data();
    std::vector<double> out(da.begin(), da.end());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < n; ++j) out[r * n + j] += db[j];
    return make_op_result(a.shape(), std::move(out), {a, bias}, [a, bias, rows, n](std::span<const double> g) {
        if (a.requires_grad()) {
            auto ga = a.grad_accumulator();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (bias.requires_grad()) {
            auto gb = bias.grad_accumulator();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < n; ++j) gb[j] += g[r * n + j];
        }
    });
}

Tensor mul_batch(const Tensor& a, const Tensor& w) {
    if (a.dim() != w.dim() + 1 || !std::equal(w.shape().begin(), w.shape().end(), a.shape().begin() + 1))
        throw ShapeError("mul_batch: " + shape_to_string(w.shape()) + " is not the per-sample shape of " +
                         shape_to_string(a.shape()));
    const std::size_t inner = w.numel();
    const std::size_t batch = a.size(0);
    auto da = a.data();
    auto dw = w.data();
    std::vector<double> out(da.size());
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < inner; ++i) out[b * inner + i] = da[b * inner + i] * dw[i];
    return make_op_result(a.shape(), std::move(out), {a, w}, [a, w, batch, inner](std::span<const double> g) {
        if (a.requires_grad()) {
            auto ga = a.grad_accumulator();
            auto dw = w.data();
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) ga[b * inner + i] += g[b * inner + i] * dw[i];
        }
        if (w.requires_grad()) {
            auto gw = w.grad_accumulator();
            auto da = a.data();
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) gw[i] += g[b * inner + i] * da[b * inner + i];
        }
    });
}

Tensor sum(const Tensor& a) {
    double total = 0.0;
    for (double v : a.data()) total += v;
    return make_op_result({}, {total}, {a}, [a](std::span<const double> g) {
        auto ga = a.grad_accumulator();
        for (auto& v : ga) v += g[0];
    });
}

Tensor mean(const Tensor& a) {
    if (a.numel() == 0) throw ShapeError("mean of an empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel())
        throw ShapeError("reshape: " + shape_to_string(a.shape()) + " -> " + shape_to_string(shape));
    auto da = a.data();
    return make_op_result(std::move(shape), std::vector<double>(da.begin(), da.end()), {a},
                          [a](std::span<const double> g) {
                              auto ga = a.grad_accumulator();
                              for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                          });
}

Tensor narrow(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length) {
    const auto& s = a.shape();
    if (axis >= s.size() || start + length > s[axis])
        throw ShapeError("narrow: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") out of bounds for axis " + std::to_string(axis) + " of " + shape_to_string(s));
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    const std::size_t extent = s[axis];
    Shape out_shape = s;
    out_shape[axis] = length;
    auto da = a.data();
    std::vector<double> out(outer * length * inner);
    for (std::size_t o = 0; o < outer; ++o)
        std::copy_n(da.begin() + (o * extent + start) * inner, length * inner,
                    out.begin() + o * length * inner);
    return make_op_result(std::move(out_shape), std::move(out), {a},
                          [a, outer, inner, extent, start, length](std::span<const double> g) {
                              auto ga = a.grad_accumulator();
                              for (std::size_t o = 0; o < outer; ++o)
                                  for (std::size_t i = 0; i < length * inner; ++i)
                                      ga[(o * extent + start) * inner + i] += g[o * length * inner + i];
                          });
}

Tensor select(const Tensor& a, std::size_t axis, std::size_t index) {
    Tensor slice = narrow(a, axis, index, 1);
    Shape s = a.shape();
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(axis));
    return reshape(slice, std::move(s));
}

Tensor conv1d(const Tensor& input, const Tensor& weight, std::size_t stride, std::size_t padding,
              const Tensor& bias) {
    const bool batched = input.dim() == 3;
    if (!batched && input.dim() != 2)
        throw ShapeError("conv1d: input must be [C x L] or [B x C x L], got " + shape_to_string(input.shape()));
    require_dim(weight, 3, "conv1d weight");
    if (stride < 1) throw ShapeError("conv1d: stride must be >= 1");
    const std::size_t B = batched ? input.size(0) : 1;
    const std::size_t C = input.size(batched ? 1 : 0);
    const std::size_t L = input.size(batched ? 2 : 1);
    const std::size_t F = weight.size(0);
    const std::size_t W = weight.size(2);
    if (weight.size(1) != C)
        throw ShapeError("conv1d: weight channels " + std::to_string(weight.size(1)) + " != input channels " +
                         std::to_string(C));
    if (W > L + 2 * padding)
        throw ShapeError("conv1d: kernel width " + std::to_string(W) + " exceeds padded length " +
                         std::to_string(L + 2 * padding));
    if (bias.defined() && (bias.dim() != 1 || bias.size(0) != F))
        throw ShapeError("conv1d: bias must have shape [F]");
    const std::size_t Lout = (L + 2 * padding - W) / stride + 1;

    auto din = input.data();
    auto dw = weight.data();
    std::vector<double> out(B * F * Lout, 0.0);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t f = 0; f < F; ++f) {
            double* orow = out.data() + (b * F + f) * Lout;
            if (bias.defined()) std::fill_n(orow, Lout, bias.data()[f]);
            for (std::size_t c = 0; c < C; ++c) {
                const double* irow = din.data() + (b * C + c) * L;
                const double* wrow = dw.data() + (f * C + c) * W;
                for (std::size_t j = 0; j < Lout; ++j)
                    for (std::size_t k = 0; k < W; ++k) {
                        const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(j * stride + k) -
                                                   static_cast<std::ptrdiff_t>(padding);
                        if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(L)) orow[j] += wrow[k] * irow[pos];
                    }
            }
        }
    Shape out_shape = batched ? Shape{B, F, Lout} : Shape{F, Lout};
    return make_op_result(
        std::move(out_shape), std::move(out), {input, weight, bias},
        [input, weight, bias, B, C, L, F, W, Lout, stride, padding](std::span<const double> g) {
            auto din = input.data();
            auto dw = weight.data();
            std::span<double> gin, gw;
            if (input.requires_grad()) gin = input.grad_accumulator();
            if (weight.requires_grad()) gw = weight.grad_accumulator();
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t f = 0; f < F; ++f) {
                    const double* grow = g.data() + (b * F + f) * Lout;
                    for (std::size_t c = 0; c < C; ++c)
                        for (std::size_t j = 0; j < Lout; ++j)
                            for (std::size_t k = 0; k < W; ++k) {
                                const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(j * stride + k) -
                                                           static_cast<std::ptrdiff_t>(padding);
                                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                                if (!gin.empty()) gin[(b * C + c) * L + pos] += grow[j] * dw[(f * C + c) * W + k];
                                if (!gw.empty()) gw[(f * C + c) * W + k] += grow[j] * din[(b * C + c) * L + pos];
                            }
                }
            if (bias.defined() && bias.requires_grad()) {
                auto gb = bias.grad_accumulator();
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t f = 0; f < F; ++f)
                        for (std::size_t j = 0; j < Lout; ++j) gb[f] += g[(b * F + f) * Lout + j];
            }
        });
}

}  // namespace okan
