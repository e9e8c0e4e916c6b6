#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace okan {

using Shape = std::vector<std::size_t>;

/// Product of the extents; the empty shape is a scalar with one element.
std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

class Tensor;

namespace detail {

/// Receives the gradient of the op output and accumulates into the inputs.
using BackwardFn = std::function<void(std::span<const double> out_grad)>;

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    bool is_leaf = true;
    std::vector<std::shared_ptr<Node>> parents;
    BackwardFn backward;
};

}  // namespace detail

/// Row-major N-dimensional array of doubles with reverse-mode differentiation.
///
/// Tensor is a handle: copies share storage and graph position. Leaves are
/// created with requires_grad; every op whose inputs require grad records a
/// backward closure, and backward() on a scalar accumulates into leaf grads.
class Tensor {
public:
    /// Undefined handle; only defined() may be called on it.
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const noexcept { return node_ != nullptr; }

    const Shape& shape() const;
    std::size_t dim() const { return shape().size(); }
    std::size_t size(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> data() const;
    /// Direct write access for initialization and optimizer updates.
    std::span<double> mutable_data();
    double item() const;
    double at(std::size_t flat_index) const { return data()[flat_index]; }

    bool requires_grad() const;
    void set_requires_grad(bool flag);
    bool is_leaf() const;

    bool has_grad() const;
    /// Gradient buffer; zeros if nothing has been accumulated yet.
    std::span<const double> grad() const;
    /// Gradient buffer, allocated on demand; used by backward closures.
    std::span<double> grad_accumulator() const;
    void zero_grad();

    /// Reverse pass from this scalar. Leaf grads accumulate across calls.
    void backward() const;

    /// Same values, no graph history.
    Tensor detach() const;

    /// True when both handles refer to the same storage.
    bool same_as(const Tensor& other) const noexcept { return node_ == other.node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    const detail::Node& node() const;

    std::shared_ptr<detail::Node> node_;

    friend Tensor make_op_result(Shape, std::vector<double>, const std::vector<Tensor>&,
                                 detail::BackwardFn);
};

/// Global switch for graph recording on the calling thread.
bool grad_enabled();

/// Disables graph recording for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Builds an op output. The backward closure is kept only when recording is
/// on and at least one input requires grad.
Tensor make_op_result(Shape shape, std::vector<double> data, const std::vector<Tensor>& inputs,
                      detail::BackwardFn backward);

// ---------------------------------------------------------------------------
// Ops. Binary elementwise ops need equal shapes or a one-element operand.
// ---------------------------------------------------------------------------

enum class Elementwise { Add, Sub, Mul, Silu, Sigmoid, Tanh, Hadamard };

/// Unified entry point; unary ops ignore `b`, binary ops require it.
Tensor elementwise(Elementwise op, const Tensor& a, const std::optional<Tensor>& b = std::nullopt);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
inline Tensor hadamard(const Tensor& a, const Tensor& b) { return mul(a, b); }
Tensor scale(const Tensor& a, double factor);

Tensor silu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

/// [m x k] . [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);

/// a[..., n] + bias[n], bias repeated over every leading index.
Tensor add_row(const Tensor& a, const Tensor& bias);

/// a[B, ...] o w[...], w repeated over the leading batch index.
Tensor mul_batch(const Tensor& a, const Tensor& w);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);

/// Slice [start, start + length) along `axis`.
Tensor narrow(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length);

/// Index `axis` at `index`, dropping that axis.
Tensor select(const Tensor& a, std::size_t axis, std::size_t index);

/// Cross-correlation over the last axis.
///
/// input [C x L] or [B x C x L], weight [F x C x W], optional bias [F].
/// Output length is floor((L + 2 padding - W) / stride) + 1.
Tensor conv1d(const Tensor& input, const Tensor& weight, std::size_t stride = 1,
              std::size_t padding = 0, const Tensor& bias = Tensor{});

}  // namespace okan
