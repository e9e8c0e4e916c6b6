#include <doctest.h>

#include "okan/errors.hpp"
#include "okan/tensor.hpp"
#include "support.hpp"

using namespace okan;
using okan::testing::gradcheck;
using okan::testing::random_tensor;
using okan::testing::weighted_sum;

TEST_CASE("construction and shape checks") {
    auto t = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.dim() == 2);
    CHECK(t.at(4) == 5);
    CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1, 2, 3}), ShapeError);
    CHECK(Tensor::scalar(3).item() == 3);
    CHECK_THROWS_AS(t.item(), ContractError);
    CHECK(shape_numel({}) == 1);
}

TEST_CASE("simple products have the textbook gradients") {
    auto x = Tensor::scalar(3.0, true);
    auto y = Tensor::scalar(4.0, true);
    auto z = add(mul(x, y), x);
    z.backward();
    CHECK(z.item() == 15.0);
    CHECK(x.grad()[0] == 5.0);
    CHECK(y.grad()[0] == 3.0);
}

TEST_CASE("backward on a non-scalar is a contract error") {
    auto x = Tensor::from_data({2}, {1, 2}, true);
    CHECK_THROWS_AS(scale(x, 2.0).backward(), ContractError);
}

TEST_CASE("gradients accumulate across backward calls") {
    auto x = Tensor::scalar(2.0, true);
    mul(x, x).backward();
    mul(x, x).backward();
    CHECK(x.grad()[0] == 8.0);
    x.zero_grad();
    CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("shared subexpressions sum their contributions") {
    auto x = Tensor::from_data({3}, {0.5, -1.0, 2.0}, true);
    auto s = sigmoid(x);
    auto y = sum(add(mul(s, s), s));
    y.backward();
    for (std::size_t i = 0; i < 3; ++i) {
        const double sv = 1 / (1 + std::exp(-x.at(i)));
        CHECK(x.grad()[i] == doctest::Approx((2 * sv + 1) * sv * (1 - sv)).epsilon(1e-14));
    }
}

TEST_CASE("no-grad mode records nothing") {
    auto x = Tensor::scalar(1.0, true);
    Tensor y;
    {
        NoGradGuard g;
        y = mul(x, x);
    }
    CHECK_FALSE(y.requires_grad());
    CHECK(grad_enabled());
}

TEST_CASE("detach cuts the graph") {
    auto x = Tensor::scalar(2.0, true);
    auto y = mul(x.detach(), x);
    y.backward();
    CHECK(x.grad()[0] == 2.0);
}

TEST_CASE("forward values of the elementwise ops") {
    auto a = Tensor::from_data({3}, {-1, 0, 2});
    CHECK(silu(a).at(2) == doctest::Approx(2 / (1 + std::exp(-2.0))));
    CHECK(tanh(a).at(0) == doctest::Approx(std::tanh(-1.0)));
    CHECK(sigmoid(a).at(1) == 0.5);
    CHECK(elementwise(Elementwise::Hadamard, a, a).at(2) == 4);
    CHECK_THROWS_AS(elementwise(Elementwise::Add, a), ContractError);
    CHECK_THROWS_AS(add(a, Tensor::zeros({2})), ShapeError);
    CHECK(add(a, Tensor::scalar(1)).at(0) == 0);
}

TEST_CASE("matmul, conv1d and reshapes") {
    auto a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    auto b = Tensor::from_data({2, 1}, {5, 6});
    auto m = matmul(a, b);
    CHECK(m.at(0) == 17);
    CHECK(m.at(1) == 39);
    CHECK_THROWS_AS(matmul(a, Tensor::zeros({3, 1})), ShapeError);

    auto in = Tensor::from_data({1, 4}, {1, 2, 3, 4});
    auto w = Tensor::from_data({1, 1, 2}, {1, -1});
    auto c = conv1d(in, w);
    CHECK(c.shape() == Shape{1, 3});
    CHECK(c.at(0) == -1);
    auto cp = conv1d(in, w, 1, 1);
    CHECK(cp.shape() == Shape{1, 5});
    CHECK(cp.at(0) == -1);
    CHECK(cp.at(4) == 4);
    auto cs = conv1d(in, w, 2);
    CHECK(cs.shape() == Shape{1, 2});

    auto t = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(narrow(t, 1, 1, 2).at(2) == 5);
    CHECK(select(t, 0, 1).at(0) == 4);
    CHECK(reshape(t, {3, 2}).shape() == Shape{3, 2});
    CHECK_THROWS_AS(reshape(t, {4, 2}), ShapeError);
    CHECK(mean(t).item() == 3.5);
}

TEST_CASE("single-op gradients match central differences") {
    Rng rng(1);
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({3, 4}, rng);
    auto s = random_tensor({}, rng);
    auto row = random_tensor({4}, rng);
    auto m = random_tensor({4, 2}, rng);
    auto w = random_tensor({2, 3, 2}, rng);
    auto x3 = random_tensor({2, 3, 5}, rng);
    auto bias = random_tensor({2}, rng);
    auto pw = random_tensor({3, 5}, rng);

    const std::vector<std::pair<const char*, std::function<Tensor()>>> cases{
        {"add", [&] { return weighted_sum(add(a, b)); }},
        {"sub", [&] { return weighted_sum(sub(a, b)); }},
        {"mul", [&] { return weighted_sum(mul(a, b)); }},
        {"scalar mul", [&] { return weighted_sum(mul(a, s)); }},
        {"scale", [&] { return weighted_sum(scale(a, -1.7)); }},
        {"silu", [&] { return weighted_sum(silu(a)); }},
        {"sigmoid", [&] { return weighted_sum(sigmoid(a)); }},
        {"tanh", [&] { return weighted_sum(tanh(a)); }},
        {"matmul", [&] { return weighted_sum(matmul(a, m)); }},
        {"add_row", [&] { return weighted_sum(add_row(a, row)); }},
        {"mul_batch", [&] { return weighted_sum(mul_batch(x3, pw)); }},
        {"sum", [&] { return sum(a); }},
        {"mean", [&] { return mul(mean(b), mean(b)); }},
        {"reshape", [&] { return weighted_sum(reshape(a, {6, 2})); }},
        {"narrow", [&] { return weighted_sum(narrow(a, 1, 1, 2)); }},
        {"select", [&] { return weighted_sum(select(x3, 1, 2)); }},
        {"conv1d", [&] { return weighted_sum(conv1d(x3, w, 1, 0, bias)); }},
        {"conv1d pad", [&] { return weighted_sum(conv1d(x3, w, 1, 1)); }},
        {"conv1d stride", [&] { return weighted_sum(conv1d(x3, w, 2, 1, bias)); }},
    };
    for (const auto& [name, f] : cases) {
        INFO(name);
        const auto r = gradcheck(f, {a, b, s, row, m, w, x3, bias, pw});
        CHECK(r.max_rel < 1e-6);
    }
}
