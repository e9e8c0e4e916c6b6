#include <doctest.h>

#include "okan/errors.hpp"
#include "okan/lstm.hpp"
#include "support.hpp"

using namespace okan;
using namespace okan::nn;
using okan::testing::gradcheck;
using okan::testing::random_tensor;
using okan::testing::weighted_sum;

TEST_CASE("zero parameters give the half-gated fixed point") {
    auto p = zero_dense_lstm(3, 2);
    auto s = lstm_step(p, Tensor::zeros({1, 3}), zero_state({1, 2}));
    CHECK(s.cell.at(0) == 0.0);
    CHECK(s.hidden.at(1) == 0.0);
    p.bias.mutable_data()[2 * 2] = 100.0;  // cell candidate saturates at 1, input gate 1/2
    s = lstm_step(p, Tensor::zeros({1, 3}), zero_state({1, 2}));
    CHECK(s.cell.at(0) == doctest::Approx(0.5));
    CHECK(s.hidden.at(0) == doctest::Approx(0.5 * std::tanh(0.5)));
}

TEST_CASE("dense cell matches the scalar transcription") {
    Rng rng(1);
    auto p = init_dense_lstm(4, 3, rng);
    testing::randomize({p.w_x, p.w_h, p.bias}, rng, -0.8, 0.8);
    std::vector<double> h(3, 0.0), c(3, 0.0);
    LstmState s = zero_state({1, 3});
    for (int t = 0; t < 4; ++t) {
        std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        s = lstm_step(p, Tensor::from_data({1, 4}, x), s);
        testing::lstm_ref(p, x, h, c);
        for (std::size_t u = 0; u < 3; ++u) {
            CHECK(std::abs(s.hidden.at(u) - h[u]) < 1e-12);
            CHECK(std::abs(s.cell.at(u) - c[u]) < 1e-12);
        }
    }
}

TEST_CASE("width-1 conv cell matches the scalar transcription") {
    Rng rng(2);
    auto p = init_conv_lstm(2, 3, 4, 1, rng);
    testing::randomize({p.w_x, p.w_h, p.bias, p.w_ci, p.w_cf, p.w_co}, rng, -0.9, 0.9);
    std::vector<std::vector<double>> h(3, std::vector<double>(4, 0.0)), c = h;
    LstmState s = zero_state({1, 3, 4});
    for (int t = 0; t < 3; ++t) {
        std::vector<std::vector<double>> x(2, std::vector<double>(4));
        std::vector<double> flat;
        for (auto& row : x)
            for (auto& v : row) flat.push_back(v = rng.uniform(-1, 1));
        s = conv_lstm_step(p, Tensor::from_data({1, 2, 4}, flat), s);
        testing::conv_lstm_ref(p, x, h, c);
        for (std::size_t ch = 0; ch < 3; ++ch)
            for (std::size_t d = 0; d < 4; ++d) {
                CHECK(std::abs(s.hidden.at(ch * 4 + d) - h[ch][d]) < 1e-12);
                CHECK(std::abs(s.cell.at(ch * 4 + d) - c[ch][d]) < 1e-12);
            }
    }
}

TEST_CASE("initialisation ranges") {
    Rng rng(3);
    auto p = init_dense_lstm(5, 4, rng);
    for (std::size_t i = 0; i < 16; ++i) {
        if (i >= 4 && i < 8)
            CHECK(p.bias.at(i) == 1.0);
        else
            CHECK(std::abs(p.bias.at(i)) <= 0.08);
    }
    for (double v : p.w_x.data()) CHECK(std::abs(v) <= 0.08);
    CHECK_THROWS_AS(init_conv_lstm(1, 2, 5, 2, rng), ShapeError);
}

TEST_CASE("state shape errors") {
    auto p = zero_dense_lstm(3, 2);
    CHECK_THROWS_AS(lstm_step(p, Tensor::zeros({1, 3}), zero_state({1, 3})), ShapeError);
    CHECK_THROWS_AS(lstm_step(p, Tensor::zeros({1, 2}), zero_state({1, 2})), ShapeError);
}

TEST_CASE("cell gradients through time") {
    Rng rng(4);
    auto p = init_dense_lstm(3, 2, rng);
    testing::randomize({p.w_x, p.w_h, p.bias}, rng, -0.7, 0.7);
    auto xs = random_tensor({2, 4, 3}, rng);
    auto f = [&] {
        LstmState s = zero_state({2, 2});
        for (std::size_t t = 0; t < 4; ++t) s = lstm_step(p, select(xs, 1, t), s);
        return weighted_sum(add(s.hidden, s.cell));
    };
    CHECK(gradcheck(f, {p.w_x, p.w_h, p.bias, xs}).max_rel < 1e-6);

    auto q = init_conv_lstm(1, 2, 5, 3, rng);
    testing::randomize({q.w_x, q.w_h, q.bias, q.w_ci, q.w_cf, q.w_co}, rng, -0.7, 0.7);
    auto xc = random_tensor({2, 3, 1, 5}, rng);
    auto g = [&] {
        LstmState s = zero_state({2, 2, 5});
        for (std::size_t t = 0; t < 3; ++t) s = conv_lstm_step(q, select(xc, 1, t), s);
        return weighted_sum(s.hidden);
    };
    CHECK(gradcheck(g, {q.w_x, q.w_h, q.bias, q.w_ci, q.w_cf, q.w_co, xc}).max_rel < 1e-6);
}

TEST_CASE("models: shapes, determinism, gradients") {
    LstmConfig lc;
    lc.window = 3;
    lc.features = 4;
    lc.hidden = 4;
    LstmModel lstm(lc, 9);
    Rng rng(5);
    auto x = random_tensor({2, 3, 1, 4}, rng, -1, 1, false);
    CHECK(lstm.forward(x).shape() == Shape{2, 1});
    CHECK(sequence_forward(lstm, x).at(1) == lstm.forward(x).at(1));
    CHECK(gradcheck([&] { return weighted_sum(lstm.forward(x)); }, lstm.parameters()).max_rel < 1e-4);

    ConvLstmConfig cc;
    cc.window = 3;
    cc.features = 4;
    cc.hidden_channels = 1;
    ConvLstmModel conv(cc, 9);
    CHECK(conv.forward(x).shape() == Shape{2, 1});
    CHECK(gradcheck([&] { return weighted_sum(conv.forward(x)); }, conv.parameters()).max_rel < 1e-4);
    CHECK_THROWS_AS(conv.forward(Tensor::zeros({2, 3, 1, 5})), ShapeError);

    LstmModel again(lc, 9);
    CHECK(again.forward(x).at(0) == lstm.forward(x).at(0));
}
