#include <doctest.h>

#include <filesystem>

#include "okan/checkpoint.hpp"
#include "okan/errors.hpp"
#include "okan/kan.hpp"
#include "okan/train.hpp"
#include "support.hpp"

using namespace okan;
using namespace okan::train;

TEST_CASE("mse loss value and gradient") {
    auto pred = Tensor::from_data({2, 1}, {2, 4}, true);
    auto y = Tensor::from_data({2, 1}, {1, 2});
    CHECK(mse_loss(y, y).item() == 0.0);
    auto l = mse_loss(pred, y);
    CHECK(l.item() == 2.5);
    l.backward();
    CHECK(pred.grad()[0] == doctest::Approx(1.0));
    CHECK(pred.grad()[1] == doctest::Approx(2.0));
    CHECK(testing::gradcheck([&] { return mse_loss(pred, y); }, {pred}).max_abs < 1e-8);
    CHECK_THROWS_AS(mse_loss(pred, Tensor::zeros({1, 2})), ShapeError);
}

TEST_CASE("adam first step and zero gradient") {
    auto p = Tensor::from_data({3}, {1, 2, 3}, true);
    Adam opt({p}, 1e-3);
    for (auto& g : p.grad_accumulator()) g = 1.0;
    opt.step();
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(p.at(i) == doctest::Approx(static_cast<double>(i + 1) - 1e-3 / (1 + 1e-8)).epsilon(1e-15));

    auto q = Tensor::from_data({2}, {5, 6}, true);
    Adam still({q}, 1e-3);
    q.grad_accumulator();
    still.step();
    CHECK(q.at(0) == 5.0);
    CHECK(q.at(1) == 6.0);
}

TEST_CASE("config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.adam_beta2 = 1.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

namespace {

// y = 2 x0 - x1 + 0.5 with an affine model.
Dataset linear_data(std::size_t n) {
    Rng rng(8);
    Dataset d;
    d.sample_shape = {2};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        d.inputs.push_back(a);
        d.inputs.push_back(b);
        d.targets.push_back(2 * a - b + 0.5);
    }
    return d;
}

}  // namespace

TEST_CASE("affine model loss decreases monotonically") {
    const auto data = linear_data(256);
    auto run = [&] {
        Rng rng(1);
        nn::Dense layer(2, 1, rng);
        TrainConfig cfg;
        cfg.epochs = 10;
        cfg.learning_rate = 1e-2;
        cfg.seed = 3;
        auto r = train::train([&](const Tensor& x) { return layer.forward(x); }, {layer.weight(), layer.bias()}, data, cfg);
        return std::make_pair(r, std::vector<double>(layer.weight().data().begin(), layer.weight().data().end()));
    };
    const auto [r1, w1] = run();
    const auto [r2, w2] = run();
    REQUIRE(r1.epoch_loss.size() == 10);
    for (std::size_t e = 1; e < 10; ++e) CHECK(r1.epoch_loss[e] < r1.epoch_loss[e - 1]);
    CHECK(r1.epoch_loss == r2.epoch_loss);
    CHECK(w1 == w2);
    CHECK(r1.steps == 10 * 8);
}

TEST_CASE("divergence and empty data") {
    auto data = linear_data(8);
    data.targets[3] = INFINITY;
    Rng rng(1);
    nn::Dense layer(2, 1, rng);
    TrainConfig cfg;
    cfg.epochs = 2;
    try {
        train::train([&](const Tensor& x) { return layer.forward(x); }, {layer.weight(), layer.bias()}, data, cfg);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.epoch() == 0);
    }
    Dataset empty;
    empty.sample_shape = {2};
    CHECK_THROWS_AS(train::train([&](const Tensor& x) { return layer.forward(x); }, {layer.weight()}, empty, cfg),
                    DomainError);
}

TEST_CASE("metrics") {
    const std::vector<double> y{1, 2}, yhat{2, 4};
    auto m = evaluate(yhat, y, "x");
    CHECK(m.mse == 2.5);
    CHECK(m.rmse == doctest::Approx(1.5811).epsilon(1e-4));
    CHECK(m.mae == 1.5);
    CHECK(m.mape == 1.0);
    m = evaluate(y, y);
    CHECK(m.mse == 0);
    CHECK(m.mape == 0);
    CHECK_THROWS_AS(evaluate(std::vector<double>{1}, y), ShapeError);
    CHECK_THROWS_AS(evaluate(std::vector<double>{1}, std::vector<double>{0.0}), DegenerateInputError);
    const auto guarded = evaluate(std::vector<double>{1, 1}, std::vector<double>{0.0, 2.0});
    CHECK(guarded.guarded == 1);
    CHECK(guarded.mape == 0.5);

    Rng rng(4);
    std::vector<double> a(1000), b(1000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform(-1, 1);
        b[i] = rng.uniform(0.1, 2);
    }
    const auto r = evaluate(a, b);
    const auto ref = testing::metrics_ref(a, b);
    CHECK(std::abs(r.mse - ref.mse) < 1e-12);
    CHECK(std::abs(r.rmse - ref.rmse) < 1e-12);
    CHECK(std::abs(r.mae - ref.mae) < 1e-12);
    CHECK(std::abs(r.mape - ref.mape) < 1e-12);
    CHECK(std::abs(r.rmse * r.rmse - r.mse) < 1e-12);

    // Halving targets with fixed errors doubles MAPE.
    std::vector<double> half(b.size()), pred_half(b.size()), pred(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        pred[i] = b[i] + 0.01;
        half[i] = b[i] / 2;
        pred_half[i] = half[i] + 0.01;
    }
    CHECK(evaluate(pred_half, half).mape == doctest::Approx(2 * evaluate(pred, b).mape).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip") {
    nn::KanModelConfig cfg;
    cfg.window = 2;
    nn::KanModel a(cfg, 1), b(cfg, 2);
    const auto path = std::filesystem::temp_directory_path() / "okan_test_ckpt.json";
    nn::save_checkpoint(a, path);
    nn::load_checkpoint(b, path);
    const auto pa = a.parameters(), pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(std::vector<double>(pa[i].data().begin(), pa[i].data().end()) ==
              std::vector<double>(pb[i].data().begin(), pb[i].data().end()));
    nn::KanModelConfig other = cfg;
    other.hidden = {3};
    nn::KanModel c(other, 1);
    CHECK_THROWS_AS(nn::load_checkpoint(c, path), ParseError);
    std::filesystem::remove(path);
}
