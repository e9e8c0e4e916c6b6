#include "okan/lstm.hpp"

#include <string>

#include "okan/errors.hpp"

namespace okan::nn {

namespace {

constexpr double kInitRange = 0.08;

Tensor uniform_tensor(Shape shape, Rng& rng) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.uniform(-kInitRange, kInitRange);
    return Tensor::from_data(std::move(shape), std::move(v), true);
}

void set_forget_bias(Tensor& bias, std::size_t block) {
    auto b = bias.mutable_data();
    for (std::size_t i = block; i < 2 * block; ++i) b[i] = 1.0;
}

void check_state(const LstmState& s, const Shape& expected, const char* who) {
    if (s.hidden.shape() != expected || s.cell.shape() != expected)
        throw ShapeError(std::string(who) + ": state must be " + shape_to_string(expected) + ", got hidden " +
                         shape_to_string(s.hidden.shape()) + " and cell " + shape_to_string(s.cell.shape()));
}

}  // namespace

DenseLstmParams zero_dense_lstm(std::size_t inputs, std::size_t hidden) {
    return {Tensor::zeros({inputs, 4 * hidden}, true), Tensor::zeros({hidden, 4 * hidden}, true),
            Tensor::zeros({4 * hidden}, true)};
}

ConvLstmParams zero_conv_lstm(std::size_t in_channels, std::size_t hidden_channels, std::size_t length,
                              std::size_t kernel_width) {
    if (kernel_width % 2 == 0) throw ShapeError("conv LSTM: kernel width must be odd for same padding");
    const std::size_t ch = hidden_channels;
    return {Tensor::zeros({4 * ch, in_channels, kernel_width}, true),
            Tensor::zeros({4 * ch, ch, kernel_width}, true),
            Tensor::zeros({4 * ch}, true),
            Tensor::zeros({ch, length}, true),
            Tensor::zeros({ch, length}, true),
            Tensor::zeros({ch, length}, true)};
}

DenseLstmParams init_dense_lstm(std::size_t inputs, std::size_t hidden, Rng& rng) {
    DenseLstmParams p{uniform_tensor({inputs, 4 * hidden}, rng), uniform_tensor({hidden, 4 * hidden}, rng),
                      uniform_tensor({4 * hidden}, rng)};
    set_forget_bias(p.bias, hidden);
    return p;
}

ConvLstmParams init_conv_lstm(std::size_t in_channels, std::size_t hidden_channels, std::size_t length,
                              std::size_t kernel_width, Rng& rng) {
    if (kernel_width % 2 == 0) throw ShapeError("conv LSTM: kernel width must be odd for same padding");
    const std::size_t ch = hidden_channels;
    ConvLstmParams p{uniform_tensor({4 * ch, in_channels, kernel_width}, rng),
                     uniform_tensor({4 * ch, ch, kernel_width}, rng),
                     uniform_tensor({4 * ch}, rng),
                     uniform_tensor({ch, length}, rng),
                     uniform_tensor({ch, length}, rng),
                     uniform_tensor({ch, length}, rng)};
    set_forget_bias(p.bias, ch);
    return p;
}

LstmState zero_state(const Shape& state_shape) {
    return {Tensor::zeros(state_shape), Tensor::zeros(state_shape)};
}

LstmState lstm_step(const DenseLstmParams& p, const Tensor& x, const LstmState& s) {
    const std::size_t h = p.hidden_size();
    if (x.dim() != 2 || x.size(1) != p.w_x.size(0))
        throw ShapeError("lstm_step: input must be [B x " + std::to_string(p.w_x.size(0)) + "], got " +
                         shape_to_string(x.shape()));
    check_state(s, {x.size(0), h}, "lstm_step");
    Tensor gates = add_row(add(matmul(x, p.w_x), matmul(s.hidden, p.w_h)), p.bias);
    Tensor i = sigmoid(narrow(gates, 1, 0, h));
    Tensor f = sigmoid(narrow(gates, 1, h, h));
    Tensor g = tanh(narrow(gates, 1, 2 * h, h));
    Tensor o = sigmoid(narrow(gates, 1, 3 * h, h));
    Tensor c = add(mul(f, s.cell), mul(i, g));
    return {mul(o, tanh(c)), c};
}

LstmState conv_lstm_step(const ConvLstmParams& p, const Tensor& x, const LstmState& s) {
    const std::size_t ch = p.hidden_channels();
    const std::size_t d = p.length();
    const std::size_t k = p.kernel_width();
    if (x.dim() != 3 || x.size(1) != p.w_x.size(1) || x.size(2) != d)
        throw ShapeError("conv_lstm_step: input must be [B x " + std::to_string(p.w_x.size(1)) + " x " +
                         std::to_string(d) + "], got " + shape_to_string(x.shape()));
    check_state(s, {x.size(0), ch, d}, "conv_lstm_step");
    const std::size_t pad = k / 2;
    Tensor gates = add(conv1d(x, p.w_x, 1, pad, p.bias), conv1d(s.hidden, p.w_h, 1, pad));
    Tensor i = sigmoid(add(narrow(gates, 1, 0, ch), mul_batch(s.cell, p.w_ci)));
    Tensor f = sigmoid(add(narrow(gates, 1, ch, ch), mul_batch(s.cell, p.w_cf)));
    Tensor c = add(mul(f, s.cell), mul(i, tanh(narrow(gates, 1, 2 * ch, ch))));
    Tensor o = sigmoid(add(narrow(gates, 1, 3 * ch, ch), mul_batch(c, p.w_co)));
    return {mul(o, tanh(c)), c};
}

LstmModel::LstmModel(const LstmConfig& config, std::uint64_t seed)
    : config_(config),
      cell_([&] {
          Rng rng(seed);
          return init_dense_lstm(config.channels * config.features, config.hidden, rng);
      }()),
      readout_([&] {
          Rng rng(derive_seed(seed, 1));
          return Dense(config.hidden, 1, rng, kInitRange);
      }()) {}

Tensor LstmModel::forward(const Tensor& batch) const {
    if (batch.dim() != 4 || batch.size(1) < 1 || batch.size(2) != config_.channels ||
        batch.size(3) != config_.features)
        throw ShapeError("LstmModel: expected [B x T x " + std::to_string(config_.channels) + " x " +
                         std::to_string(config_.features) + "], got " + shape_to_string(batch.shape()));
    const std::size_t b = batch.size(0);
    const std::size_t steps = batch.size(1);
    const std::size_t in = config_.channels * config_.features;
    LstmState s = zero_state({b, config_.hidden});
    for (std::size_t t = 0; t < steps; ++t) s = lstm_step(cell_, reshape(select(batch, 1, t), {b, in}), s);
    return readout_.forward(s.hidden);
}

std::vector<NamedTensor> LstmModel::named_parameters() const {
    return {{"lstm.w_x", cell_.w_x},
            {"lstm.w_h", cell_.w_h},
            {"lstm.bias", cell_.bias},
            {"readout.weight", readout_.weight()},
            {"readout.bias", readout_.bias()}};
}

nlohmann::json LstmModel::describe() const {
    return {{"type", "lstm"},
            {"hidden", config_.hidden},
            {"inputs", config_.channels * config_.features},
            {"init", "U(-0.08,0.08), forget bias 1"},
            {"readout", "affine on final hidden state"}};
}

ConvLstmModel::ConvLstmModel(const ConvLstmConfig& config, std::uint64_t seed)
    : config_(config),
      cell_([&] {
          Rng rng(seed);
          return init_conv_lstm(config.channels, config.hidden_channels, config.features, config.kernel_width, rng);
      }()),
      readout_([&] {
          Rng rng(derive_seed(seed, 1));
          return Dense(config.hidden_channels * config.features, 1, rng, kInitRange);
      }()) {}

Tensor ConvLstmModel::forward(const Tensor& batch) const {
    if (batch.dim() != 4 || batch.size(1) < 1 || batch.size(2) != config_.channels ||
        batch.size(3) != config_.features)
        throw ShapeError("ConvLstmModel: expected [B x T x " + std::to_string(config_.channels) + " x " +
                         std::to_string(config_.features) + "], got " + shape_to_string(batch.shape()));
    const std::size_t b = batch.size(0);
    const std::size_t steps = batch.size(1);
    LstmState s = zero_state({b, config_.hidden_channels, config_.features});
    for (std::size_t t = 0; t < steps; ++t) s = conv_lstm_step(cell_, select(batch, 1, t), s);
    return readout_.forward(reshape(s.hidden, {b, config_.hidden_channels * config_.features}));
}

std::vector<NamedTensor> ConvLstmModel::named_parameters() const {
    return {{"conv_lstm.w_x", cell_.w_x},   {"conv_lstm.w_h", cell_.w_h},   {"conv_lstm.bias", cell_.bias},
            {"conv_lstm.w_ci", cell_.w_ci}, {"conv_lstm.w_cf", cell_.w_cf}, {"conv_lstm.w_co", cell_.w_co},
            {"readout.weight", readout_.weight()}, {"readout.bias", readout_.bias()}};
}

nlohmann::json ConvLstmModel::describe() const {
    return {{"type", "conv_lstm"},
            {"hidden_channels", config_.hidden_channels},
            {"kernel_width", config_.kernel_width},
            {"padding", "same"},
            {"peephole", true},
            {"init", "U(-0.08,0.08), forget bias 1"},
            {"readout", "affine on final hidden state"}};
}

Tensor sequence_forward(const Model& model, const Tensor& batch) { return model.forward(batch); }

}  // namespace okan::nn
