#pragma once

#include <cstddef>

#include "okan/model.hpp"

namespace okan::nn {

/// Hidden and cell state, identical shapes.
struct LstmState {
    Tensor hidden;
    Tensor cell;
};

/// Dense LSTM cell. Gate blocks are stacked in the order input, forget, cell, output.
struct DenseLstmParams {
    Tensor w_x;   ///< [in x 4H]
    Tensor w_h;   ///< [H x 4H]
    Tensor bias;  ///< [4H]

    std::size_t hidden_size() const { return w_h.size(0); }
};

/// 1-D convolutional LSTM cell with peephole connections.
///
/// Convolutions use same padding along D, so hidden and cell stay [B x Ch x D].
struct ConvLstmParams {
    Tensor w_x;   ///< [4Ch x C x K], gate blocks i, f, c, o
    Tensor w_h;   ///< [4Ch x Ch x K]
    Tensor bias;  ///< [4Ch]: b_i, b_f, b_c, b_o per channel
    Tensor w_ci;  ///< [Ch x D]
    Tensor w_cf;  ///< [Ch x D]
    Tensor w_co;  ///< [Ch x D]

    std::size_t hidden_channels() const { return w_ci.size(0); }
    std::size_t length() const { return w_ci.size(1); }
    std::size_t kernel_width() const { return w_x.size(2); }
};

/// Zero-initialised parameters; tests fill them in directly.
DenseLstmParams zero_dense_lstm(std::size_t inputs, std::size_t hidden);
ConvLstmParams zero_conv_lstm(std::size_t in_channels, std::size_t hidden_channels, std::size_t length,
                              std::size_t kernel_width);

/// Forget-gate bias 1, everything else ~ U(-0.08, 0.08).
DenseLstmParams init_dense_lstm(std::size_t inputs, std::size_t hidden, Rng& rng);
ConvLstmParams init_conv_lstm(std::size_t in_channels, std::size_t hidden_channels, std::size_t length,
                              std::size_t kernel_width, Rng& rng);

LstmState zero_state(const Shape& state_shape);

/// x [B x in], state [B x H].
LstmState lstm_step(const DenseLstmParams& p, const Tensor& x, const LstmState& s);

/// x [B x C x D], state [B x Ch x D].
///   i = sig(Wxi*X + Whi*H + Wci o C_prev + b_i)
///   f = sig(Wxf*X + Whf*H + Wcf o C_prev + b_f)
///   C = f o C_prev + i o tanh(Wxc*X + Whc*H + b_c)
///   o = sig(Wxo*X + Who*H + Wco o C + b_o)
///   H = o o tanh(C)
LstmState conv_lstm_step(const ConvLstmParams& p, const Tensor& x, const LstmState& s);

struct LstmConfig {
    std::size_t window = 5;
    std::size_t channels = 1;
    std::size_t features = 9;
    std::size_t hidden = 16;
};

/// LSTM over the window's observations, affine readout of the last hidden state.
class LstmModel : public Model {
public:
    LstmModel(const LstmConfig& config, std::uint64_t seed);

    std::string name() const override { return "LSTM"; }
    /// batch [B x T x C x D]
    Tensor forward(const Tensor& batch) const override;
    std::vector<NamedTensor> named_parameters() const override;
    nlohmann::json describe() const override;

    DenseLstmParams& cell() { return cell_; }
    Dense& readout() { return readout_; }

private:
    LstmConfig config_;
    DenseLstmParams cell_;
    Dense readout_;
};

struct ConvLstmConfig {
    std::size_t window = 5;
    std::size_t channels = 1;
    std::size_t features = 9;
    std::size_t hidden_channels = 4;
    std::size_t kernel_width = 3;
};

class ConvLstmModel : public Model {
public:
    ConvLstmModel(const ConvLstmConfig& config, std::uint64_t seed);

    std::string name() const override { return "Conv-LSTM"; }
    /// batch [B x T x C x D]
    Tensor forward(const Tensor& batch) const override;
    std::vector<NamedTensor> named_parameters() const override;
    nlohmann::json describe() const override;

    ConvLstmParams& cell() { return cell_; }
    Dense& readout() { return readout_; }

private:
    ConvLstmConfig config_;
    ConvLstmParams cell_;
    Dense readout_;
};

/// Unrolls the model's cell over T steps from a zero state; same as model.forward.
Tensor sequence_forward(const Model& model, const Tensor& batch);

}  // namespace okan::nn
