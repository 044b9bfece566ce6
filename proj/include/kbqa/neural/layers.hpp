#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kbqa/neural/cells.hpp"
#include "kbqa/neural/tensor.hpp"

namespace kbqa::neural {

enum class CellKind { GRU, LSTM };

struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;  // required when training with dropout
};

/// Per-direction step caches of a bidirectional pass.
struct RecurrentTrace {
  std::vector<GruStep> gru_fwd, gru_bwd;
  std::vector<LstmStep> lstm_fwd, lstm_bwd;
};

/// Row t = [forward state at t, backward state at t]; both directions start
/// from zero state. Output is T x 2H.
Tensor bidirectional_forward(const Tensor& sequence, CellKind kind, const CellWeights& fwd,
                             const CellWeights& bwd, RecurrentTrace* trace = nullptr);

/// Same-length 1-D convolution (left zero padding of width-1 frames) then
/// ReLU. filters is F x w x d. When pre_activation is given it receives the
/// values before ReLU.
Tensor conv1d_forward(const Tensor& sequence, const Tensor& filters, std::span<const double> bias,
                      Tensor* pre_activation = nullptr);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> dense_softmax(std::span<const double> h, const Tensor& weights,
                                  std::span<const double> bias);

/// Inverted dropout. Identity when not training or rate is 0. The keep mask
/// (0 or 1/(1-rate)) is written to `mask` when given.
Tensor apply_dropout(const Tensor& activations, double rate, bool training, std::mt19937_64* rng,
                     Tensor* mask = nullptr);

/// Mean negative log-probability of the targets (one probability row per
/// target) plus l1_activity times the mean absolute activation.
double loss(const Tensor& probs, std::span<const std::size_t> targets,
            std::span<const double> activations, double l1_activity);

struct LayerTrace {
  Tensor input;
  Tensor output;
  Tensor aux;  // dropout mask or conv pre-activation
  RecurrentTrace recurrent;
};

class SequenceLayer {
 public:
  virtual ~SequenceLayer() = default;

  virtual std::string describe() const = 0;
  virtual std::size_t input_width() const = 0;
  virtual std::size_t output_width() const = 0;
  // Output participates in the L1 activity penalty.
  virtual bool penalized() const { return false; }

  virtual Tensor forward(const ParameterSet& params, const Tensor& input, const ForwardContext& ctx,
                         LayerTrace& trace) const = 0;
  // Returns d(input); adds parameter gradients into grads.
  virtual Tensor backward(const ParameterSet& params, const Tensor& d_output,
                          const LayerTrace& trace, Gradients& grads) const = 0;
};

class BiRecurrentLayer final : public SequenceLayer {
 public:
  BiRecurrentLayer(ParameterSet& params, const std::string& name, CellKind kind, std::size_t input,
                   std::size_t hidden);

  std::string describe() const override;
  std::size_t input_width() const override { return input_; }
  std::size_t output_width() const override { return 2 * hidden_; }
  bool penalized() const override { return true; }
  CellKind kind() const { return kind_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t recurrent_parameter_count() const;

  Tensor forward(const ParameterSet& params, const Tensor& input, const ForwardContext& ctx,
                 LayerTrace& trace) const override;
  Tensor backward(const ParameterSet& params, const Tensor& d_output, const LayerTrace& trace,
                  Gradients& grads) const override;

 private:
  CellKind kind_;
  std::size_t input_;
  std::size_t hidden_;
  std::size_t fwd_[3];  // input, recurrent, bias parameter indices
  std::size_t bwd_[3];
};

class ConvLayer final : public SequenceLayer {
 public:
  ConvLayer(ParameterSet& params, const std::string& name, std::size_t input, std::size_t filters,
            std::size_t width);

  std::string describe() const override;
  std::size_t input_width() const override { return input_; }
  std::size_t output_width() const override { return filters_; }

  Tensor forward(const ParameterSet& params, const Tensor& input, const ForwardContext& ctx,
                 LayerTrace& trace) const override;
  Tensor backward(const ParameterSet& params, const Tensor& d_output, const LayerTrace& trace,
                  Gradients& grads) const override;

 private:
  std::size_t input_;
  std::size_t filters_;
  std::size_t width_;
  std::size_t weights_;
  std::size_t bias_;
};

class DropoutLayer final : public SequenceLayer {
 public:
  DropoutLayer(std::size_t width, double rate);

  std::string describe() const override;
  std::size_t input_width() const override { return width_; }
  std::size_t output_width() const override { return width_; }
  double rate() const { return rate_; }

  Tensor forward(const ParameterSet& params, const Tensor& input, const ForwardContext& ctx,
                 LayerTrace& trace) const override;
  Tensor backward(const ParameterSet& params, const Tensor& d_output, const LayerTrace& trace,
                  Gradients& grads) const override;

 private:
  std::size_t width_;
  double rate_;
};

}  // namespace kbqa::neural
