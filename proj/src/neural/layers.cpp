#include "kbqa/neural/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kbqa/error.hpp"
#include "kbqa/neural/kernels.hpp"

namespace kbqa::neural {
namespace {

CellWeights weights(const ParameterSet& p, const std::size_t (&idx)[3]) {
  return {p[idx[0]], p[idx[1]], p[idx[2]]};
}

CellGrads grads_for(Gradients& g, const std::size_t (&idx)[3]) {
  return {g[idx[0]], g[idx[1]], g[idx[2]]};
}

std::size_t gate_count(CellKind kind) { return kind == CellKind::GRU ? 3 : 4; }

}  // namespace

Tensor bidirectional_forward(const Tensor& sequence, CellKind kind, const CellWeights& fwd,
                             const CellWeights& bwd, RecurrentTrace* trace) {
  const auto T = sequence.rows();
  const auto H = fwd.recurrent.cols();
  if (sequence.rank() != 2 || T == 0) throw ShapeError("bidirectional: expected a T x d sequence");
  if (bwd.recurrent.cols() != H) throw ShapeError("bidirectional: direction sizes differ");

  Tensor out(T, 2 * H);
  std::vector<double> zeros(H, 0.0);

  if (kind == CellKind::GRU) {
    std::vector<GruStep> f(T), b(T);
    for (std::size_t t = 0; t < T; ++t) {
      f[t] = gru_cell_forward(sequence.row(t), t == 0 ? zeros : f[t - 1].h, fwd);
      std::copy(f[t].h.begin(), f[t].h.end(), out.row(t).begin());
    }
    for (std::size_t t = T; t-- > 0;) {
      b[t] = gru_cell_forward(sequence.row(t), t + 1 == T ? zeros : b[t + 1].h, bwd);
      std::copy(b[t].h.begin(), b[t].h.end(), out.row(t).begin() + H);
    }
    if (trace) {
      trace->gru_fwd = std::move(f);
      trace->gru_bwd = std::move(b);
    }
  } else {
    std::vector<LstmStep> f(T), b(T);
    for (std::size_t t = 0; t < T; ++t) {
      f[t] = lstm_cell_forward(sequence.row(t), t == 0 ? zeros : f[t - 1].h,
                               t == 0 ? zeros : f[t - 1].c, fwd);
      std::copy(f[t].h.begin(), f[t].h.end(), out.row(t).begin());
    }
    for (std::size_t t = T; t-- > 0;) {
      const bool last = t + 1 == T;
      b[t] = lstm_cell_forward(sequence.row(t), last ? zeros : b[t + 1].h,
                               last ? zeros : b[t + 1].c, bwd);
      std::copy(b[t].h.begin(), b[t].h.end(), out.row(t).begin() + H);
    }
    if (trace) {
      trace->lstm_fwd = std::move(f);
      trace->lstm_bwd = std::move(b);
    }
  }
  return out;
}

Tensor conv1d_forward(const Tensor& sequence, const Tensor& filters, std::span<const double> bias,
                      Tensor* pre_activation) {
  if (filters.rank() != 3 || sequence.rank() != 2 || filters.dim(2) != sequence.cols())
    throw ShapeError("conv1d: filters must be F x w x d with d matching the input");
  const auto T = sequence.rows();
  const auto F = filters.dim(0);
  Tensor pre(T, F);
  kernels::conv1d_same(sequence.values(), T, sequence.cols(), filters.values(), F, filters.dim(1),
                       bias, pre.values());
  Tensor out = pre;
  for (auto& v : out.values()) v = std::max(v, 0.0);
  if (pre_activation) *pre_activation = std::move(pre);
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) sum += p[k] = std::exp(logits[k] - top);
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<double> dense_softmax(std::span<const double> h, const Tensor& weights,
                                  std::span<const double> bias) {
  if (weights.rows() != bias.size() || weights.cols() != h.size())
    throw ShapeError("dense: weight shape " + shape_string(weights.shape()) +
                     " does not match input " + std::to_string(h.size()));
  std::vector<double> logits(bias.begin(), bias.end());
  kernels::gemv({weights.values(), weights.rows(), weights.cols()}, h, logits, true);
  return softmax(logits);
}

Tensor apply_dropout(const Tensor& activations, double rate, bool training, std::mt19937_64* rng,
                     Tensor* mask) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
  Tensor out = activations;
  if (!training || rate == 0.0) {
    if (mask) *mask = Tensor(activations.shape(), 1.0);
    return out;
  }
  if (rng == nullptr) throw std::invalid_argument("dropout needs a random generator in training");
  Tensor keep(activations.shape());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < out.size(); ++i) {
    keep[i] = u(*rng) < rate ? 0.0 : scale;
    out[i] *= keep[i];
  }
  if (mask) *mask = std::move(keep);
  return out;
}

double loss(const Tensor& probs, std::span<const std::size_t> targets,
            std::span<const double> activations, double l1_activity) {
  if (targets.empty()) throw std::invalid_argument("loss: no targets");
  if (probs.rows() != targets.size()) throw ShapeError("loss: one probability row per target");
  double nll = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] >= probs.cols()) throw std::out_of_range("loss: target class out of range");
    nll -= std::log(std::max(probs.at(t, targets[t]), std::numeric_limits<double>::min()));
  }
  nll /= static_cast<double>(targets.size());
  if (l1_activity > 0.0 && !activations.empty()) {
    double sum = 0.0;
    for (double a : activations) sum += std::abs(a);
    nll += l1_activity * sum / static_cast<double>(activations.size());
  }
  return nll;
}

// --- BiRecurrentLayer -------------------------------------------------------

BiRecurrentLayer::BiRecurrentLayer(ParameterSet& params, const std::string& name, CellKind kind,
                                   std::size_t input, std::size_t hidden)
    : kind_(kind), input_(input), hidden_(hidden) {
  const auto gates = gate_count(kind);
  for (auto [dir, idx] : {std::pair{"fwd", fwd_}, std::pair{"bwd", bwd_}}) {
    const auto prefix = name + "." + dir + ".";
    idx[0] = params.add(prefix + "input", {gates * hidden, input});
    idx[1] = params.add(prefix + "recurrent", {gates * hidden, hidden});
    idx[2] = params.add(prefix + "bias", {gates * hidden});
  }
}

std::string BiRecurrentLayer::describe() const {
  return std::string(kind_ == CellKind::GRU ? "BiGRU" : "BiLSTM") + "(" + std::to_string(input_) +
         "->" + std::to_string(hidden_) + "x2)";
}

std::size_t BiRecurrentLayer::recurrent_parameter_count() const {
  const auto g = gate_count(kind_);
  return 2 * (g * hidden_ * input_ + g * hidden_ * hidden_ + g * hidden_);
}

Tensor BiRecurrentLayer::forward(const ParameterSet& params, const Tensor& input,
                                 const ForwardContext&, LayerTrace& trace) const {
  trace.input = input;
  trace.output = bidirectional_forward(input, kind_, weights(params, fwd_), weights(params, bwd_),
                                       &trace.recurrent);
  return trace.output;
}

Tensor BiRecurrentLayer::backward(const ParameterSet& params, const Tensor& d_output,
                                  const LayerTrace& trace, Gradients& grads) const {
  const auto T = trace.input.rows();
  const auto H = hidden_;
  Tensor dx(T, input_);
  const std::vector<double> zeros(H, 0.0);

  for (int direction = 0; direction < 2; ++direction) {
    const bool forward_dir = direction == 0;
    const auto& idx = forward_dir ? fwd_ : bwd_;
    const auto w = weights(params, idx);
    auto g = grads_for(grads, idx);
    const std::size_t offset = forward_dir ? 0 : H;

    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0);
    for (std::size_t n = 0; n < T; ++n) {
      // forward direction unrolls from T-1 down; backward direction from 0 up
      const std::size_t t = forward_dir ? T - 1 - n : n;
      const bool first = forward_dir ? t == 0 : t + 1 == T;
      const std::size_t prev = forward_dir ? t - 1 : t + 1;

      std::vector<double> dh(H);
      for (std::size_t k = 0; k < H; ++k) dh[k] = d_output.at(t, offset + k) + dh_next[k];
      std::vector<double> dh_prev(H, 0.0), dc_prev(H, 0.0);

      if (kind_ == CellKind::GRU) {
        const auto& steps = forward_dir ? trace.recurrent.gru_fwd : trace.recurrent.gru_bwd;
        gru_cell_backward(trace.input.row(t), first ? zeros : steps[prev].h, steps[t], dh, w, g,
                          dx.row(t), dh_prev);
      } else {
        const auto& steps = forward_dir ? trace.recurrent.lstm_fwd : trace.recurrent.lstm_bwd;
        lstm_cell_backward(trace.input.row(t), first ? zeros : steps[prev].h,
                           first ? zeros : steps[prev].c, steps[t], dh, dc_next, w, g, dx.row(t),
                           dh_prev, dc_prev);
      }
      dh_next = std::move(dh_prev);
      dc_next = std::move(dc_prev);
    }
  }
  return dx;
}

// --- ConvLayer --------------------------------------------------------------

ConvLayer::ConvLayer(ParameterSet& params, const std::string& name, std::size_t input,
                     std::size_t filters, std::size_t width)
    : input_(input), filters_(filters), width_(width) {
  weights_ = params.add(name + ".filters", {filters, width, input});
  bias_ = params.add(name + ".bias", {filters});
}

std::string ConvLayer::describe() const {
  return "Conv1D(" + std::to_string(filters_) + "x" + std::to_string(width_) + ")";
}

Tensor ConvLayer::forward(const ParameterSet& params, const Tensor& input, const ForwardContext&,
                          LayerTrace& trace) const {
  trace.input = input;
  trace.output = conv1d_forward(input, params[weights_], params[bias_].values(), &trace.aux);
  return trace.output;
}

Tensor ConvLayer::backward(const ParameterSet& params, const Tensor& d_output,
                           const LayerTrace& trace, Gradients& grads) const {
  const auto T = trace.input.rows();
  const auto d = input_;
  const auto& w = params[weights_];
  auto& dw = grads[weights_];
  auto& db = grads[bias_];
  Tensor dx(T, d);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < filters_; ++f) {
      if (trace.aux.at(t, f) <= 0.0) continue;  // ReLU gate
      const double g = d_output.at(t, f);
      if (g == 0.0) continue;
      db[f] += g;
      for (std::size_t j = 0; j < width_; ++j) {
        if (t + j < width_ - 1) continue;
        const auto src = t + j - (width_ - 1);
        const auto base = (f * width_ + j) * d;
        for (std::size_t k = 0; k < d; ++k) {
          dw[base + k] += g * trace.input.at(src, k);
          dx.at(src, k) += g * w[base + k];
        }
      }
    }
  }
  return dx;
}

// --- DropoutLayer -----------------------------------------------------------

DropoutLayer::DropoutLayer(std::size_t width, double rate) : width_(width), rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
}

std::string DropoutLayer::describe() const { return "Dropout(" + std::to_string(rate_) + ")"; }

Tensor DropoutLayer::forward(const ParameterSet&, const Tensor& input, const ForwardContext& ctx,
                             LayerTrace& trace) const {
  trace.output = apply_dropout(input, rate_, ctx.training, ctx.rng, &trace.aux);
  return trace.output;
}

Tensor DropoutLayer::backward(const ParameterSet&, const Tensor& d_output, const LayerTrace& trace,
                              Gradients&) const {
  Tensor dx = d_output;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= trace.aux[i];
  return dx;
}

}  // namespace kbqa::neural
