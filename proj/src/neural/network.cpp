#include "kbqa/neural/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kbqa/error.hpp"
#include "kbqa/neural/kernels.hpp"

namespace kbqa::neural {

// --- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary(const EmbeddingTable& table) : dimension_(table.dimension()) {
  for (const auto& [token, vec] : table.vectors()) {
    ids_.emplace(token, tokens_.size() + 2);
    tokens_.push_back(token);
  }
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::size_t dimension)
    : tokens_(std::move(tokens)), dimension_(dimension) {
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (!ids_.emplace(tokens_[i], i + 2).second)
      throw std::invalid_argument("duplicate vocabulary token " + tokens_[i]);
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

Tensor Vocabulary::matrix(const EmbeddingTable& table) const {
  Tensor m(size(), dimension_);
  auto unk = table.unk_vector();
  std::copy(unk.begin(), unk.end(), m.row(kUnkId).begin());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto v = table.lookup(tokens_[i]);
    std::copy(v.begin(), v.end(), m.row(i + 2).begin());
  }
  return m;
}

// --- Network ----------------------------------------------------------------

Network::Network(Vocabulary vocab, Tensor embedding, bool trainable_embeddings, Head head,
                 std::size_t classes, std::size_t max_len)
    : vocab_(std::move(vocab)),
      head_(head),
      classes_(classes),
      max_len_(max_len),
      trainable_embeddings_(trainable_embeddings) {
  if (classes < 1 || max_len < 1) throw std::invalid_argument("network needs classes and max_len");
  if (embedding.rows() != vocab_.size() || embedding.cols() != vocab_.dimension())
    throw ShapeError("embedding matrix does not match vocabulary");
  embedding_ = params_.add("embedding", embedding.shape());
  params_[embedding_] = std::move(embedding);
  std::fill(params_[embedding_].row(kPadId).begin(), params_[embedding_].row(kPadId).end(), 0.0);
}

std::size_t Network::last_width() const {
  return layers_.empty() ? vocab_.dimension() : layers_.back()->output_width();
}

void Network::add_bi_recurrent(CellKind kind, std::size_t hidden) {
  if (finished_) throw std::logic_error("network already finished");
  if (hidden == 0) throw std::invalid_argument("hidden size must be positive");
  const auto name = "layer" + std::to_string(layers_.size());
  layers_.push_back(std::make_shared<BiRecurrentLayer>(params_, name, kind, last_width(), hidden));
}

void Network::add_conv(std::size_t filters, std::size_t width) {
  if (finished_) throw std::logic_error("network already finished");
  if (filters == 0 || width == 0) throw std::invalid_argument("conv needs filters and width");
  const auto name = "layer" + std::to_string(layers_.size());
  layers_.push_back(std::make_shared<ConvLayer>(params_, name, last_width(), filters, width));
}

void Network::add_dropout(double rate) {
  if (finished_) throw std::logic_error("network already finished");
  layers_.push_back(std::make_shared<DropoutLayer>(last_width(), rate));
}

void Network::finish() {
  if (finished_) return;
  if (head_ == Head::Classifier) {
    const auto* rnn = [&]() -> const BiRecurrentLayer* {
      for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        if (dynamic_cast<const DropoutLayer*>(it->get())) continue;
        return dynamic_cast<const BiRecurrentLayer*>(it->get());
      }
      return nullptr;
    }();
    if (rnn == nullptr)
      throw std::invalid_argument("classifier head needs a bidirectional layer on top");
  }
  head_weights_ = params_.add("head.weights", {classes_, last_width()});
  head_bias_ = params_.add("head.bias", {classes_});
  finished_ = true;
}

void Network::initialize(std::uint64_t seed, double range) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-range, range);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i == embedding_) continue;
    for (auto& v : params_[i].values()) v = dist(rng);
  }
}

bool Network::trainable(std::size_t param) const {
  return param != embedding_ || trainable_embeddings_;
}

std::size_t Network::trainable_parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (trainable(i)) n += params_[i].size();
  return n;
}

std::size_t Network::recurrent_parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_)
    if (const auto* rnn = dynamic_cast<const BiRecurrentLayer*>(layer.get()))
      n += rnn->recurrent_parameter_count();
  return n;
}

Encoded Network::encode(const Tokens& tokens) const {
  Encoded e;
  e.length = std::min(tokens.size(), max_len_);
  e.ids.assign(max_len_, kPadId);
  for (std::size_t t = 0; t < e.length; ++t) e.ids[t] = vocab_.id(tokens[t]);
  return e;
}

Tensor Network::forward(const Encoded& input, const ForwardContext& ctx,
                        ForwardTrace& trace) const {
  if (!finished_) throw std::logic_error("network not finished");
  if (input.length == 0) throw std::invalid_argument("cannot run on an empty sequence");
  const auto T = input.ids.size();
  const auto& emb = params_[embedding_];
  trace.embedded = Tensor(T, vocab_.dimension());
  for (std::size_t t = 0; t < T; ++t) {
    auto src = emb.row(input.ids[t]);
    std::copy(src.begin(), src.end(), trace.embedded.row(t).begin());
  }

  trace.layers.assign(layers_.size(), {});
  const Tensor* x = &trace.embedded;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l]->forward(params_, *x, ctx, trace.layers[l]);
    x = &trace.layers[l].output;
  }
  const Tensor& top = *x;
  const auto width = top.cols();

  if (head_ == Head::Tagger) {
    trace.features = Tensor(input.length, width);
    for (std::size_t t = 0; t < input.length; ++t)
      std::copy(top.row(t).begin(), top.row(t).end(), trace.features.row(t).begin());
  } else {
    const auto half = width / 2;
    trace.features = Tensor(1, width);
    auto f = trace.features.row(0);
    auto last = top.row(input.length - 1);
    auto first = top.row(0);
    std::copy(last.begin(), last.begin() + half, f.begin());
    std::copy(first.begin() + half, first.end(), f.begin() + half);
  }

  const auto rows = trace.features.rows();
  trace.logits = Tensor(rows, classes_);
  trace.probs = Tensor(rows, classes_);
  const auto& w = params_[head_weights_];
  const auto& b = params_[head_bias_];
  for (std::size_t r = 0; r < rows; ++r) {
    auto logits = trace.logits.row(r);
    std::copy(b.values().begin(), b.values().end(), logits.begin());
    kernels::gemv({w.values(), classes_, width}, trace.features.row(r), logits, true);
    auto p = softmax(logits);
    std::copy(p.begin(), p.end(), trace.probs.row(r).begin());
  }
  return trace.probs;
}

Tensor Network::predict(const Encoded& input) const {
  ForwardTrace trace;
  return forward(input, ForwardContext{}, trace);
}

std::vector<const Tensor*> Network::penalized_outputs(const ForwardTrace& trace) const {
  std::vector<const Tensor*> out;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    if (layers_[l]->penalized()) out.push_back(&trace.layers[l].output);
  return out;
}

double Network::loss_from_trace(const Example& example, const ForwardTrace& trace,
                                double l1_activity) const {
  std::vector<double> activations;
  if (l1_activity > 0.0) {
    const auto len = example.input.length;
    for (const auto* out : penalized_outputs(trace))
      for (std::size_t t = 0; t < len; ++t)
        activations.insert(activations.end(), out->row(t).begin(), out->row(t).end());
    activations.insert(activations.end(), trace.logits.values().begin(),
                       trace.logits.values().end());
  }
  return neural::loss(trace.probs, example.targets, activations, l1_activity);
}

double Network::loss(const Example& example, double l1_activity, const ForwardContext& ctx) const {
  ForwardTrace trace;
  forward(example.input, ctx, trace);
  return loss_from_trace(example, trace, l1_activity);
}

double Network::loss_and_gradient(const Example& example, double l1_activity,
                                  const ForwardContext& ctx, Gradients& grads,
                                  double weight) const {
  ForwardTrace trace;
  forward(example.input, ctx, trace);
  const double value = loss_from_trace(example, trace, l1_activity);

  const auto len = example.input.length;
  const auto T = example.input.ids.size();
  const auto rows = trace.probs.rows();
  const auto width = trace.features.cols();

  // Activity penalty normalizer: every penalized element of real timesteps plus the logits.
  double penalty_scale = 0.0;
  if (l1_activity > 0.0) {
    std::size_t count = trace.logits.size();
    for (const auto* out : penalized_outputs(trace)) count += len * out->cols();
    penalty_scale = l1_activity / static_cast<double>(count);
  }
  auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };

  // d(loss)/d(logits)
  Tensor d_logits(rows, classes_);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < classes_; ++k) {
      double g = trace.probs.at(r, k) - (k == example.targets[r] ? 1.0 : 0.0);
      g /= static_cast<double>(rows);
      g += penalty_scale * sign(trace.logits.at(r, k));
      d_logits.at(r, k) = g * weight;
    }
  }

  const auto& w = params_[head_weights_];
  Tensor d_features(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    kernels::ger(grads[head_weights_].values(), classes_, width, d_logits.row(r),
                 trace.features.row(r));
    for (std::size_t k = 0; k < classes_; ++k) grads[head_bias_][k] += d_logits.at(r, k);
    kernels::gemv_t({w.values(), classes_, width}, d_logits.row(r), d_features.row(r));
  }

  // Route head gradients back onto the top sequence output.
  Tensor d_top(T, width);
  if (head_ == Head::Tagger) {
    for (std::size_t t = 0; t < len; ++t)
      std::copy(d_features.row(t).begin(), d_features.row(t).end(), d_top.row(t).begin());
  } else {
    const auto half = width / 2;
    auto f = d_features.row(0);
    for (std::size_t k = 0; k < half; ++k) d_top.at(len - 1, k) += f[k];
    for (std::size_t k = half; k < width; ++k) d_top.at(0, k) += f[k];
  }

  Tensor d = std::move(d_top);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = *layers_[l];
    const auto& lt = trace.layers[l];
    if (layer.penalized() && penalty_scale > 0.0) {
      for (std::size_t t = 0; t < len; ++t)
        for (std::size_t k = 0; k < lt.output.cols(); ++k)
          d.at(t, k) += weight * penalty_scale * sign(lt.output.at(t, k));
    }
    d = layer.backward(params_, d, lt, grads);
  }

  if (trainable_embeddings_) {
    auto& de = grads[embedding_];
    for (std::size_t t = 0; t < T; ++t) {
      const auto id = example.input.ids[t];
      if (id == kPadId) continue;
      auto dst = de.row(id);
      auto src = d.row(t);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return value;
}

// --- serialization ----------------------------------------------------------

void write_tensor(std::ostream& out, const std::string& name, const Tensor& tensor) {
  out << "param " << name << ' ' << tensor.rank();
  for (auto d : tensor.shape()) out << ' ' << d;
  out << '\n';
  char buf[32];
  const auto cols = tensor.rank() >= 2 ? tensor.shape().back() : tensor.size();
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", tensor[i]);
    out << buf << ((i + 1) % cols == 0 ? '\n' : ' ');
  }
}

void Network::write(std::ostream& out) const {
  out << "vocab " << vocab_.tokens().size() << ' ' << vocab_.dimension() << '\n';
  for (const auto& token : vocab_.tokens()) out << token << '\n';
  out << "params " << params_.size() << '\n';
  for (std::size_t i = 0; i < params_.size(); ++i) write_tensor(out, params_.name(i), params_[i]);
}

void Network::read(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "params" || count != params_.size())
    throw DomainError("model file: parameter section does not match the architecture");
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    std::size_t rank = 0;
    if (!(in >> tag >> name >> rank) || tag != "param")
      throw DomainError("model file: expected a param block");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) in >> d;
    const auto idx = params_.index_of(name);
    if (shape != params_[idx].shape())
      throw DomainError("model file: parameter " + name + " has shape " + shape_string(shape) +
                        ", expected " + shape_string(params_[idx].shape()));
    std::string field;
    for (auto& v : params_[idx].values()) {
      if (!(in >> field)) throw DomainError("model file: truncated parameter " + name);
      v = std::stod(field);
    }
  }
}

}  // namespace kbqa::neural
