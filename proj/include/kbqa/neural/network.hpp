#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kbqa/corpus.hpp"
#include "kbqa/neural/layers.hpp"
#include "kbqa/neural/tensor.hpp"

namespace kbqa::neural {

enum class Head {
  Tagger,      // one distribution per real token
  Classifier,  // one distribution from [fwd state at last token, bwd state at first]
};

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnkId = 1;

/// Token ids: 0 is the pad symbol (zero vector), 1 the unknown token, then
/// the embedding table's tokens in sorted order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const EmbeddingTable& table);
  Vocabulary(std::vector<std::string> tokens, std::size_t dimension);

  std::size_t id(const std::string& token) const;
  std::size_t size() const { return tokens_.size() + 2; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  // (size x dimension) initial embedding rows for the table this was built from
  Tensor matrix(const EmbeddingTable& table) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> ids_;
  std::size_t dimension_ = 0;
};

struct Encoded {
  std::vector<std::size_t> ids;  // always max_len entries, right-padded
  std::size_t length = 0;        // real tokens, <= max_len
};

struct Example {
  Encoded input;
  std::vector<std::size_t> targets;  // Tagger: one per real token; Classifier: one
};

struct ForwardTrace {
  Tensor embedded;
  std::vector<LayerTrace> layers;
  Tensor features;  // head input rows
  Tensor logits;
  Tensor probs;
};

/// Embedding lookup, a stack of sequence layers and a dense softmax head.
class Network {
 public:
  Network(Vocabulary vocab, Tensor embedding, bool trainable_embeddings, Head head,
          std::size_t classes, std::size_t max_len);

  void add_bi_recurrent(CellKind kind, std::size_t hidden);
  void add_conv(std::size_t filters, std::size_t width);
  void add_dropout(double rate);
  // Call once after the last layer.
  void finish();

  /// Uniform(-range, range) for every parameter except the embedding.
  void initialize(std::uint64_t seed, double range);

  Head head() const { return head_; }
  std::size_t classes() const { return classes_; }
  std::size_t max_len() const { return max_len_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::shared_ptr<const SequenceLayer>>& layers() const { return layers_; }
  bool trainable_embeddings() const { return trainable_embeddings_; }

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  bool trainable(std::size_t param) const;
  std::size_t trainable_parameter_count() const;
  std::size_t recurrent_parameter_count() const;

  Encoded encode(const Tokens& tokens) const;

  Tensor forward(const Encoded& input, const ForwardContext& ctx, ForwardTrace& trace) const;
  /// Tagger: length x classes; Classifier: 1 x classes.
  Tensor predict(const Encoded& input) const;

  double loss(const Example& example, double l1_activity, const ForwardContext& ctx) const;
  /// Adds weight * d(loss)/d(param) into grads and returns the loss.
  double loss_and_gradient(const Example& example, double l1_activity, const ForwardContext& ctx,
                           Gradients& grads, double weight = 1.0) const;

  void write(std::ostream& out) const;
  /// Reads state written by write() into a network with the same layer stack.
  void read(std::istream& in);

 private:
  double loss_from_trace(const Example& example, const ForwardTrace& trace,
                         double l1_activity) const;
  std::size_t last_width() const;
  std::vector<const Tensor*> penalized_outputs(const ForwardTrace& trace) const;

  Vocabulary vocab_;
  Head head_;
  std::size_t classes_;
  std::size_t max_len_;
  bool trainable_embeddings_;
  ParameterSet params_;
  std::size_t embedding_ = 0;
  std::size_t head_weights_ = 0;
  std::size_t head_bias_ = 0;
  bool finished_ = false;
  std::vector<std::shared_ptr<const SequenceLayer>> layers_;
};

void write_tensor(std::ostream& out, const std::string& name, const Tensor& tensor);

}  // namespace kbqa::neural
