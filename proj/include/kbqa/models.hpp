#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kbqa/corpus.hpp"
#include "kbqa/naive_bayes.hpp"
#include "kbqa/neural/network.hpp"
#include "kbqa/neural/optimizer.hpp"
#include "kbqa/textproc.hpp"

namespace kbqa {

enum class Task { ENTITY, RELATION };

enum class ModelKind {
  BILSTM2,           // two bidirectional LSTM layers
  NT_BILSTM1,        // one bidirectional LSTM layer, noun-filtered input
  BIGRU2,            // two bidirectional GRU layers
  CONV_GRU,          // conv(50 x 2) + one bidirectional GRU
  NB_MULTINOMIAL,
  MAJORITY,          // relation only
  NAIVE_ALL_ENTITY,  // entity only
};

std::string_view to_string(Task task);
std::string_view to_string(ModelKind kind);
std::optional<Task> parse_task(std::string_view name);
std::optional<ModelKind> parse_model_kind(std::string_view name);
bool is_neural(ModelKind kind);

struct ArchitectureDescriptor {
  Task task = Task::RELATION;
  ModelKind kind = ModelKind::BIGRU2;
  std::vector<std::size_t> hidden;  // one entry per recurrent layer
  std::vector<double> dropout;      // one entry per dropout slot
  std::size_t conv_filters = 0;
  std::size_t conv_width = 0;
  bool noun_filter = false;
  std::size_t max_len = 36;
  bool freeze_embeddings = true;
  double nb_alpha = 1.0;

  /// Single whitespace-free token, e.g. `task=RELATION,kind=BIGRU2,hidden=1400:400,...`.
  std::string encode() const;
  static ArchitectureDescriptor parse(std::string_view text);
  void validate() const;

  friend bool operator==(const ArchitectureDescriptor&, const ArchitectureDescriptor&) = default;
};

inline constexpr std::size_t kMinRecurrentWidth = 400;
inline constexpr double kBiGru2Ratio = 3.5;
inline constexpr double kBiLstm2Ratio = 3.1;
inline constexpr std::size_t kConvFilters = 50;
inline constexpr std::size_t kConvWidth = 2;
inline constexpr double kInitRange = 0.08;

/// Published layer sizes and dropout for each kind. A desk divisor > 1 shrinks
/// the hidden sizes while keeping the first/second layer ratio.
ArchitectureDescriptor default_descriptor(Task task, ModelKind kind, std::size_t desk_divisor = 1);

class RelationLabelSpace {
 public:
  RelationLabelSpace() = default;
  /// Labels in first-occurrence order.
  static RelationLabelSpace from_questions(const std::vector<AnnotatedQuestion>& questions);
  explicit RelationLabelSpace(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::optional<std::size_t> index(const std::string& label) const;
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const RelationLabelSpace& a, const RelationLabelSpace& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_;
};

struct TagPrediction {
  TagSequence tags;         // aligned to the model input (filtered tokens when filtering)
  TagSequence mapped_tags;  // aligned to the original question tokens
  bool degraded = false;    // noun filter kept everything, or all-zero output became all-ones
};

struct RelationPrediction {
  std::string label;
  double probability = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> valid_accuracy;
  double seconds = 0.0;
};

struct TrainConfig {
  double l1_activity = 0.0;
  std::uint64_t seed = 0;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  neural::OptimizerState optimizer;
  // Stop once training accuracy reaches this value.
  std::optional<double> stop_at_train_accuracy;
  std::ostream* progress = nullptr;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 0: initial parameters kept
};

class Model {
 public:
  /// Embeddings are required for neural kinds. Parameters are drawn from
  /// uniform(-0.08, 0.08) with a generator derived from `seed`.
  static Model build(const ArchitectureDescriptor& desc, const EmbeddingTable* embeddings,
                     const RelationLabelSpace& labels, std::uint64_t seed,
                     PosLexicon lexicon = {});

  const ArchitectureDescriptor& descriptor() const { return desc_; }
  const RelationLabelSpace& labels() const { return labels_; }
  const PosLexicon& lexicon() const { return lexicon_; }

  neural::Network* network() { return network_ ? &*network_ : nullptr; }
  const neural::Network* network() const { return network_ ? &*network_ : nullptr; }
  const MultinomialNB* naive_bayes() const { return nb_ ? &*nb_ : nullptr; }

  /// Entity tagging. `pos_tags` overrides the rule tagger when noun filtering.
  TagPrediction predict_tags(const Tokens& tokens,
                             const std::optional<std::vector<PosTag>>& pos_tags = std::nullopt) const;
  RelationPrediction predict_relation(const Tokens& tokens) const;

  /// Model input tokens and the source index of each (identity unless noun filtering).
  FilterResult model_input(const Tokens& tokens,
                           const std::optional<std::vector<PosTag>>& pos_tags) const;

  std::size_t trainable_parameter_count() const;

  void write(std::ostream& out) const;
  static Model read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  friend TrainResult train(Model&, const std::vector<AnnotatedQuestion>&,
                           const std::vector<AnnotatedQuestion>&, const TrainConfig&);

  ArchitectureDescriptor desc_;
  RelationLabelSpace labels_;
  PosLexicon lexicon_;
  std::optional<neural::Network> network_;
  std::optional<MultinomialNB> nb_;
  std::vector<std::size_t> label_counts_;  // MAJORITY
};

inline Model build_model(const ArchitectureDescriptor& desc, const EmbeddingTable* embeddings,
                         const RelationLabelSpace& labels, std::uint64_t seed,
                         PosLexicon lexicon = {}) {
  return Model::build(desc, embeddings, labels, seed, std::move(lexicon));
}

/// Seeded minibatch training; keeps the parameters of the best epoch
/// (validation accuracy, or training accuracy without a validation set).
TrainResult train(Model& model, const std::vector<AnnotatedQuestion>& train_set,
                  const std::vector<AnnotatedQuestion>& valid_set, const TrainConfig& config);

/// Tokens of the longest run of 1s (earliest on ties).
Tokens entity_phrase(const TagSequence& tags, const Tokens& tokens);

/// Fraction of questions whose mapped tags equal the gold tags.
double tagging_accuracy(const Model& model, const std::vector<AnnotatedQuestion>& questions);
/// Fraction of questions whose predicted relation equals the gold relation.
double relation_accuracy(const Model& model, const std::vector<AnnotatedQuestion>& questions);

MultinomialNB nb_train(const std::vector<AnnotatedQuestion>& questions,
                       const RelationLabelSpace& labels, double alpha = 1.0);
std::pair<std::string, double> nb_predict(const MultinomialNB& nb, const RelationLabelSpace& labels,
                                          const Tokens& tokens);

/// Features of one token for naive Bayes tagging: the word and its neighbours.
std::vector<std::string> token_features(const Tokens& tokens, std::size_t position);

}  // namespace kbqa
