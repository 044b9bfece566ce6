#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbqa/corpus.hpp"
#include "kbqa/index.hpp"
#include "kbqa/models.hpp"
#include "kbqa/neural/gradcheck.hpp"
#include "kbqa/pipeline.hpp"

namespace kbqa {

/// True iff the top candidate for the predicted phrase is the gold subject and
/// the predicted relation is the gold relation.
bool question_correct(const StructuredQuery& predicted, const AnnotatedQuestion& gold,
                      const EntityIndex& entity_index, std::size_t k = kDefaultCandidateCap);

/// Row label used in reports, following the published table.
std::string display_name(ModelKind kind);

struct ReportRow {
  std::string classifier;
  std::optional<double> ed_question;
  std::optional<double> ed_token;
  std::optional<double> rp;
};

struct ReferenceRow {
  std::string classifier;
  std::optional<double> ed;
  std::optional<double> rp;
};

/// Published results, carried as reference text.
const std::vector<ReferenceRow>& reference_rows();

struct AccuracyReport {
  std::size_t questions = 0;
  std::vector<ReportRow> rows;
  std::optional<double> end_to_end;

  void write_text(std::ostream& out) const;
  void write_tsv(std::ostream& out) const;
};

struct EvalSubject {
  const Model* entity_model = nullptr;
  const Model* relation_model = nullptr;
  const EntityIndex* entity_index = nullptr;
  std::size_t k = kDefaultCandidateCap;
};

/// Token- and question-level tagging accuracy of one entity model.
std::pair<double, double> entity_accuracy(const Model& model,
                                          const std::vector<AnnotatedQuestion>& questions);

/// Rows for every model (entity and relation models of the same family share a
/// row) plus end-to-end accuracy when `pipeline` names both models and an index.
AccuracyReport evaluate(const std::vector<const Model*>& models,
                        const std::vector<AnnotatedQuestion>& dataset,
                        const std::optional<EvalSubject>& pipeline = std::nullopt);

double end_to_end_accuracy(const EvalSubject& pipeline,
                           const std::vector<AnnotatedQuestion>& dataset);

// --- tuning -----------------------------------------------------------------

struct TuneDimension {
  std::string name;
  std::vector<double> values;
};

using TuneSpace = std::vector<TuneDimension>;
using TuneConfig = std::map<std::string, double>;
using TuneObjective = std::function<double(const TuneConfig&)>;

struct TuneStep {
  TuneConfig config;
  double score = 0.0;
};

struct TuneResult {
  TuneConfig best;
  std::optional<double> best_score;  // empty when nothing was evaluated
  std::vector<TuneStep> trace;
};

/// Maximizes `objective`. Starts at the middle of every dimension, climbs to
/// the best single-dimension neighbour until none improves, then restarts from
/// a seeded random unvisited point. Each distinct configuration is evaluated
/// at most once; `budget` caps the evaluations.
TuneResult basin_hop_tune(const TuneSpace& space, const TuneObjective& objective,
                          std::size_t budget, std::uint64_t seed);

// --- benchmarking -----------------------------------------------------------

struct BenchmarkRow {
  std::string descriptor;
  ModelKind kind = ModelKind::BIGRU2;
  std::size_t trainable_parameters = 0;
  std::size_t recurrent_parameters = 0;
  std::vector<double> epoch_seconds;
  double mean_epoch_seconds = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  // mean CONV_GRU epoch time over mean BIGRU2 epoch time
  std::optional<double> conv_gru_time_ratio;

  void write(std::ostream& out) const;
};

inline constexpr double kReferenceTimeReduction = 0.40;

BenchmarkReport benchmark_training(const std::vector<ArchitectureDescriptor>& descriptors,
                                   const EmbeddingTable& embeddings,
                                   const std::vector<AnnotatedQuestion>& dataset,
                                   const TrainConfig& config);

// --- gradient suite ---------------------------------------------------------

struct GradSuiteEntry {
  std::string model;
  neural::GradCheckReport report;
};

struct GradSuiteResult {
  std::vector<GradSuiteEntry> entries;
  bool pass = true;
  double seconds = 0.0;
};

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckTolerance = 1e-4;

/// Central-difference checks of every neural model kind on small random
/// instances: embedding width 8, hidden width 6, five time steps.
GradSuiteResult gradient_suite(std::uint64_t seed);

}  // namespace kbqa
