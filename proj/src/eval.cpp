#include "kbqa/eval.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace kbqa {
namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

void require_non_empty(const std::vector<AnnotatedQuestion>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("evaluation over an empty dataset");
}

}  // namespace

bool question_correct(const StructuredQuery& predicted, const AnnotatedQuestion& gold,
                      const EntityIndex& entity_index, std::size_t k) {
  if (predicted.entity_phrase.empty()) return false;
  const auto candidates = query_entity_index(entity_index, predicted.entity_phrase, k);
  if (candidates.empty()) return false;
  return candidates.front().entity == gold.gold_subject && predicted.relation == gold.gold_relation;
}

std::string display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::NT_BILSTM1: return "NT-QA";
    case ModelKind::BILSTM2:
    case ModelKind::BIGRU2: return "QA-RNN (tuned)";
    case ModelKind::CONV_GRU: return "QA-RNN (simplified)";
    case ModelKind::NB_MULTINOMIAL: return "Multinomial NB";
    case ModelKind::MAJORITY: return "Majority";
    case ModelKind::NAIVE_ALL_ENTITY: return "Naive all-entity";
  }
  return "?";
}

const std::vector<ReferenceRow>& reference_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"NT-QA (Ours)", 0.984, std::nullopt},
      {"QA-RNN (Ture et al.)", 0.94, 0.90},
      {"QA-RNN (tuned)", 0.70, 0.80},
      {"QA-RNN (simplified)", 0.72, 0.79},
      {"Multinomial NB", 0.77, 0.59},
      {"Random Forests", 0.85, 0.56},
      {"Bernoulli NB", 0.78, 0.59},
      {"SGD", std::nullopt, 0.61},
      {"KNN", 0.83, 0.56},
      {"Voting (Bernoulli, KNN, SGD)", std::nullopt, 0.60},
      {"Majority (Ture et al.)", std::nullopt, 0.041},
      {"Naive all-entity (Ture et al.)", 0.589, std::nullopt},
  };
  return rows;
}

std::pair<double, double> entity_accuracy(const Model& model,
                                          const std::vector<AnnotatedQuestion>& questions) {
  require_non_empty(questions);
  const auto n = static_cast<std::int64_t>(questions.size());
  std::int64_t exact = 0, tokens = 0, tokens_right = 0;
#pragma omp parallel for reduction(+ : exact, tokens, tokens_right) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& q = questions[i];
    const auto tags = model.predict_tags(q.tokens, q.pos_tags).mapped_tags;
    if (tags == q.gold_tags) ++exact;
    for (std::size_t t = 0; t < tags.size(); ++t) tokens_right += tags[t] == q.gold_tags[t];
    tokens += static_cast<std::int64_t>(tags.size());
  }
  return {static_cast<double>(exact) / static_cast<double>(n),
          static_cast<double>(tokens_right) / static_cast<double>(tokens)};
}

double end_to_end_accuracy(const EvalSubject& pipeline,
                           const std::vector<AnnotatedQuestion>& dataset) {
  require_non_empty(dataset);
  if (!pipeline.entity_model || !pipeline.relation_model || !pipeline.entity_index)
    throw std::invalid_argument("end-to-end evaluation needs both models and an entity index");
  const auto n = static_cast<std::int64_t>(dataset.size());
  std::int64_t correct = 0;
#pragma omp parallel for reduction(+ : correct) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& q = dataset[i];
    const auto query = build_structured_query(*pipeline.entity_model, *pipeline.relation_model,
                                              q.tokens, q.pos_tags);
    if (question_correct(query, q, *pipeline.entity_index, pipeline.k)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

AccuracyReport evaluate(const std::vector<const Model*>& models,
                        const std::vector<AnnotatedQuestion>& dataset,
                        const std::optional<EvalSubject>& pipeline) {
  require_non_empty(dataset);
  AccuracyReport report;
  report.questions = dataset.size();
  auto row_for = [&](const std::string& name) -> ReportRow& {
    for (auto& r : report.rows)
      if (r.classifier == name) return r;
    report.rows.push_back({name, std::nullopt, std::nullopt, std::nullopt});
    return report.rows.back();
  };
  for (const auto* model : models) {
    auto& row = row_for(display_name(model->descriptor().kind));
    if (model->descriptor().task == Task::ENTITY) {
      const auto [question, token] = entity_accuracy(*model, dataset);
      row.ed_question = question;
      row.ed_token = token;
    } else {
      row.rp = relation_accuracy(*model, dataset);
    }
  }
  if (pipeline) report.end_to_end = end_to_end_accuracy(*pipeline, dataset);
  return report;
}

void AccuracyReport::write_text(std::ostream& out) const {
  char line[160];
  out << "questions: " << questions << "\n\n";
  std::snprintf(line, sizeof line, "%-32s %12s %12s %12s\n", "Classifier", "ED (question)",
                "ED (token)", "RP");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-32s %12s %12s %12s\n", r.classifier.c_str(),
                  cell(r.ed_question).c_str(), cell(r.ed_token).c_str(), cell(r.rp).c_str());
    out << line;
  }
  out << "\nend-to-end accuracy: " << cell(end_to_end) << "\n\nreference (published):\n";
  for (const auto& r : reference_rows()) {
    std::snprintf(line, sizeof line, "%-32s %12s %12s\n", r.classifier.c_str(), cell(r.ed).c_str(),
                  cell(r.rp).c_str());
    out << line;
  }
}

void AccuracyReport::write_tsv(std::ostream& out) const {
  out << "classifier\ted_question\ted_token\trp\tend_to_end\n";
  for (const auto& r : rows)
    out << r.classifier << '\t' << cell(r.ed_question) << '\t' << cell(r.ed_token) << '\t'
        << cell(r.rp) << "\tN/A\n";
  if (end_to_end) out << "pipeline\tN/A\tN/A\tN/A\t" << cell(end_to_end) << '\n';
  for (const auto& r : reference_rows())
    out << "reference: " << r.classifier << '\t' << cell(r.ed) << "\tN/A\t" << cell(r.rp)
        << "\tN/A\n";
}

// --- benchmarking -----------------------------------------------------------

BenchmarkReport benchmark_training(const std::vector<ArchitectureDescriptor>& descriptors,
                                   const EmbeddingTable& embeddings,
                                   const std::vector<AnnotatedQuestion>& dataset,
                                   const TrainConfig& config) {
  if (descriptors.size() < 2) throw std::invalid_argument("benchmark needs at least two models");
  require_non_empty(dataset);
  BenchmarkReport report;
  const auto labels = RelationLabelSpace::from_questions(dataset);
  std::optional<double> conv, gru;
  for (const auto& desc : descriptors) {
    if (!is_neural(desc.kind)) throw std::invalid_argument("benchmark covers neural models only");
    auto model = Model::build(desc, &embeddings, labels, config.seed);
    BenchmarkRow row;
    row.descriptor = desc.encode();
    row.kind = desc.kind;
    row.trainable_parameters = model.trainable_parameter_count();
    row.recurrent_parameters = model.network()->recurrent_parameter_count();
    TrainConfig quiet = config;
    quiet.progress = nullptr;
    quiet.stop_at_train_accuracy.reset();
    const auto result = train(model, dataset, {}, quiet);
    for (const auto& e : result.log) row.epoch_seconds.push_back(e.seconds);
    for (double s : row.epoch_seconds) row.mean_epoch_seconds += s;
    if (!row.epoch_seconds.empty())
      row.mean_epoch_seconds /= static_cast<double>(row.epoch_seconds.size());
    if (desc.kind == ModelKind::CONV_GRU && !conv) conv = row.mean_epoch_seconds;
    if (desc.kind == ModelKind::BIGRU2 && !gru) gru = row.mean_epoch_seconds;
    report.rows.push_back(std::move(row));
  }
  if (conv && gru && *gru > 0.0) report.conv_gru_time_ratio = *conv / *gru;
  return report;
}

void BenchmarkReport::write(std::ostream& out) const {
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-12s trainable=%zu recurrent=%zu mean_epoch_s=%.6f\n",
                  std::string(to_string(r.kind)).c_str(), r.trainable_parameters,
                  r.recurrent_parameters, r.mean_epoch_seconds);
    out << line << "  " << r.descriptor << '\n';
  }
  if (conv_gru_time_ratio) {
    std::snprintf(line, sizeof line,
                  "CONV_GRU/BIGRU2 epoch time ratio: %.3f (reduction %.1f%%; reference: about "
                  "%.0f%%)\n",
                  *conv_gru_time_ratio, 100.0 * (1.0 - *conv_gru_time_ratio),
                  100.0 * kReferenceTimeReduction);
    out << line;
  }
}

// --- gradient suite ---------------------------------------------------------

GradSuiteResult gradient_suite(std::uint64_t seed) {
  constexpr std::size_t kDim = 8, kHidden = 6, kSteps = 5, kClasses = 3;
  const auto start = std::chrono::steady_clock::now();

  std::set<std::string> words;
  for (int i = 0; i < 10; ++i) words.insert("w" + std::to_string(i));
  const auto table = random_embeddings(words, kDim, derive_seed(seed, "gradcheck.embed"), 1.0);
  const RelationLabelSpace labels({"r0", "r1", "r2"});

  struct Case {
    ModelKind kind;
    Task task;
  };
  const Case cases[] = {{ModelKind::BILSTM2, Task::ENTITY},
                        {ModelKind::NT_BILSTM1, Task::ENTITY},
                        {ModelKind::BIGRU2, Task::RELATION},
                        {ModelKind::CONV_GRU, Task::RELATION}};

  GradSuiteResult result;
  std::mt19937_64 rng(derive_seed(seed, "gradcheck"));
  for (const auto& c : cases) {
    ArchitectureDescriptor desc;
    desc.task = c.task;
    desc.kind = c.kind;
    const bool two = c.kind == ModelKind::BILSTM2 || c.kind == ModelKind::BIGRU2;
    desc.hidden = two ? std::vector<std::size_t>{kHidden, kHidden} : std::vector{kHidden};
    desc.dropout = c.kind == ModelKind::NT_BILSTM1 ? std::vector{0.1} : std::vector{0.1, 0.1};
    if (c.kind == ModelKind::CONV_GRU) {
      desc.conv_filters = 4;
      desc.conv_width = 2;
    }
    desc.max_len = kSteps;
    desc.freeze_embeddings = false;

    auto model = Model::build(desc, &table, labels, rng());
    auto& net = *model.network();
    net.initialize(rng(), 1.0);

    neural::Example ex;
    Tokens tokens;
    std::uniform_int_distribution<int> word(0, 10);  // 10 is out of vocabulary
    for (std::size_t t = 0; t < kSteps; ++t) tokens.push_back("w" + std::to_string(word(rng)));
    ex.input = net.encode(tokens);
    if (c.task == Task::ENTITY) {
      for (std::size_t t = 0; t < kSteps; ++t) ex.targets.push_back(rng() % 2);
    } else {
      ex.targets.push_back(rng() % kClasses);
    }
    neural::NetworkObjective objective(net, ex, 0.01, rng());
    result.entries.push_back(
        {std::string(to_string(c.kind)), neural::grad_check(objective, kGradCheckStep,
                                                            kGradCheckTolerance)});
    result.pass = result.pass && result.entries.back().report.pass;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  result.seconds = elapsed.count();
  return result;
}

}  // namespace kbqa
