#include "kbqa/models.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kbqa/error.hpp"

namespace kbqa {
namespace {

constexpr std::pair<ModelKind, std::string_view> kKindNames[] = {
    {ModelKind::BILSTM2, "BILSTM2"},
    {ModelKind::NT_BILSTM1, "NT_BILSTM1"},
    {ModelKind::BIGRU2, "BIGRU2"},
    {ModelKind::CONV_GRU, "CONV_GRU"},
    {ModelKind::NB_MULTINOMIAL, "NB_MULTINOMIAL"},
    {ModelKind::MAJORITY, "MAJORITY"},
    {ModelKind::NAIVE_ALL_ENTITY, "NAIVE_ALL_ENTITY"},
};

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

neural::Example make_example(const Model& model, const neural::Network& net,
                             const AnnotatedQuestion& q) {
  neural::Example ex;
  if (model.descriptor().task == Task::ENTITY) {
    const auto input = model.model_input(q.tokens, q.pos_tags);
    ex.input = net.encode(input.kept_tokens);
    for (std::size_t i = 0; i < ex.input.length; ++i)
      ex.targets.push_back(q.gold_tags.at(input.index_map[i]));
  } else {
    const auto label = model.labels().index(q.gold_relation);
    if (!label) throw std::invalid_argument("relation '" + q.gold_relation + "' not in label space");
    ex.input = net.encode(q.tokens);
    ex.targets.push_back(*label);
  }
  return ex;
}

double accuracy(const Model& model, const std::vector<AnnotatedQuestion>& questions) {
  return model.descriptor().task == Task::ENTITY ? tagging_accuracy(model, questions)
                                                 : relation_accuracy(model, questions);
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::ENTITY ? "ENTITY" : "RELATION"; }

std::string_view to_string(ModelKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  if (name == "ENTITY" || name == "entity") return Task::ENTITY;
  if (name == "RELATION" || name == "relation") return Task::RELATION;
  return std::nullopt;
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
    std::string lower(n);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == name) return k;
  }
  return std::nullopt;
}

bool is_neural(ModelKind kind) {
  return kind == ModelKind::BILSTM2 || kind == ModelKind::NT_BILSTM1 ||
         kind == ModelKind::BIGRU2 || kind == ModelKind::CONV_GRU;
}

// --- descriptor -------------------------------------------------------------

std::string ArchitectureDescriptor::encode() const {
  std::string s = "task=" + std::string(to_string(task)) + ",kind=" + std::string(to_string(kind));
  s += ",hidden=";
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? ":" : "") + std::to_string(hidden[i]);
  s += ",dropout=";
  for (std::size_t i = 0; i < dropout.size(); ++i) s += (i ? ":" : "") + format_double(dropout[i]);
  s += ",filters=" + std::to_string(conv_filters) + ",width=" + std::to_string(conv_width);
  s += ",noun_filter=" + std::string(noun_filter ? "1" : "0");
  s += ",max_len=" + std::to_string(max_len);
  s += ",freeze=" + std::string(freeze_embeddings ? "1" : "0");
  s += ",alpha=" + format_double(nb_alpha);
  return s;
}

ArchitectureDescriptor ArchitectureDescriptor::parse(std::string_view text) {
  ArchitectureDescriptor d;
  bool have_task = false, have_kind = false;
  for (auto item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("descriptor item without '=': " + std::string(item));
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    if (key == "task") {
      auto t = parse_task(value);
      if (!t) throw std::invalid_argument("unknown task " + std::string(value));
      d.task = *t;
      have_task = true;
    } else if (key == "kind") {
      auto k = parse_model_kind(value);
      if (!k) throw std::invalid_argument("unknown model kind " + std::string(value));
      d.kind = *k;
      have_kind = true;
    } else if (key == "hidden") {
      d.hidden.clear();
      for (auto v : split(value, ':')) d.hidden.push_back(parse_size(v));
    } else if (key == "dropout") {
      d.dropout.clear();
      for (auto v : split(value, ':')) d.dropout.push_back(parse_double(v));
    } else if (key == "filters") {
      d.conv_filters = parse_size(value);
    } else if (key == "width") {
      d.conv_width = parse_size(value);
    } else if (key == "noun_filter") {
      d.noun_filter = value == "1";
    } else if (key == "max_len") {
      d.max_len = parse_size(value);
    } else if (key == "freeze") {
      d.freeze_embeddings = value == "1";
    } else if (key == "alpha") {
      d.nb_alpha = parse_double(value);
    } else {
      throw std::invalid_argument("unknown descriptor key " + std::string(key));
    }
  }
  if (!have_task || !have_kind) throw std::invalid_argument("descriptor needs task and kind");
  d.validate();
  return d;
}

void ArchitectureDescriptor::validate() const {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(std::string(to_string(kind)) + ": " + why);
  };
  if (kind == ModelKind::MAJORITY && task != Task::RELATION) fail("relation task only");
  if (kind == ModelKind::NAIVE_ALL_ENTITY && task != Task::ENTITY) fail("entity task only");
  if (kind == ModelKind::NB_MULTINOMIAL && nb_alpha <= 0.0) fail("alpha must be positive");
  if (!is_neural(kind)) return;

  const std::size_t layers = kind == ModelKind::BILSTM2 || kind == ModelKind::BIGRU2 ? 2 : 1;
  if (hidden.size() != layers) fail("expected " + std::to_string(layers) + " hidden sizes");
  for (auto h : hidden)
    if (h < 1) fail("hidden sizes must be >= 1");
  const std::size_t slots = kind == ModelKind::NT_BILSTM1 ? 1 : 2;
  if (dropout.size() != slots) fail("expected " + std::to_string(slots) + " dropout rates");
  for (auto r : dropout)
    if (r < 0.0 || r >= 1.0) fail("dropout must be in [0, 1)");
  if (kind == ModelKind::CONV_GRU && (conv_filters < 1 || conv_width < 1))
    fail("conv filters and width required");
  if (max_len < 1) fail("max_len must be >= 1");
}

ArchitectureDescriptor default_descriptor(Task task, ModelKind kind, std::size_t desk_divisor) {
  if (desk_divisor == 0) throw std::invalid_argument("desk divisor must be positive");
  ArchitectureDescriptor d;
  d.task = task;
  d.kind = kind;
  // Second recurrent layer holds the minimum width; the first is ratio times that.
  const auto base = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(kMinRecurrentWidth) /
                                              static_cast<double>(desk_divisor))));
  auto scaled = [&](double ratio) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ratio * base)));
  };
  switch (kind) {
    case ModelKind::BILSTM2:
      d.hidden = {scaled(kBiLstm2Ratio), base};
      d.dropout = {0.1, 0.1};
      break;
    case ModelKind::BIGRU2:
      d.hidden = {scaled(kBiGru2Ratio), base};
      d.dropout = {0.1, 0.1};
      break;
    case ModelKind::NT_BILSTM1:
      d.hidden = {base};
      d.dropout = {0.1};
      d.noun_filter = task == Task::ENTITY;
      break;
    case ModelKind::CONV_GRU:
      d.hidden = {base};
      d.dropout = {0.2, 0.1};
      d.conv_filters = kConvFilters;
      d.conv_width = kConvWidth;
      break;
    case ModelKind::NB_MULTINOMIAL:
      d.noun_filter = task == Task::ENTITY;
      break;
    case ModelKind::MAJORITY:
    case ModelKind::NAIVE_ALL_ENTITY:
      break;
  }
  d.validate();
  return d;
}

// --- labels -----------------------------------------------------------------

RelationLabelSpace::RelationLabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (!index_.emplace(labels_[i], i).second)
      throw std::invalid_argument("duplicate relation label " + labels_[i]);
}

RelationLabelSpace RelationLabelSpace::from_questions(const std::vector<AnnotatedQuestion>& qs) {
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (const auto& q : qs)
    if (seen.insert(q.gold_relation).second) labels.push_back(q.gold_relation);
  return RelationLabelSpace(std::move(labels));
}

std::optional<std::size_t> RelationLabelSpace::index(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// --- Model ------------------------------------------------------------------

namespace {

neural::Network make_network(const ArchitectureDescriptor& d, neural::Vocabulary vocab,
                             neural::Tensor embedding, std::size_t classes) {
  using neural::CellKind;
  neural::Network net(std::move(vocab), std::move(embedding), !d.freeze_embeddings,
                      d.task == Task::ENTITY ? neural::Head::Tagger : neural::Head::Classifier,
                      classes, d.max_len);
  switch (d.kind) {
    case ModelKind::BILSTM2:
    case ModelKind::BIGRU2: {
      const auto cell = d.kind == ModelKind::BILSTM2 ? CellKind::LSTM : CellKind::GRU;
      net.add_bi_recurrent(cell, d.hidden[0]);
      net.add_dropout(d.dropout[0]);
      net.add_bi_recurrent(cell, d.hidden[1]);
      net.add_dropout(d.dropout[1]);
      break;
    }
    case ModelKind::NT_BILSTM1:
      net.add_bi_recurrent(CellKind::LSTM, d.hidden[0]);
      net.add_dropout(d.dropout[0]);
      break;
    case ModelKind::CONV_GRU:
      // convolution reads the embedded sequence directly
      net.add_conv(d.conv_filters, d.conv_width);
      net.add_dropout(d.dropout[0]);
      net.add_bi_recurrent(CellKind::GRU, d.hidden[0]);
      net.add_dropout(d.dropout[1]);
      break;
    default:
      throw std::logic_error("not a neural model kind");
  }
  net.finish();
  return net;
}

std::size_t class_count(const ArchitectureDescriptor& d, const RelationLabelSpace& labels) {
  if (d.task == Task::ENTITY) return 2;
  if (labels.size() == 0) throw std::invalid_argument("relation model needs a non-empty label space");
  return labels.size();
}

}  // namespace

Model Model::build(const ArchitectureDescriptor& desc, const EmbeddingTable* embeddings,
                   const RelationLabelSpace& labels, std::uint64_t seed, PosLexicon lexicon) {
  desc.validate();
  Model m;
  m.desc_ = desc;
  m.labels_ = labels;
  m.lexicon_ = std::move(lexicon);
  if (is_neural(desc.kind)) {
    if (embeddings == nullptr) throw std::invalid_argument("neural models need embeddings");
    neural::Vocabulary vocab(*embeddings);
    auto matrix = vocab.matrix(*embeddings);
    m.network_ = make_network(desc, std::move(vocab), std::move(matrix), class_count(desc, labels));
    m.network_->initialize(derive_seed(seed, "init"), kInitRange);
  } else if (desc.kind == ModelKind::NB_MULTINOMIAL) {
    m.nb_ = MultinomialNB(class_count(desc, labels), desc.nb_alpha);
  } else if (desc.kind == ModelKind::MAJORITY) {
    m.label_counts_.assign(class_count(desc, labels), 0);
  }
  return m;
}

FilterResult Model::model_input(const Tokens& tokens,
                                const std::optional<std::vector<PosTag>>& pos_tags) const {
  if (desc_.noun_filter) {
    const auto tags = pos_tags ? *pos_tags : pos_tag(tokens, lexicon_);
    return noun_chunk_filter(tokens, tags);
  }
  FilterResult identity;
  identity.kept_tokens = tokens;
  identity.index_map.resize(tokens.size());
  std::iota(identity.index_map.begin(), identity.index_map.end(), std::size_t{0});
  return identity;
}

TagPrediction Model::predict_tags(const Tokens& tokens,
                                  const std::optional<std::vector<PosTag>>& pos_tags) const {
  if (desc_.task != Task::ENTITY) throw std::logic_error("predict_tags on a relation model");
  if (tokens.empty()) throw std::invalid_argument("predict_tags: empty question");

  TagPrediction out;
  if (desc_.kind == ModelKind::NAIVE_ALL_ENTITY) {
    out.tags.assign(tokens.size(), 1);
    out.mapped_tags = out.tags;
    return out;
  }

  const auto input = model_input(tokens, pos_tags);
  const auto& kept = input.kept_tokens;
  out.tags.assign(kept.size(), 0);
  out.degraded = input.degraded;
  if (network_) {
    const auto enc = network_->encode(kept);
    const auto probs = network_->predict(enc);
    for (std::size_t i = 0; i < enc.length; ++i)
      out.tags[i] = probs.at(i, 1) > probs.at(i, 0) ? 1 : 0;
  } else if (nb_) {
    for (std::size_t i = 0; i < kept.size(); ++i)
      out.tags[i] = static_cast<std::uint8_t>(nb_->predict(token_features(kept, i)).first);
  }

  out.mapped_tags.assign(tokens.size(), 0);
  for (std::size_t i = 0; i < kept.size(); ++i) out.mapped_tags[input.index_map[i]] = out.tags[i];

  if (std::none_of(out.tags.begin(), out.tags.end(), [](auto t) { return t != 0; })) {
    out.tags.assign(kept.size(), 1);
    out.mapped_tags.assign(tokens.size(), 1);
    out.degraded = true;
  }
  return out;
}

RelationPrediction Model::predict_relation(const Tokens& tokens) const {
  if (desc_.task != Task::RELATION) throw std::logic_error("predict_relation on an entity model");
  if (tokens.empty()) throw std::invalid_argument("predict_relation: empty question");
  if (network_) {
    const auto probs = network_->predict(network_->encode(tokens));
    const auto best = argmax(probs.row(0));
    return {labels_.label(best), probs.at(0, best)};
  }
  if (nb_) {
    auto [label, score] = nb_predict(*nb_, labels_, tokens);
    const auto scores = nb_->log_scores(tokens);
    double z = 0.0;
    for (double s : scores) z += std::exp(s - score);
    return {label, 1.0 / z};
  }
  if (desc_.kind == ModelKind::MAJORITY) {
    const auto total = std::accumulate(label_counts_.begin(), label_counts_.end(), std::size_t{0});
    if (total == 0) throw std::logic_error("majority model is untrained");
    std::size_t best = 0;
    for (std::size_t k = 1; k < label_counts_.size(); ++k)
      if (label_counts_[k] > label_counts_[best]) best = k;
    return {labels_.label(best),
            static_cast<double>(label_counts_[best]) / static_cast<double>(total)};
  }
  throw std::logic_error("model kind cannot predict relations");
}

std::size_t Model::trainable_parameter_count() const {
  return network_ ? network_->trainable_parameter_count() : 0;
}

void Model::write(std::ostream& out) const {
  out << "QAMODEL 1 " << desc_.encode() << '\n';
  out << "labels " << labels_.size() << '\n';
  for (const auto& l : labels_.labels()) out << l << '\n';
  out << "lexicon " << lexicon_.entries().size() << '\n';
  for (const auto& [token, tag] : lexicon_.entries()) out << token << '\t' << to_string(tag) << '\n';
  if (network_) {
    network_->write(out);
  } else if (nb_) {
    nb_->write(out);
  } else if (desc_.kind == ModelKind::MAJORITY) {
    out << "counts " << label_counts_.size() << '\n';
    for (auto c : label_counts_) out << c << '\n';
  }
  out << "end\n";
}

Model Model::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("QAMODEL 1 ", 0) != 0)
    throw DomainError("model file: missing 'QAMODEL 1' header");
  Model m;
  try {
    m.desc_ = ArchitectureDescriptor::parse(line.substr(10));
  } catch (const std::invalid_argument& e) {
    throw DomainError(std::string("model file: ") + e.what());
  }

  auto section = [&](const std::string& name) {
    std::string header;
    if (!std::getline(in, header)) throw DomainError("model file: missing " + name + " section");
    std::istringstream h(header);
    std::string tag;
    std::size_t n = 0;
    if (!(h >> tag >> n) || tag != name) throw DomainError("model file: expected " + name);
    return n;
  };

  std::vector<std::string> labels(section("labels"));
  for (auto& l : labels)
    if (!std::getline(in, l)) throw DomainError("model file: truncated labels");
  m.labels_ = RelationLabelSpace(std::move(labels));

  const auto n_lex = section("lexicon");
  for (std::size_t i = 0; i < n_lex; ++i) {
    if (!std::getline(in, line)) throw DomainError("model file: truncated lexicon");
    const auto tab = line.find('\t');
    const auto tag = tab == std::string::npos ? std::nullopt : parse_pos_tag(line.substr(tab + 1));
    if (!tag) throw DomainError("model file: bad lexicon line");
    m.lexicon_.add(line.substr(0, tab), *tag);
  }

  if (is_neural(m.desc_.kind)) {
    std::string tag;
    std::size_t n = 0, dim = 0;
    if (!(in >> tag >> n >> dim) || tag != "vocab") throw DomainError("model file: expected vocab");
    std::vector<std::string> tokens(n);
    for (auto& t : tokens) in >> t;
    neural::Vocabulary vocab(std::move(tokens), dim);
    neural::Tensor placeholder(vocab.size(), dim);
    m.network_ = make_network(m.desc_, std::move(vocab), std::move(placeholder),
                              class_count(m.desc_, m.labels_));
    m.network_->read(in);
  } else if (m.desc_.kind == ModelKind::NB_MULTINOMIAL) {
    m.nb_ = MultinomialNB::read(in);
  } else if (m.desc_.kind == ModelKind::MAJORITY) {
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "counts") throw DomainError("model file: expected counts");
    m.label_counts_.resize(n);
    for (auto& c : m.label_counts_) in >> c;
  }
  std::string end;
  if (!(in >> end) || end != "end") throw DomainError("model file: missing end marker");
  return m;
}

void Model::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write model file " + path.string());
  write(out);
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open model file " + path.string());
  return read(in);
}

// --- training ---------------------------------------------------------------

TrainResult train(Model& model, const std::vector<AnnotatedQuestion>& train_set,
                  const std::vector<AnnotatedQuestion>& valid_set, const TrainConfig& config) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  const auto& desc = model.desc_;
  if (desc.task == Task::RELATION)
    for (const auto& q : train_set)
      if (!model.labels_.index(q.gold_relation))
        throw std::invalid_argument("train: relation '" + q.gold_relation + "' not in label space");

  TrainResult result;
  auto record = [&](std::size_t epoch, double loss, double seconds) {
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss;
    entry.train_accuracy = accuracy(model, train_set);
    if (!valid_set.empty()) entry.valid_accuracy = accuracy(model, valid_set);
    entry.seconds = seconds;
    if (config.progress) {
      *config.progress << "epoch " << epoch << " loss " << loss << " train_acc "
                       << entry.train_accuracy;
      if (entry.valid_accuracy) *config.progress << " valid_acc " << *entry.valid_accuracy;
      *config.progress << '\n';
    }
    result.log.push_back(entry);
    return entry;
  };

  if (!model.network_) {
    const auto start = std::chrono::steady_clock::now();
    if (desc.kind == ModelKind::NB_MULTINOMIAL) {
      if (desc.task == Task::RELATION) {
        model.nb_ = nb_train(train_set, model.labels_, desc.nb_alpha);
      } else {
        MultinomialNB nb(2, desc.nb_alpha);
        for (const auto& q : train_set) {
          const auto input = model.model_input(q.tokens, q.pos_tags);
          for (std::size_t i = 0; i < input.kept_tokens.size(); ++i)
            nb.add(token_features(input.kept_tokens, i), q.gold_tags.at(input.index_map[i]));
        }
        model.nb_ = std::move(nb);
      }
    } else if (desc.kind == ModelKind::MAJORITY) {
      model.label_counts_.assign(model.labels_.size(), 0);
      for (const auto& q : train_set) ++model.label_counts_[*model.labels_.index(q.gold_relation)];
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    record(1, 0.0, elapsed.count());
    result.best_epoch = 1;
    return result;
  }

  auto& net = *model.network_;
  std::vector<neural::Example> examples;
  examples.reserve(train_set.size());
  for (const auto& q : train_set) examples.push_back(make_example(model, net, q));

  std::vector<bool> mask(net.params().size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = net.trainable(i);

  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "shuffle"));
  std::mt19937_64 dropout_rng(derive_seed(config.seed, "dropout"));
  neural::OptimizerState opt = config.optimizer;
  neural::Gradients grads = neural::zeros_like(net.params());
  const auto batch = std::max<std::size_t>(1, config.batch_size);

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  neural::ParameterSet best = net.params();
  double best_metric = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const auto end = std::min(order.size(), b + batch);
      const double weight = 1.0 / static_cast<double>(end - b);
      for (auto& g : grads) g.fill(0.0);
      for (std::size_t i = b; i < end; ++i)
        loss_sum += net.loss_and_gradient(examples[order[i]], config.l1_activity,
                                          neural::ForwardContext{true, &dropout_rng}, grads, weight);
      neural::optimizer_step(opt, net.params(), grads, mask);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    const auto entry =
        record(epoch, loss_sum / static_cast<double>(examples.size()), elapsed.count());
    const double metric = entry.valid_accuracy.value_or(entry.train_accuracy);
    if (metric > best_metric) {
      best_metric = metric;
      best = net.params();
      result.best_epoch = epoch;
    }
    if (config.stop_at_train_accuracy && entry.train_accuracy >= *config.stop_at_train_accuracy)
      break;
  }
  net.params() = std::move(best);
  return result;
}

// --- prediction helpers -----------------------------------------------------

Tokens entity_phrase(const TagSequence& tags, const Tokens& tokens) {
  if (tags.size() != tokens.size()) throw std::invalid_argument("entity_phrase: length mismatch");
  std::size_t best_start = 0, best_len = 0;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (!tags[i]) {
      ++i;
      continue;
    }
    const auto start = i;
    while (i < tags.size() && tags[i]) ++i;
    if (i - start > best_len) {
      best_len = i - start;
      best_start = start;
    }
  }
  if (best_len == 0) throw std::invalid_argument("entity_phrase: no entity tokens");
  return Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(best_start),
                tokens.begin() + static_cast<std::ptrdiff_t>(best_start + best_len));
}

double tagging_accuracy(const Model& model, const std::vector<AnnotatedQuestion>& questions) {
  if (questions.empty()) throw std::invalid_argument("accuracy over an empty set");
  const auto n = static_cast<std::int64_t>(questions.size());
  std::int64_t correct = 0;
#pragma omp parallel for reduction(+ : correct) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& q = questions[i];
    if (model.predict_tags(q.tokens, q.pos_tags).mapped_tags == q.gold_tags) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

double relation_accuracy(const Model& model, const std::vector<AnnotatedQuestion>& questions) {
  if (questions.empty()) throw std::invalid_argument("accuracy over an empty set");
  const auto n = static_cast<std::int64_t>(questions.size());
  std::int64_t correct = 0;
#pragma omp parallel for reduction(+ : correct) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& q = questions[i];
    if (model.predict_relation(q.tokens).label == q.gold_relation) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

MultinomialNB nb_train(const std::vector<AnnotatedQuestion>& questions,
                       const RelationLabelSpace& labels, double alpha) {
  if (questions.empty()) throw std::invalid_argument("nb_train: empty dataset");
  MultinomialNB nb(labels.size(), alpha);
  for (const auto& q : questions) {
    const auto label = labels.index(q.gold_relation);
    if (!label) throw std::invalid_argument("nb_train: unknown relation " + q.gold_relation);
    nb.add(q.tokens, *label);
  }
  return nb;
}

std::pair<std::string, double> nb_predict(const MultinomialNB& nb, const RelationLabelSpace& labels,
                                          const Tokens& tokens) {
  auto [cls, score] = nb.predict(tokens);
  return {labels.label(cls), score};
}

std::vector<std::string> token_features(const Tokens& tokens, std::size_t position) {
  return {"w=" + tokens.at(position), "p=" + (position > 0 ? tokens[position - 1] : "<s>"),
          "n=" + (position + 1 < tokens.size() ? tokens[position + 1] : "</s>")};
}

}  // namespace kbqa
