#include "kbqa/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "kbqa/corpus.hpp"
#include "kbqa/error.hpp"
#include "kbqa/eval.hpp"
#include "kbqa/index.hpp"
#include "kbqa/models.hpp"
#include "kbqa/pipeline.hpp"

namespace kbqa::cli {
namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(':', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool valid_value(ValueType type, const std::string& v) {
  switch (type) {
    case ValueType::UINT: {
      std::uint64_t x;
      return parse_number(v, x);
    }
    case ValueType::DOUBLE: {
      double x;
      return parse_number(v, x);
    }
    case ValueType::BOOL:
      return v == "0" || v == "1" || v == "true" || v == "false";
    case ValueType::SIZES:
      for (const auto& p : split_list(v)) {
        std::size_t x;
        if (!parse_number(p, x)) return false;
      }
      return true;
    case ValueType::DOUBLES:
      for (const auto& p : split_list(v)) {
        double x;
        if (!parse_number(p, x)) return false;
      }
      return true;
    case ValueType::OPTIMIZER:
      return neural::parse_optimizer_kind(v).has_value();
  }
  return false;
}

const ConfigKey& key_info(const std::string& key) {
  for (const auto& k : RunConfig::schema())
    if (k.name == key) return k;
  throw UsageError("unknown config key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (auto& c : f)
    if (c == '_') c = '-';
  return f;
}

struct VerbFlag {
  std::string name;
  bool required;
  std::string help;
};

const std::map<std::string, std::vector<VerbFlag>>& verb_flags() {
  static const std::map<std::string, std::vector<VerbFlag>> flags = {
      {"build-index",
       {{"facts", true, "facts TSV"}, {"aliases", true, "aliases TSV"}, {"out", true, "index file"}}},
      {"train",
       {{"facts", true, "facts TSV"},
        {"aliases", true, "aliases TSV"},
        {"questions", true, "questions TSV"},
        {"task", true, "entity or relation"},
        {"model", true, "model kind"},
        {"out", true, "model file"},
        {"embeddings", false, "word vectors (text format)"},
        {"lexicon", false, "POS lexicon"},
        {"log", false, "per-epoch log file"}}},
      {"eval",
       {{"facts", true, "facts TSV"},
        {"aliases", true, "aliases TSV"},
        {"questions", true, "questions TSV"},
        {"index", true, "index file"},
        {"entity-model", true, "entity model file"},
        {"relation-model", true, "relation model file"},
        {"out", true, "report path prefix (.txt and .tsv)"}}},
      {"ask",
       {{"question", true, "question text"},
        {"index", true, "index file"},
        {"entity-model", true, "entity model file"},
        {"relation-model", true, "relation model file"}}},
      {"gradcheck", {}},
      {"tune",
       {{"facts", true, "facts TSV"},
        {"aliases", true, "aliases TSV"},
        {"questions", true, "questions TSV"},
        {"task", true, "entity or relation"},
        {"model", true, "model kind"},
        {"embeddings", false, "word vectors (text format)"},
        {"lexicon", false, "POS lexicon"},
        {"out", false, "trace TSV"}}},
      {"benchmark",
       {{"facts", true, "facts TSV"},
        {"aliases", true, "aliases TSV"},
        {"questions", true, "questions TSV"},
        {"embeddings", false, "word vectors (text format)"},
        {"out", false, "report file"}}},
  };
  return flags;
}

// --- verb implementations ---------------------------------------------------

struct Data {
  KnowledgeBase kb;
  DatasetSplit split;
};

Data load_data(const Command& c) {
  Data d;
  d.kb = load_facts(c.options.at("facts"), c.options.at("aliases"));
  QuestionLoadOptions opts;
  opts.skip_untaggable = c.config.get_bool("skip_untaggable");
  const auto questions = load_questions(c.options.at("questions"), d.kb, opts);
  if (questions.empty()) throw DomainError("no questions loaded");
  d.split = split_dataset(questions, SplitRatios{}, c.config.get_uint("seed"));
  return d;
}

EmbeddingTable load_or_make_embeddings(const Command& c,
                                       const std::vector<AnnotatedQuestion>& train_set) {
  const auto dim = c.config.get_uint("embed_dim");
  const auto seed = c.config.get_uint("seed");
  if (auto it = c.options.find("embeddings"); it != c.options.end())
    return load_embeddings(it->second, dim, derive_seed(seed, "unk"));
  std::set<std::string> vocab;
  for (const auto& q : train_set) vocab.insert(q.tokens.begin(), q.tokens.end());
  return random_embeddings(vocab, dim, derive_seed(seed, "embeddings"));
}

PosLexicon load_lexicon(const Command& c) {
  if (auto it = c.options.find("lexicon"); it != c.options.end()) return PosLexicon::load(it->second);
  return {};
}

Task parse_task_flag(const Command& c) {
  auto t = parse_task(c.options.at("task"));
  if (!t) throw UsageError("--task: expected entity or relation, got '" + c.options.at("task") + "'");
  return *t;
}

ModelKind parse_kind_flag(const Command& c) {
  auto k = parse_model_kind(c.options.at("model"));
  if (!k) throw UsageError("--model: unknown model kind '" + c.options.at("model") + "'");
  return *k;
}

ArchitectureDescriptor descriptor_from(const Command& c, Task task, ModelKind kind) {
  ArchitectureDescriptor d;
  try {
    d = default_descriptor(task, kind, c.config.get_uint("desk_divisor"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto& cfg = c.config;
  if (cfg.has("hidden")) d.hidden = cfg.get_sizes("hidden");
  if (cfg.has("dropout")) d.dropout = cfg.get_doubles("dropout");
  if (cfg.has("conv_filters") && kind == ModelKind::CONV_GRU) d.conv_filters = cfg.get_uint("conv_filters");
  if (cfg.has("conv_width") && kind == ModelKind::CONV_GRU) d.conv_width = cfg.get_uint("conv_width");
  d.max_len = cfg.get_uint("max_len");
  d.freeze_embeddings = cfg.get_bool("freeze_embeddings");
  d.nb_alpha = cfg.get_double("nb_alpha");
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return d;
}

TrainConfig train_config(const Command& c) {
  TrainConfig t;
  t.l1_activity = c.config.get_double("l1_activity");
  t.seed = c.config.get_uint("seed");
  t.epochs = c.config.get_uint("epochs");
  t.batch_size = c.config.get_uint("batch_size");
  t.optimizer.kind = *neural::parse_optimizer_kind(c.config.get("optimizer"));
  t.optimizer.learning_rate = c.config.get_double("learning_rate");
  t.optimizer.weight_decay = c.config.get_double("weight_decay");
  return t;
}

RelationLabelSpace labels_for(Task task, const std::vector<AnnotatedQuestion>& train_set) {
  return task == Task::RELATION ? RelationLabelSpace::from_questions(train_set) : RelationLabelSpace{};
}

void write_log(std::ostream& out, const TrainResult& result) {
  out << "epoch\ttrain_loss\ttrain_accuracy\tvalid_accuracy\n";
  char buf[128];
  for (const auto& e : result.log) {
    std::snprintf(buf, sizeof buf, "%zu\t%.10g\t%.6f\t", e.epoch, e.train_loss, e.train_accuracy);
    out << buf;
    if (e.valid_accuracy) {
      std::snprintf(buf, sizeof buf, "%.6f", *e.valid_accuracy);
      out << buf;
    } else {
      out << "N/A";
    }
    out << '\n';
  }
  out << "best_epoch\t" << result.best_epoch << '\n';
}

int do_build_index(const Command& c, std::ostream& out) {
  const auto kb = load_facts(c.options.at("facts"), c.options.at("aliases"));
  const auto entity = EntityIndex::build(kb);
  const auto reach = ReachIndex::build(kb);
  IndexFile::save(c.options.at("out"), entity, reach);
  out << "indexed " << entity.alias_count() << " aliases, " << kb.facts.size() << " facts\n";
  return 0;
}

int do_train(const Command& c, std::ostream& out) {
  const auto task = parse_task_flag(c);
  const auto kind = parse_kind_flag(c);
  const auto desc = descriptor_from(c, task, kind);
  const auto data = load_data(c);
  std::optional<EmbeddingTable> embeddings;
  if (is_neural(kind)) embeddings = load_or_make_embeddings(c, data.split.train);
  auto model = Model::build(desc, embeddings ? &*embeddings : nullptr,
                            labels_for(task, data.split.train), c.config.get_uint("seed"),
                            load_lexicon(c));
  auto config = train_config(c);
  config.progress = &out;
  const auto result = train(model, data.split.train, data.split.valid, config);
  model.save(c.options.at("out"));
  if (auto it = c.options.find("log"); it != c.options.end()) {
    std::ofstream log(it->second);
    if (!log) throw DomainError("cannot write log file " + it->second);
    write_log(log, result);
  }
  out << "saved " << c.options.at("out") << " (best epoch " << result.best_epoch << ", "
      << model.trainable_parameter_count() << " trainable parameters)\n";
  return 0;
}

int do_eval(const Command& c, std::ostream& out) {
  const auto entity_model = Model::load(c.options.at("entity-model"));
  const auto relation_model = Model::load(c.options.at("relation-model"));
  if (entity_model.descriptor().task != Task::ENTITY)
    throw DomainError(c.options.at("entity-model") + " is not an entity model");
  if (relation_model.descriptor().task != Task::RELATION)
    throw DomainError(c.options.at("relation-model") + " is not a relation model");
  EntityIndex entity_index;
  ReachIndex reach_index;
  IndexFile::load(c.options.at("index"), entity_index, reach_index);
  const auto data = load_data(c);
  if (data.split.test.empty()) throw DomainError("test split is empty");

  const auto seed = c.config.get_uint("seed");
  auto majority = Model::build(default_descriptor(Task::RELATION, ModelKind::MAJORITY), nullptr,
                               RelationLabelSpace::from_questions(data.split.train), seed);
  TrainConfig quiet;
  train(majority, data.split.train, {}, quiet);
  const auto naive = Model::build(default_descriptor(Task::ENTITY, ModelKind::NAIVE_ALL_ENTITY),
                                  nullptr, {}, seed);

  const auto report = evaluate({&entity_model, &relation_model, &majority, &naive}, data.split.test,
                               EvalSubject{&entity_model, &relation_model, &entity_index,
                                           c.config.get_uint("k")});
  const auto prefix = c.options.at("out");
  std::ofstream text(prefix + ".txt"), tsv(prefix + ".tsv");
  if (!text || !tsv) throw DomainError("cannot write report files at " + prefix);
  report.write_text(text);
  report.write_tsv(tsv);
  report.write_text(out);
  return 0;
}

int do_ask(const Command& c, std::ostream& out) {
  const auto entity_model = Model::load(c.options.at("entity-model"));
  const auto relation_model = Model::load(c.options.at("relation-model"));
  EntityIndex entity_index;
  ReachIndex reach_index;
  IndexFile::load(c.options.at("index"), entity_index, reach_index);
  const auto tokens = tokenize(c.options.at("question"));
  if (tokens.empty()) throw DomainError("question has no tokens");
  const auto query = build_structured_query(entity_model, relation_model, tokens, std::nullopt);
  const auto result = answer(query, entity_index, reach_index, c.config.get_uint("k"));
  out << "query: {entity: " << join(query.entity_phrase) << ", relation: " << query.relation << "}\n";
  if (!result) {
    out << "no answer\n";
    return 0;
  }
  char score[32];
  std::snprintf(score, sizeof score, "%.6f", result->score);
  out << "answer: " << result->object << '\n'
      << "fact: " << result->supporting_fact.subject << '\t' << result->supporting_fact.relation
      << '\t' << result->supporting_fact.object << '\n'
      << "score: " << score << '\n'
      << "degraded: " << (result->degraded ? "yes" : "no") << '\n';
  return 0;
}

int do_gradcheck(const Command& c, std::ostream& out) {
  const auto result = gradient_suite(c.config.get_uint("seed"));
  char line[160];
  for (const auto& e : result.entries) {
    std::snprintf(line, sizeof line, "%-12s %s max_rel_err=%.3e worst=%s\n", e.model.c_str(),
                  e.report.pass ? "PASS" : "FAIL", e.report.max_relative_error,
                  e.report.worst.c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "gradient suite: %s in %.2f s\n", result.pass ? "PASS" : "FAIL",
                result.seconds);
  out << line;
  return result.pass ? 0 : 1;
}

int do_tune(const Command& c, std::ostream& out) {
  const auto task = parse_task_flag(c);
  const auto kind = parse_kind_flag(c);
  if (!is_neural(kind)) throw UsageError("tune: neural model kinds only");
  const auto base = descriptor_from(c, task, kind);
  const auto data = load_data(c);
  const auto embeddings = load_or_make_embeddings(c, data.split.train);
  const auto labels = labels_for(task, data.split.train);
  const auto lexicon = load_lexicon(c);
  const auto& held_out = data.split.valid.empty() ? data.split.train : data.split.valid;

  TuneSpace space = {{"learning_rate", {0.0001, 0.0003, 0.0007, 0.001, 0.003}},
                     {"l1_activity", {0.0, 0.001, 0.01, 0.1}},
                     {"dropout", {0.0, 0.1, 0.2}}};
  const bool two_layer = kind == ModelKind::BILSTM2 || kind == ModelKind::BIGRU2;
  if (two_layer) space.push_back({"hidden_ratio", {2.5, 3.1, 3.5, 4.0}});

  const auto objective = [&](const TuneConfig& cfg) {
    auto desc = base;
    for (auto& r : desc.dropout) r = cfg.at("dropout");
    if (two_layer)
      desc.hidden[0] = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(cfg.at("hidden_ratio") * desc.hidden[1])));
    auto tc = train_config(c);
    tc.optimizer.learning_rate = cfg.at("learning_rate");
    tc.l1_activity = cfg.at("l1_activity");
    auto model = Model::build(desc, &embeddings, labels, tc.seed, lexicon);
    train(model, data.split.train, {}, tc);
    return task == Task::ENTITY ? tagging_accuracy(model, held_out)
                                : relation_accuracy(model, held_out);
  };
  const auto result =
      basin_hop_tune(space, objective, c.config.get_uint("budget"), c.config.get_uint("seed"));

  std::ostringstream trace;
  trace << "step\tscore";
  for (const auto& d : space) trace << '\t' << d.name;
  trace << '\n';
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    trace << i + 1 << '\t' << result.trace[i].score;
    for (const auto& d : space) trace << '\t' << result.trace[i].config.at(d.name);
    trace << '\n';
  }
  if (auto it = c.options.find("out"); it != c.options.end()) {
    std::ofstream f(it->second);
    if (!f) throw DomainError("cannot write " + it->second);
    f << trace.str();
  }
  out << trace.str() << "best:";
  for (const auto& [name, value] : result.best) out << ' ' << name << '=' << value;
  if (result.best_score) out << " score=" << *result.best_score;
  out << '\n';
  return 0;
}

int do_benchmark(const Command& c, std::ostream& out) {
  const auto data = load_data(c);
  const auto embeddings = load_or_make_embeddings(c, data.split.train);
  auto conv = descriptor_from(c, Task::RELATION, ModelKind::CONV_GRU);
  auto gru = descriptor_from(c, Task::RELATION, ModelKind::BIGRU2);
  // matched hidden size: both BIGRU2 layers take the CONV_GRU width
  gru.hidden = {conv.hidden[0], conv.hidden[0]};
  const auto report = benchmark_training({conv, gru}, embeddings, data.split.train, train_config(c));
  if (auto it = c.options.find("out"); it != c.options.end()) {
    std::ofstream f(it->second);
    if (!f) throw DomainError("cannot write " + it->second);
    report.write(f);
  }
  report.write(out);
  return 0;
}

}  // namespace

const std::vector<ConfigKey>& RunConfig::schema() {
  static const std::vector<ConfigKey> keys = {
      {"seed", ValueType::UINT, "0", "master random seed"},
      {"max_len", ValueType::UINT, "36", "padded sequence length"},
      {"hidden", ValueType::SIZES, "", "recurrent widths, ':'-separated"},
      {"dropout", ValueType::DOUBLES, "", "dropout rates, ':'-separated"},
      {"conv_filters", ValueType::UINT, "50", "convolution filters"},
      {"conv_width", ValueType::UINT, "2", "convolution window"},
      {"l1_activity", ValueType::DOUBLE, "0.01", "L1 activity penalty"},
      {"optimizer", ValueType::OPTIMIZER, "adam_coupled", "sgd, adam_coupled or adam_decoupled"},
      {"learning_rate", ValueType::DOUBLE, "0.0007", "learning rate"},
      {"weight_decay", ValueType::DOUBLE, "0", "weight decay"},
      {"epochs", ValueType::UINT, "10", "training epochs"},
      {"batch_size", ValueType::UINT, "32", "minibatch size"},
      {"k", ValueType::UINT, "50", "candidate cap"},
      {"desk_divisor", ValueType::UINT, "1", "divide the published hidden widths"},
      {"embed_dim", ValueType::UINT, "300", "embedding width"},
      {"freeze_embeddings", ValueType::BOOL, "1", "keep embeddings fixed"},
      {"nb_alpha", ValueType::DOUBLE, "1", "naive Bayes smoothing"},
      {"skip_untaggable", ValueType::BOOL, "0", "drop questions without an alias match"},
      {"budget", ValueType::UINT, "20", "tuning evaluations"},
  };
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& info = key_info(key);
  if (!valid_value(info.type, value))
    throw UsageError("config key '" + key + "': invalid value '" + value + "'");
  values_[key] = value;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string RunConfig::get(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  return key_info(key).default_value;
}

std::uint64_t RunConfig::get_uint(const std::string& key) const {
  std::uint64_t v = 0;
  parse_number(get(key), v);
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  double v = 0.0;
  parse_number(get(key), v);
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto v = get(key);
  return v == "1" || v == "true";
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& p : split_list(get(key))) {
    std::size_t v = 0;
    parse_number(p, v);
    out.push_back(v);
  }
  return out;
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split_list(get(key))) {
    double v = 0.0;
    parse_number(p, v);
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::dump() const {
  std::string s;
  for (const auto& k : schema()) s += k.name + "=" + get(k.name) + "\n";
  return s;
}

Command parse_args(int argc, const char* const* argv) {
  CLI::App app{"Knowledge-base question answering", "qa"};
  app.require_subcommand(1, 1);

  std::map<std::string, std::pair<CLI::App*, std::map<std::string, std::string>>> verbs;
  std::map<std::string, std::map<std::string, std::string>> config_values;
  std::map<std::string, std::string> config_files;
  for (const auto& [verb, flags] : verb_flags()) {
    auto* sub = app.add_subcommand(verb);
    auto& entry = verbs[verb];
    entry.first = sub;
    for (const auto& f : flags) {
      auto* opt = sub->add_option("--" + f.name, entry.second[f.name], f.help);
      if (f.required) opt->required();
    }
    for (const auto& k : RunConfig::schema()) {
      std::string name = "--" + flag_name(k.name);
      if (flag_name(k.name) != k.name) name += ",--" + k.name;
      sub->add_option(name, config_values[verb][k.name], k.help);
    }
    sub->add_option("--config", config_files[verb], "key=value settings file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    throw HelpRequested(subs.empty() ? app.help() : subs.front()->help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  Command command;
  auto* chosen = app.get_subcommands().front();
  command.verb = chosen->get_name();
  for (const auto& [name, value] : verbs[command.verb].second)
    if (chosen->count("--" + name) > 0) command.options[name] = value;
  if (chosen->count("--config") > 0) command.config.merge_file(config_files[command.verb]);
  for (const auto& k : RunConfig::schema())
    if (chosen->count("--" + flag_name(k.name)) > 0)
      command.config.set(k.name, config_values[command.verb][k.name]);
  return command;
}

int run(const Command& command, std::ostream& out, std::ostream& err) {
  try {
    if (command.verb == "build-index") return do_build_index(command, out);
    if (command.verb == "train") return do_train(command, out);
    if (command.verb == "eval") return do_eval(command, out);
    if (command.verb == "ask") return do_ask(command, out);
    if (command.verb == "gradcheck") return do_gradcheck(command, out);
    if (command.verb == "tune") return do_tune(command, out);
    if (command.verb == "benchmark") return do_benchmark(command, out);
    err << "error: unknown verb '" << command.verb << "'\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Command command;
  try {
    command = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return run(command, out, err);
}

}  // namespace kbqa::cli
