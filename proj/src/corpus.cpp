#include "kbqa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kbqa/error.hpp"

namespace kbqa {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(line, line_no);
  }
}

}  // namespace

std::string normalize_alias(std::string_view alias) { return join(tokenize(alias)); }

KnowledgeBase load_facts(const std::filesystem::path& facts_path,
                         const std::filesystem::path& aliases_path) {
  KnowledgeBase kb;
  const auto facts_name = facts_path.string();
  for_each_line(facts_path, [&](const std::string& line, std::size_t line_no) {
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(facts_name, line_no,
                       "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    for (const auto& f : fields)
      if (f.empty()) throw ParseError(facts_name, line_no, "empty field");
    kb.facts.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  });

  const auto aliases_name = aliases_path.string();
  for_each_line(aliases_path, [&](const std::string& line, std::size_t line_no) {
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw ParseError(aliases_name, line_no,
                       "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(aliases_name, line_no, "empty entity id");
    auto alias = normalize_alias(fields[1]);
    if (alias.empty()) throw ParseError(aliases_name, line_no, "alias is empty after normalization");
    kb.aliases[fields[0]].insert(std::move(alias));
  });

  for (const auto& fact : kb.facts)
    if (!kb.aliases.contains(fact.subject))
      throw IntegrityError("fact subject '" + fact.subject + "' has no alias");
  return kb;
}

void save_facts(const KnowledgeBase& kb, const std::filesystem::path& facts_path,
                const std::filesystem::path& aliases_path) {
  std::ofstream facts(facts_path);
  for (const auto& f : kb.facts) facts << f.subject << '\t' << f.relation << '\t' << f.object << '\n';
  std::ofstream aliases(aliases_path);
  for (const auto& [entity, names] : kb.aliases)
    for (const auto& name : names) aliases << entity << '\t' << name << '\n';
  if (!facts || !aliases) throw DomainError("failed to write knowledge base");
}

TagSequence derive_gold_tags(const Tokens& tokens, const std::set<std::string>& aliases) {
  if (tokens.empty()) throw TaggingError("cannot tag an empty question");

  std::size_t best_len = 0;
  std::size_t best_start = 0;
  const std::string* best_alias = nullptr;
  for (const auto& alias : aliases) {  // ordered: lexicographic ties resolve first-seen
    const auto alias_tokens = tokenize(alias);
    const auto n = alias_tokens.size();
    if (n == 0 || n > tokens.size()) continue;
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      if (!std::equal(alias_tokens.begin(), alias_tokens.end(), tokens.begin() + start)) continue;
      if (n > best_len || (n == best_len && start < best_start)) {
        best_len = n;
        best_start = start;
        best_alias = &alias;
      }
      break;  // later starts of the same alias never win
    }
  }
  if (best_alias == nullptr)
    throw TaggingError("no alias matches question '" + join(tokens) + "'");

  TagSequence tags(tokens.size(), 0);
  std::fill_n(tags.begin() + static_cast<std::ptrdiff_t>(best_start), best_len, 1);
  return tags;
}

std::vector<AnnotatedQuestion> load_questions(const std::filesystem::path& path,
                                              const KnowledgeBase& kb,
                                              QuestionLoadOptions options) {
  std::vector<AnnotatedQuestion> out;
  const auto name = path.string();
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    auto fields = split_tabs(line);
    if (fields.size() != 4 && fields.size() != 5)
      throw ParseError(name, line_no,
                       "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    AnnotatedQuestion q;
    q.gold_subject = std::move(fields[0]);
    q.gold_relation = std::move(fields[1]);
    q.gold_object = std::move(fields[2]);
    q.text = std::move(fields[3]);
    if (q.gold_subject.empty() || q.gold_relation.empty())
      throw ParseError(name, line_no, "empty subject or relation");
    q.tokens = tokenize(q.text);

    if (fields.size() == 5) {
      std::istringstream tag_stream(fields[4]);
      std::vector<PosTag> tags;
      std::string tag_name;
      while (tag_stream >> tag_name) {
        auto tag = parse_pos_tag(tag_name);
        if (!tag) throw ParseError(name, line_no, "unknown POS tag '" + tag_name + "'");
        tags.push_back(*tag);
      }
      if (tags.size() != q.tokens.size())
        throw ParseError(name, line_no, "POS column length differs from token count");
      q.pos_tags = std::move(tags);
    }

    const auto aliases = kb.aliases.find(q.gold_subject);
    try {
      if (aliases == kb.aliases.end())
        throw TaggingError("subject '" + q.gold_subject + "' has no alias");
      q.gold_tags = derive_gold_tags(q.tokens, aliases->second);
    } catch (const TaggingError& e) {
      if (options.skip_untaggable) return;
      throw TaggingError(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(q));
  });
  return out;
}

DatasetSplit split_dataset(const std::vector<AnnotatedQuestion>& questions, SplitRatios ratios,
                           std::uint64_t seed) {
  if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0)
    throw std::invalid_argument("split ratios must be non-negative");
  if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");

  const auto n = questions.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "split"));
  std::shuffle(order.begin(), order.end(), rng);

  // Guard against products like 0.1*30 landing a hair under an integer.
  auto portion = [n](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  const auto n_valid = portion(ratios.valid);
  const auto n_test = portion(ratios.test);
  const auto n_train = n - n_valid - n_test;

  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = questions[order[i]];
    if (i < n_train)
      split.train.push_back(q);
    else if (i < n_train + n_valid)
      split.valid.push_back(q);
    else
      split.test.push_back(q);
  }
  return split;
}

EmbeddingTable::EmbeddingTable(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), unk_(dimension) {
  if (dimension == 0) throw std::invalid_argument("embedding dimension must be positive");
  std::mt19937_64 rng(derive_seed(seed, "unk"));
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (auto& v : unk_) v = dist(rng);
}

void EmbeddingTable::insert(const std::string& token, std::vector<double> vector) {
  if (vector.size() != dimension_)
    throw ShapeError("embedding for '" + token + "' has " + std::to_string(vector.size()) +
                     " values, expected " + std::to_string(dimension_));
  if (!vectors_.emplace(token, std::move(vector)).second)
    throw std::invalid_argument("duplicate embedding token '" + token + "'");
}

std::span<const double> EmbeddingTable::lookup(const std::string& token) const {
  if (auto it = vectors_.find(token); it != vectors_.end()) return it->second;
  return unk_;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim,
                               std::uint64_t seed) {
  EmbeddingTable table(expected_dim, seed);
  const auto name = path.string();
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    std::istringstream in(line);
    std::string token;
    in >> token;
    std::vector<double> values;
    std::string field;
    while (in >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError(name, line_no, "bad number '" + field + "'");
      }
    }
    if (values.size() != expected_dim)
      throw ParseError(name, line_no,
                       "dimension " + std::to_string(values.size()) + ", expected " +
                           std::to_string(expected_dim));
    if (table.contains(token)) throw ParseError(name, line_no, "duplicate token '" + token + "'");
    table.insert(token, std::move(values));
  });
  return table;
}

EmbeddingTable random_embeddings(const std::set<std::string>& vocabulary, std::size_t dim,
                                 std::uint64_t seed, double scale) {
  EmbeddingTable table(dim, seed);
  std::mt19937_64 rng(derive_seed(seed, "embeddings"));
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (const auto& token : vocabulary) {
    std::vector<double> v(dim);
    for (auto& x : v) x = dist(rng);
    table.insert(token, std::move(v));
  }
  return table;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) {
  // FNV-1a over the component name, folded into a splitmix64 round.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : component) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace kbqa
