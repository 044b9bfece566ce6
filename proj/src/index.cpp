#include "kbqa/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "kbqa/error.hpp"

namespace kbqa {

EntityIndex EntityIndex::build(const KnowledgeBase& kb) {
  EntityIndex index;
  for (const auto& [entity, aliases] : kb.aliases) index.alias_count_ += aliases.size();
  if (index.alias_count_ == 0) throw std::invalid_argument("entity index needs at least one alias");

  struct Doc {
    const std::string* entity;
    const std::string* alias;
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
  };
  std::vector<Doc> docs;
  for (const auto& [entity, aliases] : kb.aliases) {
    for (const auto& alias : aliases) {
      Doc doc{&entity, &alias, {}, 0};
      for (auto& gram : ngrams(tokenize(alias), kMaxGram)) {
        ++doc.counts[gram];
        ++doc.total;
      }
      for (const auto& [gram, count] : doc.counts) ++index.df_[gram];
      docs.push_back(std::move(doc));
    }
  }

  const auto n = static_cast<double>(index.alias_count_);
  for (const auto& doc : docs) {
    for (const auto& [gram, count] : doc.counts) {
      const double tf = static_cast<double>(count) / static_cast<double>(doc.total);
      const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(index.df_[gram]))) + 1.0;
      index.postings_[gram].push_back({*doc.entity, *doc.alias, tf * idf});
    }
  }
  // docs are visited in (entity, alias) order already; postings inherit it.
  return index;
}

std::size_t EntityIndex::document_frequency(const std::string& gram) const {
  auto it = df_.find(gram);
  return it == df_.end() ? 0 : it->second;
}

const std::vector<Posting>* EntityIndex::postings(const std::string& gram) const {
  auto it = postings_.find(gram);
  return it == postings_.end() ? nullptr : &it->second;
}

CandidateSet query_entity_index(const EntityIndex& index, const Tokens& phrase, std::size_t k) {
  if (k == 0) throw std::invalid_argument("candidate cap must be positive");
  std::map<std::string, double> scores;
  for (const auto& gram : ngrams(phrase, kMaxGram)) {
    const auto* list = index.postings(gram);
    if (list == nullptr) continue;
    // Per entity, the best alias weight for this gram. Postings are grouped by entity.
    std::size_t i = 0;
    while (i < list->size()) {
      const auto& entity = (*list)[i].entity;
      double best = (*list)[i].weight;
      for (++i; i < list->size() && (*list)[i].entity == entity; ++i)
        best = std::max(best, (*list)[i].weight);
      scores[entity] += best;
    }
  }

  CandidateSet out;
  out.reserve(scores.size());
  for (auto& [entity, score] : scores) out.push_back({entity, score});
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (out.size() > k) out.resize(k);
  return out;
}

ReachIndex ReachIndex::build(const KnowledgeBase& kb) {
  ReachIndex index;
  for (const auto& fact : kb.facts) index.edges_[fact.subject].push_back({fact.relation, fact.object});
  return index;
}

const std::vector<Edge>& ReachIndex::edges(const std::string& entity) const {
  static const std::vector<Edge> kNone;
  auto it = edges_.find(entity);
  return it == edges_.end() ? kNone : it->second;
}

std::vector<AnswerCandidate> query_reach(const ReachIndex& index, const CandidateSet& candidates,
                                         const std::string& relation) {
  std::vector<AnswerCandidate> out;
  for (const auto& candidate : candidates)
    for (const auto& edge : index.edges(candidate.entity))
      if (edge.relation == relation)
        out.push_back({candidate.entity, edge.relation, edge.object, candidate.score});
  return out;
}

namespace {

std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

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

class SectionReader {
 public:
  explicit SectionReader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) throw ParseError("index", line_no_ + 1, "unexpected end of file");
    ++line_no_;
    return s;
  }

  std::size_t header(const std::string& name) {
    std::istringstream h(line());
    std::string tag;
    std::size_t count = 0;
    if (!(h >> tag >> count) || tag != name)
      throw ParseError("index", line_no_, "expected section '" + name + "'");
    return count;
  }

  std::vector<std::string> fields(std::size_t expected) {
    auto f = split_tabs(line());
    if (f.size() != expected) throw ParseError("index", line_no_, "wrong field count");
    return f;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void IndexFile::write(std::ostream& out, const EntityIndex& entity, const ReachIndex& reach) {
  out << "QAIDX 1\n";
  out << "aliases " << entity.alias_count_ << '\n';
  out << "df " << entity.df_.size() << '\n';
  for (const auto& [gram, df] : entity.df_) out << gram << '\t' << df << '\n';
  std::size_t n_postings = 0;
  for (const auto& [gram, list] : entity.postings_) n_postings += list.size();
  out << "postings " << n_postings << '\n';
  for (const auto& [gram, list] : entity.postings_)
    for (const auto& p : list)
      out << gram << '\t' << p.entity << '\t' << p.alias << '\t' << format_weight(p.weight) << '\n';
  std::size_t n_edges = 0;
  for (const auto& [subject, list] : reach.edges_) n_edges += list.size();
  out << "edges " << n_edges << '\n';
  for (const auto& [subject, list] : reach.edges_)
    for (const auto& e : list) out << subject << '\t' << e.relation << '\t' << e.object << '\n';
}

void IndexFile::read(std::istream& in, EntityIndex& entity, ReachIndex& reach) {
  SectionReader reader(in);
  if (reader.line() != "QAIDX 1") throw ParseError("index", 1, "missing 'QAIDX 1' header");
  EntityIndex e;
  ReachIndex r;
  e.alias_count_ = reader.header("aliases");
  for (std::size_t i = 0, n = reader.header("df"); i < n; ++i) {
    auto f = reader.fields(2);
    e.df_[f[0]] = std::stoul(f[1]);
  }
  for (std::size_t i = 0, n = reader.header("postings"); i < n; ++i) {
    auto f = reader.fields(4);
    e.postings_[f[0]].push_back({f[1], f[2], std::stod(f[3])});
  }
  for (std::size_t i = 0, n = reader.header("edges"); i < n; ++i) {
    auto f = reader.fields(3);
    r.edges_[f[0]].push_back({f[1], f[2]});
  }
  entity = std::move(e);
  reach = std::move(r);
}

void IndexFile::save(const std::filesystem::path& path, const EntityIndex& entity,
                     const ReachIndex& reach) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write index file " + path.string());
  write(out, entity, reach);
}

void IndexFile::load(const std::filesystem::path& path, EntityIndex& entity, ReachIndex& reach) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open index file " + path.string());
  read(in, entity, reach);
}

}  // namespace kbqa
