#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kbqa/corpus.hpp"

namespace kbqa {

inline constexpr std::size_t kMaxGram = 3;
inline constexpr std::size_t kDefaultCandidateCap = 50;

struct Posting {
  std::string entity;
  std::string alias;
  double weight = 0.0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

/// n-gram (sizes 1..3) inverted index over entity aliases. Each alias is one
/// document; weights are length-normalized tf times smoothed idf,
/// idf = ln((1 + N) / (1 + df)) + 1.
class EntityIndex {
 public:
  EntityIndex() = default;

  static EntityIndex build(const KnowledgeBase& kb);

  std::size_t alias_count() const { return alias_count_; }
  std::size_t document_frequency(const std::string& gram) const;
  const std::vector<Posting>* postings(const std::string& gram) const;
  const std::map<std::string, std::vector<Posting>>& all_postings() const { return postings_; }
  const std::map<std::string, std::size_t>& all_df() const { return df_; }

  friend bool operator==(const EntityIndex&, const EntityIndex&) = default;

 private:
  friend class IndexFile;
  std::size_t alias_count_ = 0;
  std::map<std::string, std::size_t> df_;
  std::map<std::string, std::vector<Posting>> postings_;  // sorted by (entity, alias)
};

inline EntityIndex build_entity_index(const KnowledgeBase& kb) { return EntityIndex::build(kb); }

struct Candidate {
  std::string entity;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Sorted by descending score, ties by ascending entity id; at most k entries.
using CandidateSet = std::vector<Candidate>;

CandidateSet query_entity_index(const EntityIndex& index, const Tokens& phrase, std::size_t k);

struct Edge {
  std::string relation;
  std::string object;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class ReachIndex {
 public:
  ReachIndex() = default;

  static ReachIndex build(const KnowledgeBase& kb);

  const std::vector<Edge>& edges(const std::string& entity) const;
  const std::map<std::string, std::vector<Edge>>& all_edges() const { return edges_; }
  bool empty() const { return edges_.empty(); }

  friend bool operator==(const ReachIndex&, const ReachIndex&) = default;

 private:
  friend class IndexFile;
  std::map<std::string, std::vector<Edge>> edges_;  // per key: input order
};

inline ReachIndex build_reach_index(const KnowledgeBase& kb) { return ReachIndex::build(kb); }

struct AnswerCandidate {
  std::string entity;
  std::string relation;
  std::string object;
  double score = 0.0;

  friend bool operator==(const AnswerCandidate&, const AnswerCandidate&) = default;
};

std::vector<AnswerCandidate> query_reach(const ReachIndex& index, const CandidateSet& candidates,
                                         const std::string& relation);

/// Both indexes in one versioned text file (`QAIDX 1`). Output is
/// byte-reproducible for a given knowledge base.
class IndexFile {
 public:
  static void write(std::ostream& out, const EntityIndex& entity, const ReachIndex& reach);
  static void read(std::istream& in, EntityIndex& entity, ReachIndex& reach);
  static void save(const std::filesystem::path& path, const EntityIndex& entity,
                   const ReachIndex& reach);
  static void load(const std::filesystem::path& path, EntityIndex& entity, ReachIndex& reach);
};

}  // namespace kbqa
