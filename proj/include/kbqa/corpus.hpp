#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kbqa/textproc.hpp"

namespace kbqa {

struct Fact {
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

struct KnowledgeBase {
  std::vector<Fact> facts;
  std::map<std::string, std::set<std::string>> aliases;  // entity-id -> normalized aliases
};

/// Reads `subject\trelation\tobject` facts and `entity\talias` lines. Aliases
/// are normalized through tokenize(); every fact subject needs an alias.
KnowledgeBase load_facts(const std::filesystem::path& facts_path,
                         const std::filesystem::path& aliases_path);

void save_facts(const KnowledgeBase& kb, const std::filesystem::path& facts_path,
                const std::filesystem::path& aliases_path);

std::string normalize_alias(std::string_view alias);

using TagSequence = std::vector<std::uint8_t>;

struct AnnotatedQuestion {
  std::string text;
  Tokens tokens;
  std::string gold_subject;
  std::string gold_relation;
  std::string gold_object;
  TagSequence gold_tags;
  std::optional<std::vector<PosTag>> pos_tags;  // pre-annotated, overrides pos_tag()
};

/// Marks the longest token span equal to some alias. Ties go to the earliest
/// start, then the lexicographically smaller alias. Throws TaggingError when
/// no alias occurs.
TagSequence derive_gold_tags(const Tokens& tokens, const std::set<std::string>& aliases);

struct QuestionLoadOptions {
  bool skip_untaggable = false;
};

/// Reads `subject\trelation\tobject\tquestion[\tPOS POS ...]` lines.
std::vector<AnnotatedQuestion> load_questions(const std::filesystem::path& path,
                                              const KnowledgeBase& kb,
                                              QuestionLoadOptions options = {});

struct SplitRatios {
  double train = 0.7;
  double valid = 0.1;
  double test = 0.2;
};

struct DatasetSplit {
  std::vector<AnnotatedQuestion> train;
  std::vector<AnnotatedQuestion> valid;
  std::vector<AnnotatedQuestion> test;
};

DatasetSplit split_dataset(const std::vector<AnnotatedQuestion>& questions, SplitRatios ratios,
                           std::uint64_t seed);

class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dimension, std::uint64_t seed);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

  void insert(const std::string& token, std::vector<double> vector);
  bool contains(const std::string& token) const { return vectors_.count(token) != 0; }
  std::span<const double> lookup(const std::string& token) const;
  std::span<const double> unk_vector() const { return unk_; }
  const std::map<std::string, std::vector<double>>& vectors() const { return vectors_; }

 private:
  std::size_t dimension_;
  std::map<std::string, std::vector<double>> vectors_;
  std::vector<double> unk_;
};

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim,
                               std::uint64_t seed);

/// Seeded uniform(-scale, scale) vectors for every token of `vocabulary`.
EmbeddingTable random_embeddings(const std::set<std::string>& vocabulary, std::size_t dim,
                                 std::uint64_t seed, double scale = 0.5);

/// Derives an independent stream seed for a named component.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component);

}  // namespace kbqa
