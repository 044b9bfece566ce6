#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbqa/corpus.hpp"
#include "kbqa/index.hpp"
#include "kbqa/models.hpp"

namespace kbqa {

struct StructuredQuery {
  Tokens entity_phrase;
  std::string relation;
  bool degraded = false;

  friend bool operator==(const StructuredQuery&, const StructuredQuery&) = default;
};

struct Answer {
  std::string object;
  Fact supporting_fact;
  double score = 0.0;
  bool degraded = false;

  friend bool operator==(const Answer&, const Answer&) = default;
};

/// Tags the question, takes the longest entity run as the phrase and predicts
/// the relation. Throws std::invalid_argument when the text has no tokens.
StructuredQuery build_structured_query(const Model& entity_model, const Model& relation_model,
                                       std::string_view question);
StructuredQuery build_structured_query(const Model& entity_model, const Model& relation_model,
                                       const Tokens& tokens,
                                       const std::optional<std::vector<PosTag>>& pos_tags);

/// Best fact among the top-k candidate entities holding the query relation.
/// Score is the entity's retrieval score; ties keep candidate then edge order.
std::optional<Answer> answer(const StructuredQuery& query, const EntityIndex& entity_index,
                             const ReachIndex& reach_index, std::size_t k = kDefaultCandidateCap);

}  // namespace kbqa
