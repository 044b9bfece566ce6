#include "kbqa/pipeline.hpp"

#include <stdexcept>

namespace kbqa {

StructuredQuery build_structured_query(const Model& entity_model, const Model& relation_model,
                                       std::string_view question) {
  return build_structured_query(entity_model, relation_model, tokenize(question), std::nullopt);
}

StructuredQuery build_structured_query(const Model& entity_model, const Model& relation_model,
                                       const Tokens& tokens,
                                       const std::optional<std::vector<PosTag>>& pos_tags) {
  if (tokens.empty()) throw std::invalid_argument("question has no tokens");
  const auto tags = entity_model.predict_tags(tokens, pos_tags);
  StructuredQuery query;
  query.entity_phrase = entity_phrase(tags.mapped_tags, tokens);
  query.relation = relation_model.predict_relation(tokens).label;
  query.degraded = tags.degraded;
  return query;
}

std::optional<Answer> answer(const StructuredQuery& query, const EntityIndex& entity_index,
                             const ReachIndex& reach_index, std::size_t k) {
  const auto candidates = query_entity_index(entity_index, query.entity_phrase, k);
  const auto reachable = query_reach(reach_index, candidates, query.relation);
  if (reachable.empty()) return std::nullopt;
  const AnswerCandidate* best = &reachable.front();
  for (const auto& c : reachable)
    if (c.score > best->score) best = &c;
  return Answer{best->object, Fact{best->entity, best->relation, best->object}, best->score,
                query.degraded};
}

}  // namespace kbqa
