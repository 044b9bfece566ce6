#pragma once

// Toy knowledge base and models with forced outputs.

#include "kbqa/corpus.hpp"
#include "kbqa/models.hpp"

namespace toy {

inline kbqa::EmbeddingTable table() {
  return kbqa::random_embeddings({"how", "old", "is", "tom", "hanks", "where", "was", "born"}, 4, 3);
}

inline kbqa::PosLexicon lexicon() {
  kbqa::PosLexicon lex;
  lex.add("old", kbqa::PosTag::ADJ);
  return lex;
}

// Noun-filtered tagger that tags every kept token as an entity word
// (or none, when `silent`).
inline kbqa::Model entity_model(bool silent = false) {
  const auto t = table();
  auto d = kbqa::default_descriptor(kbqa::Task::ENTITY, kbqa::ModelKind::NT_BILSTM1, 100);
  auto m = kbqa::Model::build(d, &t, {}, 1, lexicon());
  auto& params = m.network()->params();
  params[params.index_of("head.bias")][silent ? 0 : 1] = 100.0;
  return m;
}

// Majority classifier that always answers `relation`.
inline kbqa::Model relation_model(const std::string& relation) {
  kbqa::AnnotatedQuestion q;
  q.tokens = {"x"};
  q.gold_relation = relation;
  q.gold_tags = {0};
  const std::vector<kbqa::AnnotatedQuestion> qs = {q};
  auto m = kbqa::Model::build(
      kbqa::default_descriptor(kbqa::Task::RELATION, kbqa::ModelKind::MAJORITY), nullptr,
      kbqa::RelationLabelSpace::from_questions(qs), 0);
  kbqa::train(m, qs, {}, kbqa::TrainConfig{});
  return m;
}

inline kbqa::KnowledgeBase hanks_kb() {
  kbqa::KnowledgeBase kb;
  kb.facts = {{"e1", "bornOn", "1956"}};
  kb.aliases["e1"] = {"tom hanks"};
  return kb;
}

}  // namespace toy
