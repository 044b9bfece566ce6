#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "kbqa/corpus.hpp"
#include "kbqa/textproc.hpp"

namespace kbqa {

/// Generated questions with the knowledge base, embeddings and POS lexicon
/// they were drawn from.
struct SyntheticCorpus {
  KnowledgeBase kb;
  std::vector<AnnotatedQuestion> questions;
  EmbeddingTable embeddings;
  PosLexicon lexicon;
};

/// Relation classification: each question is filler words, one entity name
/// and a trigger word that alone determines the relation.
SyntheticCorpus trigger_relation_corpus(std::size_t examples, std::size_t relations,
                                        std::size_t dim, std::uint64_t seed);

/// Entity detection: 50 names (one or two tokens) placed in 20 templates.
/// Names and the "-ly" modifiers sometimes placed next to them are absent
/// from the embeddings; template words are in the embeddings and the lexicon.
SyntheticCorpus entity_detection_corpus(std::size_t questions, std::size_t dim,
                                        std::uint64_t seed, double modifier_rate = 0.5);

/// Random KB over a small word pool so aliases overlap; at most `max_aliases`
/// aliases and `max_facts` facts, every subject has an alias.
KnowledgeBase random_knowledge_base(std::mt19937_64& rng, std::size_t max_aliases,
                                    std::size_t max_facts);

}  // namespace kbqa
