#include <doctest.h>

#include <random>
#include <sstream>

#include "kbqa/index.hpp"
#include "kbqa/synthetic.hpp"
#include "oracles.hpp"

using namespace kbqa;

namespace {

KnowledgeBase three_alias_kb() {
  KnowledgeBase kb;
  kb.aliases["e1"] = {"tom hanks"};
  kb.aliases["e2"] = {"tom cruise"};
  kb.aliases["e3"] = {"hanks"};
  return kb;
}

Tokens random_phrase(std::mt19937_64& rng) {
  static const Tokens pool = {"red", "blue", "river", "stone", "king", "north", "old",
                              "new", "city", "john",  "mary",  "lake", "hill",  "park",
                              "star", "zzz"};
  Tokens t;
  const auto len = 1 + rng() % 4;
  for (std::size_t i = 0; i < len; ++i) t.push_back(pool[rng() % pool.size()]);
  return t;
}

}  // namespace

TEST_CASE("document frequency and idf") {
  const auto idx = EntityIndex::build(three_alias_kb());
  CHECK(idx.alias_count() == 3);
  CHECK(idx.document_frequency("tom") == 2);
  CHECK(idx.document_frequency("hanks") == 2);
  CHECK(idx.document_frequency("tom hanks") == 1);
  CHECK(idx.document_frequency("zzz") == 0);
  CHECK(idx.postings("zzz") == nullptr);
  // "tom hanks" has 3 grams; tf("tom") = 1/3, idf = ln(4/3) + 1
  const auto* tom = idx.postings("tom");
  REQUIRE(tom != nullptr);
  REQUIRE(tom->size() == 2);
  CHECK((*tom)[0].entity == "e1");
  CHECK((*tom)[0].weight / (1.0 / 3.0) == doctest::Approx(1.2876820724517808).epsilon(1e-12));
}

TEST_CASE("single alias has unit weight") {
  KnowledgeBase kb;
  kb.aliases["x"] = {"a"};
  const auto idx = EntityIndex::build(kb);
  REQUIRE(idx.postings("a"));
  CHECK(idx.postings("a")->front().weight == 1.0);
  CHECK_THROWS(EntityIndex::build(KnowledgeBase{}));
}

TEST_CASE("tf sums to one per alias") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto kb = random_knowledge_base(rng, 30, 10);
    const auto idx = EntityIndex::build(kb);
    std::map<std::pair<std::string, std::string>, double> tf_sum;
    const double n = static_cast<double>(idx.alias_count());
    for (const auto& [gram, list] : idx.all_postings()) {
      const double idf =
          std::log((1.0 + n) / (1.0 + static_cast<double>(idx.document_frequency(gram)))) + 1.0;
      for (const auto& p : list) {
        CHECK(p.weight > 0.0);
        tf_sum[{p.entity, p.alias}] += p.weight / idf;
      }
    }
    for (const auto& [key, sum] : tf_sum) CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("query_entity_index") {
  const auto idx = EntityIndex::build(three_alias_kb());
  const auto c = query_entity_index(idx, {"tom", "hanks"}, 50);
  REQUIRE(c.size() == 3);
  CHECK(c[0].entity == "e1");
  CHECK(c == oracle::candidates(three_alias_kb(), {"tom", "hanks"}, 50));
  CHECK(query_entity_index(idx, {"zzz"}, 50).empty());
  CHECK(query_entity_index(idx, {}, 50).empty());
  CHECK(query_entity_index(idx, {"tom", "hanks"}, 1).size() == 1);
  CHECK_THROWS(query_entity_index(idx, {"tom"}, 0));
}

TEST_CASE("ties are ordered by entity id") {
  KnowledgeBase kb;
  kb.aliases["b"] = {"same"};
  kb.aliases["a"] = {"same"};
  kb.aliases["c"] = {"same"};
  const auto c = query_entity_index(EntityIndex::build(kb), {"same"}, 2);
  REQUIRE(c.size() == 2);
  CHECK(c[0].entity == "a");
  CHECK(c[1].entity == "b");
}

TEST_CASE("query agrees with the brute-force oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const auto kb = random_knowledge_base(rng, 100, 50);
    const auto idx = EntityIndex::build(kb);
    for (int q = 0; q < 10; ++q) {
      const auto phrase = random_phrase(rng);
      const std::size_t k = 1 + rng() % 20;
      CHECK(query_entity_index(idx, phrase, k) == oracle::candidates(kb, phrase, k));
    }
  }
}

TEST_CASE("reach index") {
  KnowledgeBase kb;
  kb.facts = {{"e1", "bornOn", "1956"}, {"e1", "starredIn", "m1"}, {"e2", "bornOn", "1961"},
              {"e1", "bornOn", "1956"}};
  const auto reach = ReachIndex::build(kb);
  CHECK(reach.edges("e1").size() == 3);
  CHECK(reach.edges("e1")[1] == Edge{"starredIn", "m1"});
  CHECK(reach.edges("zz").empty());
  CHECK(ReachIndex::build(KnowledgeBase{}).empty());

  CHECK(query_reach(reach, {{"e1", 2.0}}, "bornOn") ==
        std::vector<AnswerCandidate>{{"e1", "bornOn", "1956", 2.0}, {"e1", "bornOn", "1956", 2.0}});
  CHECK(query_reach(reach, {{"e1", 2.0}}, "diedOn").empty());
  const auto two = query_reach(reach, {{"e2", 3.0}, {"e1", 1.0}}, "starredIn");
  REQUIRE(two.size() == 1);
  const auto both = query_reach(reach, {{"e2", 3.0}, {"e1", 1.0}}, "bornOn");
  REQUIRE(both.size() == 3);
  CHECK(both[0].entity == "e2");
  CHECK(both[1].entity == "e1");
}

TEST_CASE("query_reach output is a subset of the KB") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto kb = random_knowledge_base(rng, 40, 100);
    const auto idx = EntityIndex::build(kb);
    const auto reach = ReachIndex::build(kb);
    const std::set<Fact> facts(kb.facts.begin(), kb.facts.end());
    const auto found =
        query_reach(reach, query_entity_index(idx, random_phrase(rng), 10), "r" + std::to_string(rng() % 6));
    for (const auto& a : found) CHECK(facts.count(Fact{a.entity, a.relation, a.object}) == 1);
  }
}

TEST_CASE("index file round trip") {
  std::mt19937_64 rng(99);
  const auto kb = random_knowledge_base(rng, 100, 300);
  const auto idx = EntityIndex::build(kb);
  const auto reach = ReachIndex::build(kb);
  std::stringstream buffer;
  IndexFile::write(buffer, idx, reach);
  const auto text = buffer.str();
  CHECK(text.rfind("QAIDX 1\n", 0) == 0);

  EntityIndex idx2;
  ReachIndex reach2;
  IndexFile::read(buffer, idx2, reach2);
  CHECK(idx2 == idx);
  CHECK(reach2 == reach);
  std::stringstream again;
  IndexFile::write(again, idx2, reach2);
  CHECK(again.str() == text);

  for (int q = 0; q < 1000; ++q) {
    const auto phrase = random_phrase(rng);
    CHECK(query_entity_index(idx2, phrase, 50) == query_entity_index(idx, phrase, 50));
  }
}

TEST_CASE("index file rejects bad input") {
  EntityIndex idx;
  ReachIndex reach;
  std::stringstream bad("QAIDX 2\n");
  CHECK_THROWS(IndexFile::read(bad, idx, reach));
  std::stringstream truncated("QAIDX 1\naliases 1\n");
  CHECK_THROWS(IndexFile::read(truncated, idx, reach));
}
