#include <doctest.h>

#include <algorithm>
#include <set>

#include "kbqa/corpus.hpp"
#include "kbqa/error.hpp"
#include "test_util.hpp"

using namespace kbqa;

TEST_CASE("load_facts normalizes aliases") {
  TempDir dir;
  const auto kb = load_facts(dir.file("f.tsv", "e1\tbornOn\t1956\n"),
                             dir.file("a.tsv", "e1\tTom Hanks\n"));
  REQUIRE(kb.facts.size() == 1);
  CHECK(kb.facts[0] == Fact{"e1", "bornOn", "1956"});
  CHECK(kb.aliases.at("e1") == std::set<std::string>{"tom hanks"});
}

TEST_CASE("load_facts edge cases") {
  TempDir dir;
  const auto empty = load_facts(dir.file("f.tsv", ""), dir.file("a.tsv", ""));
  CHECK(empty.facts.empty());
  CHECK(empty.aliases.empty());

  try {
    load_facts(dir.file("bad.tsv", "e1\tbornOn\n"), dir.file("a2.tsv", "e1\tx\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(load_facts(dir.file("f3.tsv", "e2\tr\to\n"), dir.file("a3.tsv", "e1\tx\n")),
                  IntegrityError);
}

TEST_CASE("knowledge base round trip") {
  TempDir dir;
  KnowledgeBase kb;
  kb.facts = {{"e1", "bornOn", "1956"}, {"e2", "r", "x y"}, {"e1", "bornOn", "1956"}};
  kb.aliases["e1"] = {"tom hanks", "hanks"};
  kb.aliases["e2"] = {"rita wilson"};
  save_facts(kb, dir / "f.tsv", dir / "a.tsv");
  const auto back = load_facts(dir / "f.tsv", dir / "a.tsv");
  CHECK(back.facts == kb.facts);
  CHECK(back.aliases == kb.aliases);
}

TEST_CASE("derive_gold_tags") {
  CHECK(derive_gold_tags({"where", "was", "tom", "hanks", "born"}, {"tom hanks", "hanks"}) ==
        TagSequence{0, 0, 1, 1, 0});
  CHECK(derive_gold_tags({"hanks"}, {"hanks"}) == TagSequence{1});
  CHECK_THROWS_AS(derive_gold_tags({"a", "b"}, {"c"}), TaggingError);
  // equal length: earliest start wins
  CHECK(derive_gold_tags({"x", "y", "x"}, {"x"}) == TagSequence{1, 0, 0});
  CHECK(derive_gold_tags({"b", "a"}, {"a", "b"}) == TagSequence{1, 0});
}

TEST_CASE("load_questions") {
  TempDir dir;
  const auto kb = load_facts(dir.file("f.tsv", "e1\tbornOn\t1956\ne2\tr\to\n"),
                             dir.file("a.tsv", "e1\tTom Hanks\ne2\tnobody\n"));
  const auto qs = load_questions(
      dir.file("q.tsv", "e1\tbornOn\t1956\tHow old is Tom Hanks?\ne1\tbornOn\t1956\tTom Hanks\n"), kb);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].tokens == Tokens{"how", "old", "is", "tom", "hanks"});
  CHECK(qs[0].gold_tags == TagSequence{0, 0, 0, 1, 1});
  CHECK(qs[0].gold_subject == "e1");
  CHECK(qs[0].gold_relation == "bornOn");
  CHECK(qs[1].gold_tags == TagSequence{1, 1});

  const auto bad = dir.file("q2.tsv", "e2\tr\to\twho is tom\n");
  CHECK_THROWS_AS(load_questions(bad, kb), TaggingError);
  CHECK(load_questions(bad, kb, QuestionLoadOptions{true}).empty());
  CHECK_THROWS_AS(load_questions(dir.file("q3.tsv", "e1\tbornOn\n"), kb), ParseError);
}

TEST_CASE("load_questions reads an optional POS column") {
  TempDir dir;
  const auto kb = load_facts(dir.file("f.tsv", "e1\tbornOn\t1956\n"), dir.file("a.tsv", "e1\thanks\n"));
  const auto qs =
      load_questions(dir.file("q.tsv", "e1\tbornOn\t1956\twho is hanks\tPRON VERB PROPN\n"), kb);
  REQUIRE(qs.size() == 1);
  REQUIRE(qs[0].pos_tags);
  CHECK(*qs[0].pos_tags == std::vector<PosTag>{PosTag::PRON, PosTag::VERB, PosTag::PROPN});
  CHECK_THROWS_AS(
      load_questions(dir.file("q2.tsv", "e1\tbornOn\t1956\twho is hanks\tPRON VERB\n"), kb),
      ParseError);
}

TEST_CASE("gold tags select an alias of the subject") {
  TempDir dir;
  const auto kb = load_facts(dir.file("f.tsv", "e1\tr\to\ne2\tr\to\n"),
                             dir.file("a.tsv", "e1\tNew York\ne1\tNYC\ne2\tYork\n"));
  const auto qs = load_questions(dir.file("q.tsv",
                                          "e1\tr\to\twhere is new york city\n"
                                          "e1\tr\to\tnyc population\n"
                                          "e2\tr\to\tnew york or york\n"),
                                 kb);
  for (const auto& q : qs) {
    Tokens picked;
    for (std::size_t i = 0; i < q.tokens.size(); ++i)
      if (q.gold_tags[i]) picked.push_back(q.tokens[i]);
    CHECK(kb.aliases.at(q.gold_subject).count(join(picked)) == 1);
  }
}

namespace {
std::vector<AnnotatedQuestion> numbered(std::size_t n) {
  std::vector<AnnotatedQuestion> qs(n);
  for (std::size_t i = 0; i < n; ++i) qs[i].text = std::to_string(i);
  return qs;
}
}  // namespace

TEST_CASE("split_dataset sizes and determinism") {
  auto s = split_dataset(numbered(100), SplitRatios{}, 7);
  CHECK(s.train.size() == 70);
  CHECK(s.valid.size() == 10);
  CHECK(s.test.size() == 20);

  s = split_dataset(numbered(9), SplitRatios{}, 7);
  CHECK(s.train.size() == 8);
  CHECK(s.valid.size() == 0);
  CHECK(s.test.size() == 1);

  auto texts = [](const std::vector<AnnotatedQuestion>& v) {
    std::vector<std::string> t;
    for (const auto& q : v) t.push_back(q.text);
    return t;
  };
  const auto a = split_dataset(numbered(50), SplitRatios{}, 3);
  const auto b = split_dataset(numbered(50), SplitRatios{}, 3);
  CHECK(texts(a.train) == texts(b.train));
  CHECK(texts(a.test) == texts(b.test));

  std::set<std::string> all;
  for (const auto* part : {&a.train, &a.valid, &a.test})
    for (const auto& q : *part) CHECK(all.insert(q.text).second);
  CHECK(all.size() == 50);

  CHECK_THROWS(split_dataset(numbered(10), SplitRatios{1.2, -0.2, 0.0}, 1));
  CHECK_THROWS(split_dataset(numbered(10), SplitRatios{0.5, 0.1, 0.1}, 1));
}

TEST_CASE("embeddings") {
  TempDir dir;
  const auto table = load_embeddings(dir.file("e.txt", "a 0.1 0.2\nb 0.3 0.4\n"), 2, 11);
  CHECK(table.size() == 2);
  CHECK(table.lookup("b")[1] == doctest::Approx(0.4));
  const auto unk1 = table.lookup("zzz");
  const auto unk2 = table.lookup("yyy");
  REQUIRE(unk1.size() == 2);
  CHECK(std::equal(unk1.begin(), unk1.end(), unk2.begin()));
  for (double v : unk1) CHECK(std::abs(v) <= 0.05);

  CHECK_THROWS_AS(load_embeddings(dir.file("bad.txt", "a 0.1 0.2 0.3\n"), 2, 1), ParseError);
  CHECK_THROWS_AS(load_embeddings(dir.file("dup.txt", "a 1 2\na 3 4\n"), 2, 1), ParseError);
}

TEST_CASE("derive_seed separates components") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}
