#include <doctest.h>

#include <sstream>

#include "kbqa/cli.hpp"
#include "kbqa/index.hpp"
#include "test_util.hpp"
#include "toy.hpp"

using namespace kbqa;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result qa(std::vector<std::string> args) {
  args.insert(args.begin(), "qa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Ten people, each with a birth year and a birth place, two questions per person.
struct People {
  TempDir dir;
  std::filesystem::path facts, aliases, questions;

  People() {
    const char* names[] = {"ada lovelace", "alan turing", "grace hopper", "john von neumann",
                           "edsger dijkstra", "barbara liskov", "donald knuth",
                           "claude shannon", "kurt godel", "emmy noether"};
    std::string f, a, q;
    for (int i = 0; i < 10; ++i) {
      const auto id = "p" + std::to_string(i);
      f += id + "\tbornOn\t" + std::to_string(1800 + 10 * i) + "\n";
      f += id + "\tbornIn\tcity" + std::to_string(i) + "\n";
      a += id + "\t" + names[i] + "\n";
      q += id + "\tbornOn\t" + std::to_string(1800 + 10 * i) + "\twhen was " + names[i] + " born\n";
      q += id + "\tbornIn\tcity" + std::to_string(i) + "\twhere was " + names[i] + " born\n";
    }
    facts = dir.file("facts.tsv", f);
    aliases = dir.file("aliases.tsv", a);
    questions = dir.file("questions.tsv", q);
  }

  std::vector<std::string> data() const {
    return {"--facts", facts.string(), "--aliases", aliases.string(), "--questions",
            questions.string()};
  }
};

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("parse the ask invocation") {
  const char* argv[] = {"qa", "ask", "--question", "how old is tom hanks", "--index", "i.idx",
                        "--entity-model", "e.model", "--relation-model", "r.model", "--k", "7"};
  const auto c = cli::parse_args(12, argv);
  CHECK(c.verb == "ask");
  CHECK(c.options.at("question") == "how old is tom hanks");
  CHECK(c.options.at("relation-model") == "r.model");
  CHECK(c.config.get_uint("k") == 7);
  CHECK(c.config.get_uint("max_len") == 36);
  CHECK_FALSE(c.config.has("seed"));
}

TEST_CASE("usage errors exit 2") {
  CHECK(qa({"frobnicate"}).code == 2);
  CHECK(qa({}).code == 2);
  CHECK(qa({"ask", "--question", "x"}).code == 2);
  CHECK(qa({"gradcheck", "--seed", "minus-one"}).code == 2);
  CHECK(qa({"gradcheck", "--optimizer", "rmsprop"}).code == 2);
  CHECK(qa({"gradcheck", "--no-such-key", "1"}).code == 2);
  const auto help = qa({"train", "--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("--learning-rate") != std::string::npos);
}

TEST_CASE("config file and flag precedence") {
  TempDir dir;
  const auto cfg = dir.file("run.cfg", "# comment\nseed = 5\nepochs=3\nlearning_rate=0.01\n");
  const auto path = cfg.string();
  const char* argv[] = {"qa", "gradcheck", "--config", path.c_str(), "--epochs", "4"};
  const auto c = cli::parse_args(6, argv);
  CHECK(c.config.get_uint("seed") == 5);
  CHECK(c.config.get_uint("epochs") == 4);
  CHECK(c.config.get_double("learning_rate") == 0.01);
  const char* underscore[] = {"qa", "gradcheck", "--learning_rate", "0.5"};
  CHECK(cli::parse_args(4, underscore).config.get_double("learning_rate") == 0.5);

  const auto bad = dir.file("bad.cfg", "colour=blue\n");
  CHECK(qa({"gradcheck", "--config", bad.string()}).code == 2);
  cli::RunConfig rc;
  CHECK_THROWS_AS(rc.set("hidden", "12:x"), cli::UsageError);
  rc.set("hidden", "12:4");
  CHECK(rc.get_sizes("hidden") == std::vector<std::size_t>{12, 4});
  CHECK(rc.dump().find("budget=20\n") != std::string::npos);
}

TEST_CASE("ask answers from saved artifacts") {
  TempDir dir;
  const auto facts = dir.file("facts.tsv", "e1\tbornOn\t1956\n");
  const auto aliases = dir.file("aliases.tsv", "e1\tTom Hanks\n");
  const auto idx = (dir / "kb.idx").string();
  REQUIRE(qa({"build-index", "--facts", facts.string(), "--aliases", aliases.string(), "--out", idx})
              .code == 0);
  toy::entity_model().save(dir / "e.model");
  toy::relation_model("bornOn").save(dir / "r.model");

  const auto r = qa({"ask", "--question", "How old is Tom Hanks?", "--index", idx,
                     "--entity-model", (dir / "e.model").string(), "--relation-model",
                     (dir / "r.model").string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out ==
        "query: {entity: tom hanks, relation: bornOn}\n"
        "answer: 1956\n"
        "fact: e1\tbornOn\t1956\n"
        "score: 1.000000\n"
        "degraded: no\n");

  toy::relation_model("diedOn").save(dir / "r2.model");
  const auto none = qa({"ask", "--question", "how old is tom hanks", "--index", idx,
                        "--entity-model", (dir / "e.model").string(), "--relation-model",
                        (dir / "r2.model").string()});
  CHECK(none.code == 0);
  CHECK(none.out.find("no answer") != std::string::npos);

  const auto missing = qa({"ask", "--question", "x", "--index", idx, "--entity-model",
                           (dir / "nope.model").string(), "--relation-model",
                           (dir / "r.model").string()});
  CHECK(missing.code == 1);
  CHECK_FALSE(missing.err.empty());
}

TEST_CASE("train, eval and determinism end to end") {
  People p;
  const auto& d = p.dir;
  const auto idx = (d / "kb.idx").string();
  REQUIRE(qa({"build-index", "--facts", p.facts.string(), "--aliases", p.aliases.string(), "--out",
              idx}).code == 0);

  const auto train = [&](const std::string& task, const std::string& kind, const std::string& out) {
    return qa(std::vector<std::string>{"train"} + p.data() +
              std::vector<std::string>{"--task", task, "--model", kind, "--out", (d / out).string(),
                                       "--seed", "3", "--epochs", "3", "--desk-divisor", "100",
                                       "--embed-dim", "6", "--batch-size", "4", "--log",
                                       (d / (out + ".log")).string()});
  };
  REQUIRE(train("entity", "NB_MULTINOMIAL", "e.model").code == 0);
  const auto r1 = train("relation", "BIGRU2", "r1.model");
  INFO(r1.err);
  REQUIRE(r1.code == 0);
  REQUIRE(train("relation", "BIGRU2", "r2.model").code == 0);
  CHECK(slurp(d / "r1.model") == slurp(d / "r2.model"));
  CHECK(slurp(d / "r1.model.log").rfind("epoch\ttrain_loss", 0) == 0);
  CHECK(train("relation", "NAIVE_ALL_ENTITY", "bad.model").code == 2);

  const auto eval = [&](const std::string& prefix) {
    return qa(std::vector<std::string>{"eval"} + p.data() +
              std::vector<std::string>{"--index", idx, "--entity-model", (d / "e.model").string(),
                                       "--relation-model", (d / "r1.model").string(), "--out",
                                       (d / prefix).string(), "--seed", "3"});
  };
  const auto e1 = eval("a");
  INFO(e1.err);
  REQUIRE(e1.code == 0);
  REQUIRE(eval("b").code == 0);
  CHECK(slurp(d / "a.tsv") == slurp(d / "b.tsv"));
  CHECK(slurp(d / "a.txt") == slurp(d / "b.txt"));
  const auto tsv = slurp(d / "a.tsv");
  CHECK(tsv.find("\nMajority\tN/A\tN/A\t") != std::string::npos);
  CHECK(tsv.find("\nNaive all-entity\t") != std::string::npos);
  CHECK(tsv.find("\npipeline\t") != std::string::npos);

  const auto swapped = qa(std::vector<std::string>{"eval"} + p.data() +
                          std::vector<std::string>{"--index", idx, "--entity-model",
                                                   (d / "r1.model").string(), "--relation-model",
                                                   (d / "e.model").string(), "--out",
                                                   (d / "c").string()});
  CHECK(swapped.code == 1);
  const auto absent = qa(std::vector<std::string>{"eval"} + p.data() +
                         std::vector<std::string>{"--index", idx, "--entity-model",
                                                  (d / "none.model").string(), "--relation-model",
                                                  (d / "r1.model").string(), "--out",
                                                  (d / "c").string()});
  CHECK(absent.code == 1);
}

TEST_CASE("tune and benchmark run on a tiny corpus") {
  People p;
  const auto tune = qa(std::vector<std::string>{"tune"} + p.data() +
                       std::vector<std::string>{"--task", "relation", "--model", "CONV_GRU",
                                                "--budget", "3", "--epochs", "1", "--desk-divisor",
                                                "100", "--embed-dim", "4", "--conv-filters", "3"});
  INFO(tune.err);
  REQUIRE(tune.code == 0);
  CHECK(tune.out.rfind("step\tscore\t", 0) == 0);
  CHECK(tune.out.find("\nbest: ") != std::string::npos);

  const auto bench = qa(std::vector<std::string>{"benchmark"} + p.data() +
                        std::vector<std::string>{"--epochs", "1", "--desk-divisor", "100",
                                                 "--embed-dim", "4"});
  INFO(bench.err);
  REQUIRE(bench.code == 0);
  CHECK(bench.out.find("CONV_GRU/BIGRU2 epoch time ratio") != std::string::npos);
}

TEST_CASE("gradcheck verb") {
  const auto r = qa({"gradcheck"});
  CHECK(r.code == 0);
  CHECK(r.out.find("gradient suite: PASS") != std::string::npos);
}
