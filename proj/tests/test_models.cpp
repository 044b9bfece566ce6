#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kbqa/models.hpp"
#include "kbqa/synthetic.hpp"

using namespace kbqa;

namespace {

AnnotatedQuestion question(Tokens tokens, std::string relation, TagSequence tags = {}) {
  AnnotatedQuestion q;
  q.text = join(tokens);
  q.tokens = std::move(tokens);
  q.gold_relation = std::move(relation);
  q.gold_tags = tags.empty() ? TagSequence(q.tokens.size(), 0) : std::move(tags);
  return q;
}

EmbeddingTable small_table(std::size_t dim = 4) {
  return random_embeddings({"how", "old", "is", "tom", "hanks", "where", "was", "born", "x", "y", "z"},
                           dim, 3);
}

ArchitectureDescriptor small(Task task, ModelKind kind) {
  auto d = default_descriptor(task, kind, 100);  // hidden width 4
  d.max_len = 8;
  return d;
}

std::string bytes(const Model& m) {
  std::ostringstream out;
  m.write(out);
  return out.str();
}

PosLexicon lexicon() {
  PosLexicon lex;
  lex.add("old", PosTag::ADJ);
  return lex;
}

}  // namespace

TEST_CASE("published layer sizes") {
  auto d = default_descriptor(Task::RELATION, ModelKind::BIGRU2);
  CHECK(d.hidden == std::vector<std::size_t>{1400, 400});
  CHECK(static_cast<double>(d.hidden[0]) / static_cast<double>(d.hidden[1]) == 3.5);
  d = default_descriptor(Task::ENTITY, ModelKind::BILSTM2);
  CHECK(d.hidden == std::vector<std::size_t>{1240, 400});
  CHECK(d.dropout == std::vector<double>{0.1, 0.1});
  d = default_descriptor(Task::RELATION, ModelKind::CONV_GRU);
  CHECK(d.hidden == std::vector<std::size_t>{400});
  CHECK(d.conv_filters == 50);
  CHECK(d.conv_width == 2);
  CHECK(d.dropout == std::vector<double>{0.2, 0.1});
  d = default_descriptor(Task::ENTITY, ModelKind::NT_BILSTM1);
  CHECK(d.hidden.size() == 1);
  CHECK(d.noun_filter);
  CHECK(d.max_len == 36);

  d = default_descriptor(Task::RELATION, ModelKind::BIGRU2, 50);
  CHECK(d.hidden == std::vector<std::size_t>{28, 8});
  CHECK_THROWS(default_descriptor(Task::ENTITY, ModelKind::MAJORITY));
  CHECK_THROWS(default_descriptor(Task::RELATION, ModelKind::NAIVE_ALL_ENTITY));
}

TEST_CASE("descriptor text round trip") {
  for (auto kind : {ModelKind::BILSTM2, ModelKind::NT_BILSTM1, ModelKind::BIGRU2,
                    ModelKind::CONV_GRU, ModelKind::NB_MULTINOMIAL}) {
    for (auto task : {Task::ENTITY, Task::RELATION}) {
      auto d = default_descriptor(task, kind, 7);
      d.dropout.assign(d.dropout.size(), 0.123456789);
      const auto text = d.encode();
      CHECK(text.find(' ') == std::string::npos);
      CHECK(ArchitectureDescriptor::parse(text) == d);
    }
  }
  CHECK_THROWS(ArchitectureDescriptor::parse("task=ENTITY"));
  CHECK_THROWS(ArchitectureDescriptor::parse("task=ENTITY,kind=BILSTM2,hidden=4"));
  CHECK_THROWS(ArchitectureDescriptor::parse("task=ENTITY,kind=NOPE"));
}

TEST_CASE("conv filter tensor shape") {
  const auto table = small_table(5);
  auto d = default_descriptor(Task::RELATION, ModelKind::CONV_GRU, 100);
  const auto m = Model::build(d, &table, RelationLabelSpace({"a", "b"}), 1);
  const auto& params = m.network()->params();
  CHECK(params[params.index_of("layer0.filters")].shape() == std::vector<std::size_t>{50, 2, 5});
}

TEST_CASE("initialization is seeded") {
  const auto table = small_table();
  const RelationLabelSpace labels({"a", "b"});
  const auto d = small(Task::RELATION, ModelKind::BIGRU2);
  CHECK(bytes(Model::build(d, &table, labels, 9)) == bytes(Model::build(d, &table, labels, 9)));
  CHECK(bytes(Model::build(d, &table, labels, 9)) != bytes(Model::build(d, &table, labels, 10)));
  const auto m = Model::build(d, &table, labels, 9);
  const auto& params = m.network()->params();
  for (std::size_t i = 1; i < params.size(); ++i)
    for (double v : params[i].values()) CHECK(std::abs(v) <= kInitRange);
}

TEST_CASE("naive all-entity tagger") {
  const auto m = Model::build(default_descriptor(Task::ENTITY, ModelKind::NAIVE_ALL_ENTITY), nullptr,
                              {}, 0);
  const auto p = m.predict_tags({"where", "was", "tom", "hanks", "born"});
  CHECK(p.mapped_tags == TagSequence{1, 1, 1, 1, 1});
  CHECK_THROWS(m.predict_relation({"x"}));
}

TEST_CASE("noun-filtered tags map back to the question") {
  const auto table = small_table();
  auto d = small(Task::ENTITY, ModelKind::NT_BILSTM1);
  REQUIRE(d.noun_filter);
  auto m = Model::build(d, &table, {}, 1, lexicon());
  auto& params = m.network()->params();
  auto& bias = params[params.index_of("head.bias")];

  bias[1] = 100.0;  // every kept token is an entity word
  auto p = m.predict_tags({"how", "old", "is", "tom", "hanks"});
  CHECK(p.tags == TagSequence{1, 1});
  CHECK(p.mapped_tags == TagSequence{0, 0, 0, 1, 1});
  CHECK_FALSE(p.degraded);

  bias[1] = 0.0;
  bias[0] = 100.0;  // nothing tagged: fall back to the whole question
  p = m.predict_tags({"how", "old", "is", "tom", "hanks"});
  CHECK(p.mapped_tags == TagSequence{1, 1, 1, 1, 1});
  CHECK(p.degraded);

  // explicit POS annotation overrides the rule tagger
  bias[0] = 0.0;
  bias[1] = 100.0;
  using P = PosTag;
  p = m.predict_tags({"how", "old", "is", "tom", "hanks"},
                     std::vector<PosTag>{P::ADV, P::ADJ, P::NOUN, P::VERB, P::NOUN});
  CHECK(p.mapped_tags == TagSequence{0, 1, 1, 0, 1});
}

TEST_CASE("entity_phrase") {
  CHECK(entity_phrase({0, 1, 1, 0}, {"a", "tom", "hanks", "b"}) == Tokens{"tom", "hanks"});
  CHECK(entity_phrase({1, 0, 1, 1}, {"p", "q", "r", "s"}) == Tokens{"r", "s"});
  CHECK(entity_phrase({1, 0, 1}, {"p", "q", "r"}) == Tokens{"p"});
  CHECK_THROWS(entity_phrase({0, 0}, {"p", "q"}));
  CHECK_THROWS(entity_phrase({1}, {"p", "q"}));
}

TEST_CASE("majority classifier") {
  const std::vector<AnnotatedQuestion> train_set = {question({"x"}, "a"), question({"y"}, "a"),
                                                    question({"z"}, "a"), question({"x"}, "b")};
  const auto labels = RelationLabelSpace::from_questions(train_set);
  auto m = Model::build(default_descriptor(Task::RELATION, ModelKind::MAJORITY), nullptr, labels, 0);
  train(m, train_set, {}, TrainConfig{});
  const auto p = m.predict_relation({"anything", "at", "all"});
  CHECK(p.label == "a");
  CHECK(p.probability == 0.75);
  CHECK(relation_accuracy(m, train_set) == 0.75);
}

TEST_CASE("uniform untrained classifier reports 1/K") {
  const auto table = small_table();
  auto m = Model::build(small(Task::RELATION, ModelKind::BIGRU2), &table,
                        RelationLabelSpace({"a", "b", "c", "d"}), 1);
  auto& params = m.network()->params();
  params[params.index_of("head.weights")].fill(0.0);
  params[params.index_of("head.bias")].fill(0.0);
  const auto p = m.predict_relation({"x", "y"});
  CHECK(p.label == "a");
  CHECK(p.probability == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("multinomial naive Bayes") {
  const std::vector<AnnotatedQuestion> qs = {question({"x", "y"}, "A"), question({"z"}, "B")};
  const auto labels = RelationLabelSpace::from_questions(qs);
  const auto nb = nb_train(qs, labels, 1.0);
  const auto [label, score] = nb_predict(nb, labels, {"x"});
  CHECK(label == "A");
  CHECK(score == doctest::Approx(std::log(0.5) + std::log(2.0 / 5.0)).epsilon(1e-14));
  const auto scores = nb.log_scores({"x"});
  CHECK(scores[1] == doctest::Approx(std::log(0.5) + std::log(1.0 / 4.0)).epsilon(1e-14));

  const std::vector<AnnotatedQuestion> one = {question({"p"}, "only"), question({"q"}, "only")};
  const auto single = nb_train(one, RelationLabelSpace::from_questions(one));
  CHECK(nb_predict(single, RelationLabelSpace::from_questions(one), {"zzz"}).first == "only");

  CHECK(nb.log_scores({"x", "z", "x"}) == nb.log_scores({"z", "x", "x"}));
  CHECK_THROWS(nb_train({}, labels));
}

TEST_CASE("naive Bayes tagger features") {
  CHECK(token_features({"a", "b", "c"}, 0) == std::vector<std::string>{"w=a", "p=<s>", "n=b"});
  CHECK(token_features({"a", "b", "c"}, 2) == std::vector<std::string>{"w=c", "p=b", "n=</s>"});
}

TEST_CASE("every kind survives a save and reload") {
  const auto corpus = trigger_relation_corpus(40, 3, 6, 21);
  const auto ed = entity_detection_corpus(40, 6, 22);
  struct Case {
    Task task;
    ModelKind kind;
  };
  for (auto c : {Case{Task::RELATION, ModelKind::BIGRU2}, Case{Task::RELATION, ModelKind::CONV_GRU},
                 Case{Task::RELATION, ModelKind::NB_MULTINOMIAL}, Case{Task::RELATION, ModelKind::MAJORITY},
                 Case{Task::ENTITY, ModelKind::BILSTM2}, Case{Task::ENTITY, ModelKind::NT_BILSTM1},
                 Case{Task::ENTITY, ModelKind::NB_MULTINOMIAL},
                 Case{Task::ENTITY, ModelKind::NAIVE_ALL_ENTITY}}) {
    const auto& data = c.task == Task::RELATION ? corpus : ed;
    auto d = default_descriptor(c.task, c.kind, 100);
    d.max_len = 12;
    const auto labels = c.task == Task::RELATION ? RelationLabelSpace::from_questions(data.questions)
                                                 : RelationLabelSpace{};
    auto m = Model::build(d, &data.embeddings, labels, 4, data.lexicon);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.optimizer.kind = neural::OptimizerKind::ADAM_COUPLED;
    train(m, data.questions, {}, cfg);

    const auto text = bytes(m);
    std::istringstream in(text);
    const auto back = Model::read(in);
    CHECK(bytes(back) == text);
    for (const auto& q : data.questions) {
      if (c.task == Task::RELATION) {
        const auto a = m.predict_relation(q.tokens), b = back.predict_relation(q.tokens);
        CHECK(a.label == b.label);
        CHECK(a.probability == b.probability);
      } else {
        CHECK(m.predict_tags(q.tokens).mapped_tags == back.predict_tags(q.tokens).mapped_tags);
      }
    }
  }
  std::istringstream junk("QAMODEL 2 x\n");
  CHECK_THROWS(Model::read(junk));
}

TEST_CASE("training is seeded and zero epochs is a no-op") {
  const auto corpus = trigger_relation_corpus(40, 4, 6, 5);
  const auto labels = RelationLabelSpace::from_questions(corpus.questions);
  const auto d = small(Task::RELATION, ModelKind::CONV_GRU);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 77;
  cfg.optimizer.kind = neural::OptimizerKind::ADAM_COUPLED;
  cfg.optimizer.learning_rate = 0.01;

  auto a = Model::build(d, &corpus.embeddings, labels, 1);
  auto b = Model::build(d, &corpus.embeddings, labels, 1);
  const auto before = bytes(a);
  const auto ra = train(a, corpus.questions, {}, cfg);
  const auto rb = train(b, corpus.questions, {}, cfg);
  CHECK(bytes(a) == bytes(b));
  REQUIRE(ra.log.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ra.log[i].train_loss == rb.log[i].train_loss);
    CHECK(ra.log[i].train_accuracy == rb.log[i].train_accuracy);
  }

  auto c = Model::build(d, &corpus.embeddings, labels, 1);
  cfg.epochs = 0;
  const auto rc = train(c, corpus.questions, {}, cfg);
  CHECK(rc.log.empty());
  CHECK(rc.best_epoch == 0);
  CHECK(bytes(c) == before);

  std::vector<AnnotatedQuestion> unknown = {question({"x"}, "never-seen")};
  CHECK_THROWS(train(c, unknown, {}, cfg));
  CHECK_THROWS(train(c, {}, {}, cfg));
}

TEST_CASE("single-example loss descends under small-step SGD") {
  const auto table = small_table();
  for (auto kind : {ModelKind::BILSTM2, ModelKind::NT_BILSTM1, ModelKind::BIGRU2, ModelKind::CONV_GRU}) {
    const auto task = kind == ModelKind::BIGRU2 || kind == ModelKind::CONV_GRU ? Task::RELATION : Task::ENTITY;
    auto d = small(task, kind);
    d.dropout.assign(d.dropout.size(), 0.0);
    d.noun_filter = false;
    d.freeze_embeddings = false;
    auto m = Model::build(d, &table, RelationLabelSpace({"a", "b", "c"}), 2);
    auto& net = *m.network();
    neural::Example ex;
    ex.input = net.encode({"how", "old", "is", "tom", "hanks"});
    ex.targets = task == Task::ENTITY ? std::vector<std::size_t>{0, 0, 0, 1, 1}
                                      : std::vector<std::size_t>{2};
    neural::OptimizerState sgd;
    sgd.learning_rate = 0.05;
    double previous = net.loss(ex, 0.0, {});
    for (int step = 0; step < 50; ++step) {
      auto g = neural::zeros_like(net.params());
      net.loss_and_gradient(ex, 0.0, {}, g);
      neural::optimizer_step(sgd, net.params(), g);
      const double now = net.loss(ex, 0.0, {});
      CHECK(now <= previous);
      previous = now;
    }
  }
}
