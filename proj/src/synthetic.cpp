#include "kbqa/synthetic.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kbqa {
namespace {

const std::vector<std::string> kTriggers = {"born", "wrote", "capital", "married",
                                            "directed", "founded", "speaks", "plays"};

const std::vector<std::string> kFiller = {
    "what", "is", "the", "of", "who", "did", "which", "a", "was", "does", "tell", "me",
    "about", "please", "that", "this", "in", "on", "at", "to", "do", "you", "know", "for",
    "by", "an", "one", "there", "it", "some"};

const std::vector<std::string> kFirst = {"anna",  "boris", "carmen", "dmitri", "elena",
                                         "farid", "greta", "hugo",   "ines",   "jonas",
                                         "kira",  "lucas", "marta",  "nikos",  "olga",
                                         "pavel", "rosa",  "stefan", "tomas",  "uma",
                                         "viktor", "wanda", "xavier", "yara",  "zoran"};

const std::vector<std::string> kLast = {"abbott", "brandt", "castro", "dumont", "eriksen",
                                        "fischer", "garcia", "horvat", "ivanov", "jensen",
                                        "kowalski", "larsen", "moreau", "novak", "orban",
                                        "petrov", "quinn", "rossi", "schmidt", "tanaka",
                                        "ulrich", "varga", "weber", "yilmaz", "zeman"};

const std::vector<std::string> kModifiers = {"really",  "truly",   "clearly", "actually",
                                             "certainly", "basically", "exactly", "honestly"};

const std::vector<std::string> kTemplates = {
    "what is the birthplace of {E}",   "where was {E} born",
    "who is the spouse of {E}",        "what movies did {E} direct",
    "which country is {E} from",       "when did {E} die",
    "what is the nationality of {E}",  "what instrument does {E} play",
    "who are the parents of {E}",      "what language does {E} speak",
    "what team did {E} join",          "where did {E} study",
    "what genre is {E} known for",     "how tall is {E}",
    "what books did {E} write",        "which city did {E} live in",
    "what is the profession of {E}",   "who influenced {E}",
    "what religion does {E} follow",   "what awards did {E} win"};

const std::vector<std::pair<std::string, PosTag>> kTemplateLexicon = {
    {"what", PosTag::PRON},      {"which", PosTag::PRON},    {"who", PosTag::PRON},
    {"where", PosTag::ADV},      {"when", PosTag::ADV},      {"how", PosTag::ADV},
    {"is", PosTag::VERB},        {"was", PosTag::VERB},      {"are", PosTag::VERB},
    {"did", PosTag::VERB},       {"does", PosTag::VERB},     {"the", PosTag::DET},
    {"of", PosTag::ADP},         {"from", PosTag::ADP},      {"for", PosTag::ADP},
    {"in", PosTag::ADP},         {"tall", PosTag::ADJ},      {"birthplace", PosTag::NOUN},
    {"spouse", PosTag::NOUN},    {"movies", PosTag::NOUN},   {"country", PosTag::NOUN},
    {"nationality", PosTag::NOUN}, {"instrument", PosTag::NOUN}, {"parents", PosTag::NOUN},
    {"language", PosTag::NOUN},  {"team", PosTag::NOUN},     {"genre", PosTag::NOUN},
    {"books", PosTag::NOUN},     {"city", PosTag::NOUN},     {"profession", PosTag::NOUN},
    {"religion", PosTag::NOUN},  {"awards", PosTag::NOUN},   {"born", PosTag::VERB},
    {"direct", PosTag::VERB},    {"die", PosTag::VERB},      {"play", PosTag::VERB},
    {"speak", PosTag::VERB},     {"join", PosTag::VERB},     {"study", PosTag::VERB},
    {"known", PosTag::VERB},     {"write", PosTag::VERB},    {"live", PosTag::VERB},
    {"influenced", PosTag::VERB}, {"follow", PosTag::VERB},  {"win", PosTag::VERB}};

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

AnnotatedQuestion make_question(const KnowledgeBase& kb, const Fact& fact, Tokens tokens) {
  AnnotatedQuestion q;
  q.text = join(tokens);
  q.tokens = std::move(tokens);
  q.gold_subject = fact.subject;
  q.gold_relation = fact.relation;
  q.gold_object = fact.object;
  q.gold_tags = derive_gold_tags(q.tokens, kb.aliases.at(fact.subject));
  return q;
}

}  // namespace

SyntheticCorpus trigger_relation_corpus(std::size_t examples, std::size_t relations,
                                        std::size_t dim, std::uint64_t seed) {
  if (relations == 0 || relations > kTriggers.size())
    throw std::invalid_argument("trigger corpus supports 1.." + std::to_string(kTriggers.size()) +
                                " relations");
  std::mt19937_64 rng(derive_seed(seed, "synthetic.trigger"));
  std::set<std::string> vocab(kFiller.begin(), kFiller.end());
  vocab.insert(kTriggers.begin(), kTriggers.begin() + static_cast<std::ptrdiff_t>(relations));
  SyntheticCorpus corpus{{}, {}, random_embeddings(vocab, dim, derive_seed(seed, "synthetic.embed")),
                         {}};

  constexpr std::size_t kEntities = 40;
  for (std::size_t e = 0; e < kEntities; ++e) {
    const auto id = "e" + std::to_string(e);
    corpus.kb.aliases[id].insert("ent" + std::to_string(e));
    for (std::size_t r = 0; r < relations; ++r)
      corpus.kb.facts.push_back({id, "rel_" + kTriggers[r], "obj" + std::to_string(e * 10 + r)});
  }

  std::uniform_int_distribution<std::size_t> length(4, 10);
  for (std::size_t i = 0; i < examples; ++i) {
    const std::size_t r = i % relations;
    const std::size_t e = std::uniform_int_distribution<std::size_t>(0, kEntities - 1)(rng);
    const auto& fact = corpus.kb.facts[e * relations + r];
    Tokens tokens;
    const auto n = length(rng);
    for (std::size_t t = 0; t + 2 < n; ++t) tokens.push_back(pick(kFiller, rng));
    auto at = [&] {
      return tokens.begin() +
             static_cast<std::ptrdiff_t>(std::uniform_int_distribution<std::size_t>(0, tokens.size())(rng));
    };
    tokens.insert(at(), kTriggers[r]);
    tokens.insert(at(), "ent" + std::to_string(e));
    corpus.questions.push_back(make_question(corpus.kb, fact, std::move(tokens)));
  }
  std::shuffle(corpus.questions.begin(), corpus.questions.end(), rng);
  return corpus;
}

SyntheticCorpus entity_detection_corpus(std::size_t questions, std::size_t dim,
                                        std::uint64_t seed, double modifier_rate) {
  std::mt19937_64 rng(derive_seed(seed, "synthetic.ed"));
  std::set<std::string> vocab;
  PosLexicon lexicon;
  for (const auto& [token, tag] : kTemplateLexicon) {
    vocab.insert(token);
    lexicon.add(token, tag);
  }
  SyntheticCorpus corpus{{}, {}, random_embeddings(vocab, dim, derive_seed(seed, "synthetic.embed")),
                         std::move(lexicon)};

  // 25 single-token and 25 two-token names
  std::vector<Tokens> names;
  for (std::size_t i = 0; i < 25; ++i) names.push_back({kLast[i]});
  for (std::size_t i = 0; i < 25; ++i) names.push_back({kFirst[i], kLast[(i + 7) % 25]});
  for (std::size_t n = 0; n < names.size(); ++n) {
    const auto id = "p" + std::to_string(n);
    corpus.kb.aliases[id].insert(join(names[n]));
    for (std::size_t t = 0; t < kTemplates.size(); ++t)
      corpus.kb.facts.push_back({id, "rel" + std::to_string(t), "o" + std::to_string(n * 100 + t)});
  }

  std::bernoulli_distribution modify(modifier_rate), before(0.5);
  for (std::size_t i = 0; i < questions; ++i) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng);
    const auto t = std::uniform_int_distribution<std::size_t>(0, kTemplates.size() - 1)(rng);
    Tokens phrase = names[n];
    if (modify(rng)) {
      const auto& m = pick(kModifiers, rng);
      if (before(rng))
        phrase.insert(phrase.begin(), m);
      else
        phrase.push_back(m);
    }
    Tokens tokens;
    std::istringstream words(kTemplates[t]);
    for (std::string word; words >> word;) {
      if (word == "{E}") {
        tokens.insert(tokens.end(), phrase.begin(), phrase.end());
      } else {
        tokens.push_back(word);
      }
    }
    corpus.questions.push_back(
        make_question(corpus.kb, corpus.kb.facts[n * kTemplates.size() + t], std::move(tokens)));
  }
  return corpus;
}

KnowledgeBase random_knowledge_base(std::mt19937_64& rng, std::size_t max_aliases,
                                    std::size_t max_facts) {
  static const std::vector<std::string> kPool = {"red",  "blue", "river", "stone", "king",
                                                 "north", "old", "new",  "city",  "john",
                                                 "mary", "lake", "hill", "park",  "star"};
  KnowledgeBase kb;
  const auto aliases = std::uniform_int_distribution<std::size_t>(1, max_aliases)(rng);
  const auto entities = std::uniform_int_distribution<std::size_t>(1, aliases)(rng);
  for (std::size_t a = 0; a < aliases; ++a) {
    // every entity gets at least one alias
    const auto e = a < entities ? a : std::uniform_int_distribution<std::size_t>(0, entities - 1)(rng);
    Tokens words;
    const auto len = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    for (std::size_t w = 0; w < len; ++w) words.push_back(pick(kPool, rng));
    kb.aliases["m" + std::to_string(e)].insert(join(words));
  }
  const auto facts = std::uniform_int_distribution<std::size_t>(0, max_facts)(rng);
  for (std::size_t f = 0; f < facts; ++f) {
    const auto e = std::uniform_int_distribution<std::size_t>(0, entities - 1)(rng);
    kb.facts.push_back({"m" + std::to_string(e),
                        "r" + std::to_string(std::uniform_int_distribution<int>(0, 5)(rng)),
                        "v" + std::to_string(f)});
  }
  return kb;
}

}  // namespace kbqa
