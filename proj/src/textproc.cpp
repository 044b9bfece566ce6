#include "kbqa/textproc.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "kbqa/error.hpp"

namespace kbqa {
namespace {

bool is_alnum_byte(unsigned char c) {
  // Non-ASCII bytes belong to UTF-8 letters as far as trimming is concerned.
  return c >= 0x80 || std::isalnum(c) != 0;
}

// Returns the byte length of a whitespace code point at text[i], or 0.
std::size_t whitespace_length(std::string_view text, std::size_t i) {
  const auto c = static_cast<unsigned char>(text[i]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return 1;
  auto byte = [&](std::size_t k) -> unsigned {
    return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0u;
  };
  if (c == 0xC2 && (byte(1) == 0xA0 || byte(1) == 0x85)) return 2;
  if (c == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;
  if (c == 0xE2 && byte(1) == 0x80 && ((byte(2) >= 0x80 && byte(2) <= 0x8A) || byte(2) == 0xA8 ||
                                       byte(2) == 0xA9 || byte(2) == 0xAF))
    return 3;
  if (c == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;
  if (c == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;
  return 0;
}

void push_piece(std::string_view piece, Tokens& out) {
  std::size_t begin = 0;
  std::size_t end = piece.size();
  while (begin < end && !is_alnum_byte(static_cast<unsigned char>(piece[begin]))) ++begin;
  while (end > begin && !is_alnum_byte(static_cast<unsigned char>(piece[end - 1]))) --end;
  if (begin == end) return;
  std::string token(piece.substr(begin, end - begin));
  for (auto& ch : token) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  out.push_back(std::move(token));
}

struct ClosedClassWord {
  std::string_view word;
  PosTag tag;
};

constexpr std::array kClosedClass = {
    ClosedClassWord{"a", PosTag::DET},        ClosedClassWord{"an", PosTag::DET},
    ClosedClassWord{"the", PosTag::DET},      ClosedClassWord{"this", PosTag::DET},
    ClosedClassWord{"that", PosTag::DET},     ClosedClassWord{"these", PosTag::DET},
    ClosedClassWord{"those", PosTag::DET},    ClosedClassWord{"some", PosTag::DET},
    ClosedClassWord{"any", PosTag::DET},      ClosedClassWord{"each", PosTag::DET},
    ClosedClassWord{"every", PosTag::DET},    ClosedClassWord{"another", PosTag::DET},
    ClosedClassWord{"no", PosTag::DET},

    ClosedClassWord{"of", PosTag::ADP},       ClosedClassWord{"in", PosTag::ADP},
    ClosedClassWord{"on", PosTag::ADP},       ClosedClassWord{"at", PosTag::ADP},
    ClosedClassWord{"by", PosTag::ADP},       ClosedClassWord{"for", PosTag::ADP},
    ClosedClassWord{"with", PosTag::ADP},     ClosedClassWord{"from", PosTag::ADP},
    ClosedClassWord{"to", PosTag::ADP},       ClosedClassWord{"about", PosTag::ADP},
    ClosedClassWord{"into", PosTag::ADP},     ClosedClassWord{"over", PosTag::ADP},
    ClosedClassWord{"under", PosTag::ADP},    ClosedClassWord{"after", PosTag::ADP},
    ClosedClassWord{"before", PosTag::ADP},   ClosedClassWord{"during", PosTag::ADP},
    ClosedClassWord{"between", PosTag::ADP},  ClosedClassWord{"through", PosTag::ADP},
    ClosedClassWord{"as", PosTag::ADP},       ClosedClassWord{"than", PosTag::ADP},

    ClosedClassWord{"i", PosTag::PRON},       ClosedClassWord{"you", PosTag::PRON},
    ClosedClassWord{"he", PosTag::PRON},      ClosedClassWord{"she", PosTag::PRON},
    ClosedClassWord{"it", PosTag::PRON},      ClosedClassWord{"we", PosTag::PRON},
    ClosedClassWord{"they", PosTag::PRON},    ClosedClassWord{"me", PosTag::PRON},
    ClosedClassWord{"him", PosTag::PRON},     ClosedClassWord{"her", PosTag::PRON},
    ClosedClassWord{"us", PosTag::PRON},      ClosedClassWord{"them", PosTag::PRON},
    ClosedClassWord{"his", PosTag::PRON},     ClosedClassWord{"its", PosTag::PRON},
    ClosedClassWord{"their", PosTag::PRON},   ClosedClassWord{"our", PosTag::PRON},
    ClosedClassWord{"your", PosTag::PRON},    ClosedClassWord{"my", PosTag::PRON},

    // wh-words
    ClosedClassWord{"what", PosTag::PRON},    ClosedClassWord{"which", PosTag::PRON},
    ClosedClassWord{"who", PosTag::PRON},     ClosedClassWord{"whom", PosTag::PRON},
    ClosedClassWord{"whose", PosTag::PRON},   ClosedClassWord{"how", PosTag::ADV},
    ClosedClassWord{"when", PosTag::ADV},     ClosedClassWord{"where", PosTag::ADV},
    ClosedClassWord{"why", PosTag::ADV},

    // auxiliaries
    ClosedClassWord{"is", PosTag::VERB},      ClosedClassWord{"are", PosTag::VERB},
    ClosedClassWord{"was", PosTag::VERB},     ClosedClassWord{"were", PosTag::VERB},
    ClosedClassWord{"be", PosTag::VERB},      ClosedClassWord{"been", PosTag::VERB},
    ClosedClassWord{"being", PosTag::VERB},   ClosedClassWord{"am", PosTag::VERB},
    ClosedClassWord{"do", PosTag::VERB},      ClosedClassWord{"does", PosTag::VERB},
    ClosedClassWord{"did", PosTag::VERB},     ClosedClassWord{"has", PosTag::VERB},
    ClosedClassWord{"have", PosTag::VERB},    ClosedClassWord{"had", PosTag::VERB},
    ClosedClassWord{"can", PosTag::VERB},     ClosedClassWord{"could", PosTag::VERB},
    ClosedClassWord{"will", PosTag::VERB},    ClosedClassWord{"would", PosTag::VERB},
    ClosedClassWord{"shall", PosTag::VERB},   ClosedClassWord{"should", PosTag::VERB},
    ClosedClassWord{"may", PosTag::VERB},     ClosedClassWord{"might", PosTag::VERB},
    ClosedClassWord{"must", PosTag::VERB},

    ClosedClassWord{"and", PosTag::OTHER},    ClosedClassWord{"or", PosTag::OTHER},
    ClosedClassWord{"but", PosTag::OTHER},    ClosedClassWord{"not", PosTag::OTHER},
};

std::optional<PosTag> closed_class(std::string_view token) {
  for (const auto& entry : kClosedClass)
    if (entry.word == token) return entry.tag;
  return std::nullopt;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (const auto ws = whitespace_length(text, i); ws > 0) {
      if (i > start) push_piece(text.substr(start, i - start), out);
      i += ws;
      start = i;
    } else {
      ++i;
    }
  }
  if (start < text.size()) push_piece(text.substr(start), out);
  return out;
}

std::vector<std::string> ngrams(const Tokens& tokens, std::size_t max_n) {
  std::vector<std::string> out;
  const auto top = std::min(max_n, tokens.size());
  for (std::size_t n = 1; n <= top; ++n) {
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      std::string gram = tokens[start];
      for (std::size_t j = 1; j < n; ++j) {
        gram += ' ';
        gram += tokens[start + j];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += sep;
    out += tokens[i];
  }
  return out;
}

std::string_view to_string(PosTag tag) {
  switch (tag) {
    case PosTag::NOUN: return "NOUN";
    case PosTag::PROPN: return "PROPN";
    case PosTag::VERB: return "VERB";
    case PosTag::ADJ: return "ADJ";
    case PosTag::ADV: return "ADV";
    case PosTag::DET: return "DET";
    case PosTag::ADP: return "ADP";
    case PosTag::PRON: return "PRON";
    case PosTag::OTHER: return "OTHER";
  }
  return "OTHER";
}

std::optional<PosTag> parse_pos_tag(std::string_view name) {
  for (auto tag : {PosTag::NOUN, PosTag::PROPN, PosTag::VERB, PosTag::ADJ, PosTag::ADV,
                   PosTag::DET, PosTag::ADP, PosTag::PRON, PosTag::OTHER})
    if (to_string(tag) == name) return tag;
  return std::nullopt;
}

PosLexicon PosLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open lexicon file " + path.string());
  PosLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(path.string(), line_no, "expected token<TAB>TAG");
    const auto tag = parse_pos_tag(std::string_view(line).substr(tab + 1));
    if (!tag) throw ParseError(path.string(), line_no, "unknown tag '" + line.substr(tab + 1) + "'");
    const auto token = tokenize(line.substr(0, tab));
    if (token.size() != 1) throw ParseError(path.string(), line_no, "lexicon key must be one token");
    lexicon.add(token.front(), *tag);
  }
  return lexicon;
}

void PosLexicon::add(std::string_view token, PosTag tag) {
  std::string key(token);
  for (auto& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  entries_.insert_or_assign(std::move(key), tag);
}

std::optional<PosTag> PosLexicon::find(std::string_view token) const {
  if (auto it = entries_.find(token); it != entries_.end()) return it->second;
  return std::nullopt;
}

std::vector<PosTag> pos_tag(const Tokens& tokens, const PosLexicon& lexicon) {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (auto tag = lexicon.find(token)) {
      tags.push_back(*tag);
    } else if (auto closed = closed_class(token)) {
      tags.push_back(*closed);
    } else if (ends_with(token, "ly")) {
      tags.push_back(PosTag::ADV);
    } else if (ends_with(token, "ing") || ends_with(token, "ed")) {
      tags.push_back(PosTag::VERB);
    } else {
      // digits and everything else fall into the open-class default
      tags.push_back(PosTag::NOUN);
    }
  }
  return tags;
}

FilterResult noun_chunk_filter(const Tokens& tokens, const std::vector<PosTag>& tags) {
  if (tokens.size() != tags.size())
    throw std::invalid_argument("noun_chunk_filter: tokens and tags differ in length");

  std::vector<bool> keep(tokens.size(), false);
  auto is_noun = [&](std::size_t i) { return tags[i] == PosTag::NOUN || tags[i] == PosTag::PROPN; };
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_noun(i)) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < tokens.size() && is_noun(i)) keep[i++] = true;
    while (begin > 0 && (tags[begin - 1] == PosTag::ADJ || tags[begin - 1] == PosTag::DET))
      keep[--begin] = true;
  }

  FilterResult result;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (keep[k]) {
      result.kept_tokens.push_back(tokens[k]);
      result.index_map.push_back(k);
    }
  }
  if (result.kept_tokens.empty()) {
    result.kept_tokens = tokens;
    result.index_map.resize(tokens.size());
    for (std::size_t k = 0; k < tokens.size(); ++k) result.index_map[k] = k;
    result.degraded = true;
  }
  return result;
}

}  // namespace kbqa
