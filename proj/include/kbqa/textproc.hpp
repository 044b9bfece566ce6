#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kbqa {

using Tokens = std::vector<std::string>;

/// Lowercases, splits on whitespace and trims punctuation from both ends of
/// each piece. Internal apostrophes and hyphens survive; pure punctuation
/// pieces are dropped.
Tokens tokenize(std::string_view text);

/// All contiguous n-grams for n = 1..max_n, ordered by (n, start).
std::vector<std::string> ngrams(const Tokens& tokens, std::size_t max_n);

std::string join(const Tokens& tokens, std::string_view sep = " ");

enum class PosTag { NOUN, PROPN, VERB, ADJ, ADV, DET, ADP, PRON, OTHER };

std::string_view to_string(PosTag tag);
std::optional<PosTag> parse_pos_tag(std::string_view name);

class PosLexicon {
 public:
  PosLexicon() = default;

  static PosLexicon load(const std::filesystem::path& path);

  void add(std::string_view token, PosTag tag);
  std::optional<PosTag> find(std::string_view token) const;
  const std::map<std::string, PosTag, std::less<>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, PosTag, std::less<>> entries_;
};

/// Lexicon lookup with closed-class and suffix fallbacks; unknown open-class
/// words default to NOUN.
std::vector<PosTag> pos_tag(const Tokens& tokens, const PosLexicon& lexicon);

struct FilterResult {
  Tokens kept_tokens;
  std::vector<std::size_t> index_map;  // source position of each kept token
  bool degraded = false;               // nothing matched; all tokens kept
};

/// Keeps noun clusters: maximal NOUN/PROPN runs plus the ADJ/DET tokens
/// immediately before them.
FilterResult noun_chunk_filter(const Tokens& tokens, const std::vector<PosTag>& tags);

}  // namespace kbqa
