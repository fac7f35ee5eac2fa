#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace narrmap {

/// Word lists used by the tokenizer and the heuristic tagger. The built-in
/// instance is compiled from data/*.txt; any list can be replaced from disk.
class Lexicon {
 public:
  static std::shared_ptr<const Lexicon> builtin();

  /// Built-in lists with the stopword list replaced by `stopwords_path`.
  static std::shared_ptr<const Lexicon> with_stopwords(const std::filesystem::path& stopwords_path);

  bool is_stopword(std::string_view lower) const { return stopwords_.contains(std::string(lower)); }
  bool is_noun(std::string_view lower) const;
  bool is_adjective(std::string_view lower) const { return adjectives_.contains(std::string(lower)); }
  bool is_abstract(std::string_view lower) const { return abstract_.contains(std::string(lower)); }
  std::size_t stopword_count() const { return stopwords_.size(); }

  static std::unordered_set<std::string> parse_word_list(std::string_view text);

 private:
  std::unordered_set<std::string> stopwords_;
  std::unordered_set<std::string> nouns_;
  std::unordered_set<std::string> adjectives_;
  std::unordered_set<std::string> abstract_;
};

struct Token {
  std::string text;  // lowercase
  bool stopword = false;

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenList = std::vector<Token>;

/// A word as it appears in the source text, with the positional facts the
/// entity and noun-phrase heuristics need.
struct RawToken {
  std::string surface;
  std::string lower;
  std::size_t begin = 0;  // byte offsets into the scanned text
  std::size_t end = 0;
  bool capitalized = false;
  bool sentence_initial = false;
  /// Only whitespace or a single hyphen separates this token from the previous one.
  bool joined_to_previous = false;
};

/// Splits on word boundaries. A word is a maximal run of letters/digits (any
/// non-ASCII letter counts); '.' and apostrophes are kept only between two word
/// characters, so "U.S." yields "U.S" and "don't" stays whole.
std::vector<RawToken> scan_words(std::string_view text);

TokenList tokenize(std::string_view text, const Lexicon& lexicon);
TokenList tokenize(std::string_view text);

/// Token strings, optionally without stopwords.
std::vector<std::string> token_texts(const TokenList& tokens, bool drop_stopwords);

std::string to_lower_utf8(std::string_view text);

}  // namespace narrmap
