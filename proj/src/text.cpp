#include "narrmap/text.hpp"

#include "narrmap/error.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace narrmap {

namespace lexicon_data {
std::string_view stopwords();
std::string_view nouns();
std::string_view adjectives();
std::string_view abstract_terms();
}  // namespace lexicon_data

namespace {

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t length;
};

// Lenient UTF-8 decoder; invalid bytes decode as U+FFFD of length 1.
std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = 0xFFFD;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back({0xFFFD, i, 1});
      ++i;
      continue;
    }
    bool ok = i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back({0xFFFD, i, 1});
      ++i;
      continue;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_word_char(char32_t c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  if (c < 0xC0) return false;                   // Latin-1 punctuation and symbols
  if (c == 0xD7 || c == 0xF7) return false;     // multiplication / division signs
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, symbols, arrows, math
  if (c >= 0x3000 && c <= 0x303F) return false;  // CJK punctuation
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if (c >= 0xFF01 && c <= 0xFF0F) return false;
  if (c >= 0xFF1A && c <= 0xFF20) return false;
  if (c >= 0x1F000 && c <= 0x1FAFF) return false;  // emoji
  if (c == 0xFFFD) return false;
  return true;
}

bool is_upper(char32_t c) {
  if (c >= 'A' && c <= 'Z') return true;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return true;
  if (c >= 0x100 && c <= 0x17F) return c % 2 == 0 && c != 0x138;
  if (c >= 0x391 && c <= 0x3A9) return true;
  if (c >= 0x400 && c <= 0x42F) return true;
  return false;
}

char32_t lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c == 0x178) return 0xFF;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return c % 2 == 0 ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 0x25;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 0x3F;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_joiner(char32_t c) { return c == '.' || c == '\'' || c == 0x2019; }
bool is_sentence_end(char32_t c) { return c == '.' || c == '!' || c == '?'; }
bool is_space(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == 0xA0; }

}  // namespace

std::unordered_set<std::string> Lexicon::parse_word_list(std::string_view text) {
  std::unordered_set<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.insert(to_lower_utf8(line.substr(first, last - first + 1)));
  }
  return words;
}

std::shared_ptr<const Lexicon> Lexicon::builtin() {
  static const std::shared_ptr<const Lexicon> instance = [] {
    auto lex = std::make_shared<Lexicon>();
    lex->stopwords_ = parse_word_list(lexicon_data::stopwords());
    lex->nouns_ = parse_word_list(lexicon_data::nouns());
    lex->adjectives_ = parse_word_list(lexicon_data::adjectives());
    lex->abstract_ = parse_word_list(lexicon_data::abstract_terms());
    return lex;
  }();
  return instance;
}

std::shared_ptr<const Lexicon> Lexicon::with_stopwords(const std::filesystem::path& stopwords_path) {
  std::ifstream in(stopwords_path);
  if (!in) fail(ErrorKind::invalid_input, "cannot read stopword list " + stopwords_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto lex = std::make_shared<Lexicon>(*builtin());
  lex->stopwords_ = parse_word_list(buf.str());
  return lex;
}

bool Lexicon::is_noun(std::string_view lower) const {
  const std::string word(lower);
  if (stopwords_.contains(word)) return false;
  if (nouns_.contains(word) || abstract_.contains(word)) return true;
  static constexpr std::array<std::string_view, 8> suffixes = {"tion", "ment", "ity", "ism", "ness", "ence", "ance", "ing"};
  for (auto suffix : suffixes) {
    if (word.size() > suffix.size() + 2 && word.ends_with(suffix)) return true;
  }
  return false;
}

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const auto& cp : decode(text)) {
    if (cp.value == 0xFFFD && cp.length == 1) out.append(text.substr(cp.begin, 1));
    else encode(cp.value == 0x2019 ? U'\'' : lower(cp.value), out);
  }
  return out;
}

std::vector<RawToken> scan_words(std::string_view text) {
  const auto cps = decode(text);
  std::vector<RawToken> tokens;
  std::size_t i = 0;
  std::size_t gap_begin = 0;  // index into cps where the current gap started
  while (i < cps.size()) {
    if (!is_word_char(cps[i].value)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < cps.size()) {
      if (is_word_char(cps[i].value)) {
        ++i;
      } else if (is_joiner(cps[i].value) && i + 1 < cps.size() && is_word_char(cps[i + 1].value) && i > start) {
        ++i;
      } else {
        break;
      }
    }
    RawToken tok;
    tok.begin = cps[start].begin;
    tok.end = cps[i - 1].begin + cps[i - 1].length;
    tok.surface = std::string(text.substr(tok.begin, tok.end - tok.begin));
    for (std::size_t k = start; k < i; ++k) encode(cps[k].value == 0x2019 ? U'\'' : lower(cps[k].value), tok.lower);
    tok.capitalized = is_upper(cps[start].value);

    bool sentence_break = tokens.empty();
    bool joined = !tokens.empty();
    std::size_t hyphens = 0;
    for (std::size_t k = gap_begin; k < start; ++k) {
      const char32_t c = cps[k].value;
      if (is_sentence_end(c)) sentence_break = true;
      if (c == '-') ++hyphens;
      else if (!is_space(c)) joined = false;
    }
    if (hyphens > 1) joined = false;
    tok.sentence_initial = sentence_break;
    tok.joined_to_previous = joined && !sentence_break;
    tokens.push_back(std::move(tok));
    gap_begin = i;
  }
  return tokens;
}

TokenList tokenize(std::string_view text, const Lexicon& lexicon) {
  TokenList out;
  for (auto& raw : scan_words(text)) {
    const bool stop = lexicon.is_stopword(raw.lower);
    out.push_back({std::move(raw.lower), stop});
  }
  return out;
}

TokenList tokenize(std::string_view text) { return tokenize(text, *Lexicon::builtin()); }

std::vector<std::string> token_texts(const TokenList& tokens, bool drop_stopwords) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (drop_stopwords && t.stopword) continue;
    out.push_back(t.text);
  }
  return out;
}

}  // namespace narrmap
