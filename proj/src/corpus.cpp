#include "narrmap/corpus.hpp"

#include "narrmap/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace narrmap {

using nlohmann::json;

namespace {

int parse_int(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
  int value = 0;
  if (pos + len > s.size()) fail(ErrorKind::invalid_input, "invalid timestamp '" + std::string(whole) + "'");
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
  if (ec != std::errc{} || ptr != s.data() + pos + len)
    fail(ErrorKind::invalid_input, "invalid timestamp '" + std::string(whole) + "'");
  return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const std::string whole(text);
  auto bad = [&]() { fail(ErrorKind::invalid_input, "invalid timestamp '" + whole + "'"); };
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') bad();
  const year_month_day ymd{year{parse_int(text, 0, 4, text)}, month{static_cast<unsigned>(parse_int(text, 5, 2, text))},
                           day{static_cast<unsigned>(parse_int(text, 8, 2, text))}};
  if (!ymd.ok()) bad();
  sys_seconds t = sys_days{ymd};
  std::size_t pos = 10;
  if (pos < text.size()) {
    if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ') bad();
    ++pos;
    if (pos + 5 > text.size() || text[pos + 2] != ':') bad();
    const int hh = parse_int(text, pos, 2, text);
    const int mm = parse_int(text, pos + 3, 2, text);
    int ss = 0;
    pos += 5;
    if (pos < text.size() && text[pos] == ':') {
      ss = parse_int(text, pos + 1, 2, text);
      pos += 3;
      if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) bad();
    t += hours{hh} + minutes{mm} + seconds{ss};
    if (pos < text.size()) {
      const char z = text[pos];
      if (z == 'Z' || z == 'z') {
        ++pos;
      } else if (z == '+' || z == '-') {
        const int oh = parse_int(text, pos + 1, 2, text);
        std::size_t next = pos + 3;
        int om = 0;
        if (next < text.size() && text[next] == ':') ++next;
        if (next < text.size()) {
          om = parse_int(text, next, 2, text);
          next += 2;
        }
        const seconds offset = hours{oh} + minutes{om};
        t = z == '+' ? t - offset : t + offset;
        pos = next;
      }
      if (pos != text.size()) bad();
    }
  }
  return t;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(t);
  const year_month_day ymd{days};
  const hh_mm_ss hms{t - days};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::person: return "person";
    case EntityKind::org: return "org";
    case EntityKind::place: return "place";
    case EntityKind::other: return "other";
    case EntityKind::unknown: break;
  }
  return "unknown";
}

EntityKind entity_kind_from_string(std::string_view s) {
  if (s == "person") return EntityKind::person;
  if (s == "org") return EntityKind::org;
  if (s == "place") return EntityKind::place;
  if (s == "other") return EntityKind::other;
  return EntityKind::unknown;
}

EntitySpan EntitySpan::from_surface(std::string surface, EntityKind kind, const Lexicon& lexicon) {
  EntitySpan span;
  span.tokens = token_texts(tokenize(surface, lexicon), false);
  span.surface = std::move(surface);
  span.kind = kind;
  return span;
}

Corpus::Corpus(std::vector<Document> documents) : docs_(std::move(documents)) {
  std::stable_sort(docs_.begin(), docs_.end(), [](const Document& a, const Document& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
  });
  std::optional<Eigen::Index> dim;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& d = docs_[i];
    if (d.id.empty()) fail(ErrorKind::invalid_input, "document with empty id");
    if (!index_.emplace(d.id, i).second) fail(ErrorKind::invalid_input, "duplicate document id '" + d.id + "'");
    if (d.provided_vector) {
      if (d.provided_vector->size() == 0) fail(ErrorKind::invalid_input, "document '" + d.id + "' has an empty vector");
      if (dim && *dim != d.provided_vector->size())
        fail(ErrorKind::invalid_input, "document '" + d.id + "' vector dimension " +
                                           std::to_string(d.provided_vector->size()) + " differs from " +
                                           std::to_string(*dim));
      dim = d.provided_vector->size();
    }
  }
}

std::optional<std::size_t> Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  fail(ErrorKind::not_found, "unknown document '" + std::string(id) + "'");
}

bool Corpus::has_provided_vectors() const {
  return !docs_.empty() && std::all_of(docs_.begin(), docs_.end(), [](const Document& d) { return d.provided_vector.has_value(); });
}

bool Corpus::has_provided_xy() const {
  return !docs_.empty() && std::all_of(docs_.begin(), docs_.end(), [](const Document& d) { return d.provided_xy.has_value(); });
}

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {"id", "timestamp", "headline", "body", "source", "entities", "vector", "xy"};

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end())
    fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": missing required field '" + key + "'");
  if (!it->is_string())
    fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

Eigen::VectorXd number_array(const json& value, const char* key, std::size_t line) {
  if (!value.is_array())
    fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field '" + key + "' must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number())
      fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field '" + key + "' must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = value[i].get<double>();
    if (!std::isfinite(v(static_cast<Eigen::Index>(i))))
      fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field '" + key + "' has a non-finite value");
  }
  return v;
}

Document parse_document(const json& obj, std::size_t line, const Lexicon& lexicon, std::vector<std::string>* warnings) {
  if (!obj.is_object()) fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": expected a JSON object");
  Document doc;
  doc.id = required_string(obj, "id", line);
  if (doc.id.empty()) fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field 'id' is empty");
  const auto ts = required_string(obj, "timestamp", line);
  try {
    doc.timestamp = parse_timestamp(ts);
  } catch (const Error& e) {
    fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field 'timestamp': " + e.what());
  }
  doc.headline = required_string(obj, "headline", line);
  doc.body = required_string(obj, "body", line);
  if (auto it = obj.find("source"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field 'source' must be a string");
    doc.source = it->get<std::string>();
  }
  if (auto it = obj.find("entities"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field 'entities' must be an array");
    for (const auto& e : *it) {
      if (!e.is_object() || !e.contains("surface") || !e["surface"].is_string())
        fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": each entity needs a string 'surface'");
      const auto kind = e.contains("kind") && e["kind"].is_string() ? entity_kind_from_string(e["kind"].get<std::string>())
                                                                     : EntityKind::unknown;
      auto span = EntitySpan::from_surface(e["surface"].get<std::string>(), kind, lexicon);
      if (span.tokens.empty())
        fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": entity '" + span.surface + "' has no word tokens");
      doc.entities.push_back(std::move(span));
    }
  }
  if (auto it = obj.find("vector"); it != obj.end() && !it->is_null()) doc.provided_vector = number_array(*it, "vector", line);
  if (auto it = obj.find("xy"); it != obj.end() && !it->is_null()) {
    auto xy = number_array(*it, "xy", line);
    if (xy.size() != 2) fail(ErrorKind::invalid_input, "line " + std::to_string(line) + ": field 'xy' must have 2 numbers");
    doc.provided_xy = Eigen::Vector2d(xy(0), xy(1));
  }
  if (warnings) {
    for (const auto& [key, _] : obj.items()) {
      if (!kKnownKeys.contains(key)) warnings->push_back("line " + std::to_string(line) + ": ignoring unknown key '" + key + "'");
    }
  }
  return doc;
}

}  // namespace

Corpus load_corpus(std::istream& in, CorpusFormat format, const Lexicon& lexicon, std::vector<std::string>* warnings) {
  if (format != CorpusFormat::jsonl) fail(ErrorKind::invalid_input, "unsupported corpus format");
  std::vector<Document> docs;
  std::set<std::string, std::less<>> seen;
  std::optional<Eigen::Index> dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": malformed JSON (" + e.what() + ")");
    }
    auto doc = parse_document(obj, lineno, lexicon, warnings);
    if (!seen.insert(doc.id).second)
      fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": duplicate id '" + doc.id + "'");
    if (doc.provided_vector) {
      if (dim && *dim != doc.provided_vector->size())
        fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": vector dimension " +
                                           std::to_string(doc.provided_vector->size()) + " differs from " + std::to_string(*dim));
      dim = doc.provided_vector->size();
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Corpus load_corpus(std::istream& in, CorpusFormat format) { return load_corpus(in, format, *Lexicon::builtin()); }

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& d : corpus) {
    json obj = {{"id", d.id}, {"timestamp", format_timestamp(d.timestamp)}, {"headline", d.headline}, {"body", d.body}};
    if (d.source) obj["source"] = *d.source;
    if (!d.entities.empty()) {
      json ents = json::array();
      for (const auto& e : d.entities) ents.push_back({{"surface", e.surface}, {"kind", to_string(e.kind)}});
      obj["entities"] = std::move(ents);
    }
    if (d.provided_vector) obj["vector"] = std::vector<double>(d.provided_vector->begin(), d.provided_vector->end());
    if (d.provided_xy) obj["xy"] = {(*d.provided_xy)(0), (*d.provided_xy)(1)};
    out << obj.dump() << '\n';
  }
}

namespace {

bool looks_title_cased(const std::vector<RawToken>& tokens, const Lexicon& lexicon) {
  std::size_t content = 0;
  std::size_t capitalized = 0;
  for (const auto& t : tokens) {
    if (lexicon.is_stopword(t.lower)) continue;
    ++content;
    if (t.capitalized) ++capitalized;
  }
  return content >= 3 && capitalized * 10 > content * 6;
}

void collect_runs(std::string_view text, const Lexicon& lexicon, bool skip_title_case, std::vector<EntitySpan>& out,
                  std::set<std::vector<std::string>>& seen) {
  const auto tokens = scan_words(text);
  if (skip_title_case && looks_title_cased(tokens, lexicon)) return;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!tokens[i].capitalized) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tokens.size() && tokens[j].capitalized && tokens[j].joined_to_previous) ++j;
    std::size_t first = i;
    std::size_t last = j;  // exclusive
    while (first < last && lexicon.is_stopword(tokens[first].lower)) ++first;
    while (last > first && lexicon.is_stopword(tokens[last - 1].lower)) --last;
    i = j;
    if (first == last) continue;
    if (last - first == 1 && tokens[first].sentence_initial) continue;
    auto span = EntitySpan::from_surface(std::string(text.substr(tokens[first].begin, tokens[last - 1].end - tokens[first].begin)),
                                         EntityKind::unknown, lexicon);
    if (span.tokens.empty() || !seen.insert(span.tokens).second) continue;
    out.push_back(std::move(span));
  }
}

}  // namespace

std::vector<EntitySpan> extract_entities(const Document& doc, const Lexicon& lexicon) {
  if (!doc.entities.empty()) return doc.entities;
  std::vector<EntitySpan> out;
  std::set<std::vector<std::string>> seen;
  collect_runs(doc.headline, lexicon, true, out, seen);
  collect_runs(doc.body, lexicon, false, out, seen);
  return out;
}

std::string explanation_text(const Document& doc) {
  std::string out = doc.headline;
  std::istringstream words(doc.body);
  std::string w;
  std::size_t count = 0;
  while (count < kExplanationBodyWords && words >> w) {
    if (!out.empty()) out.push_back(' ');
    out += w;
    ++count;
  }
  return out;
}

}  // namespace narrmap
