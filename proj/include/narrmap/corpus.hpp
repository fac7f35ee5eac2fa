#pragma once

#include "narrmap/text.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace narrmap {

using Timestamp = std::chrono::sys_seconds;

/// Parses ISO-8601 ("2021-07-11", "2021-07-11T14:30:00Z", "...+02:00",
/// fractional seconds truncated). Naive times are taken as UTC.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

enum class EntityKind { person, org, place, other, unknown };

std::string_view to_string(EntityKind kind);
EntityKind entity_kind_from_string(std::string_view s);

struct EntitySpan {
  std::string surface;
  std::vector<std::string> tokens;  // tokenize(surface), lowercase
  EntityKind kind = EntityKind::unknown;

  static EntitySpan from_surface(std::string surface, EntityKind kind, const Lexicon& lexicon);
};

struct Document {
  std::string id;
  Timestamp timestamp{};
  std::string headline;
  std::string body;
  std::vector<EntitySpan> entities;  // provided annotations; may be empty
  std::optional<std::string> source;
  std::optional<Eigen::VectorXd> provided_vector;
  std::optional<Eigen::Vector2d> provided_xy;
};

/// Validated documents, sorted by (timestamp, id).
class Corpus {
 public:
  Corpus() = default;
  /// Validates and sorts; throws on empty or duplicate ids and on
  /// inconsistent provided_vector dimensions.
  explicit Corpus(std::vector<Document> documents);

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }
  std::span<const Document> documents() const { return docs_; }
  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Index of `id`; throws not_found.
  std::size_t index_of(std::string_view id) const;

  bool has_provided_vectors() const;
  bool has_provided_xy() const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat { jsonl };

/// Reads one JSON document per line (blank lines skipped). Errors name the
/// offending line. Unknown keys are reported through `warnings`.
Corpus load_corpus(std::istream& in, CorpusFormat format, const Lexicon& lexicon,
                   std::vector<std::string>* warnings = nullptr);
Corpus load_corpus(std::istream& in, CorpusFormat format = CorpusFormat::jsonl);

/// Writes the corpus in the same JSONL schema, one line per document in corpus order.
void write_corpus(const Corpus& corpus, std::ostream& out);

/// Provided annotations if present, otherwise maximal runs of capitalized
/// words within a sentence (leading/trailing stopwords trimmed), skipping
/// single-word runs that open a sentence. Headline and body are scanned as
/// separate sentences.
std::vector<EntitySpan> extract_entities(const Document& doc, const Lexicon& lexicon);

/// Headline followed by the first 30 whitespace-delimited words of the body.
std::string explanation_text(const Document& doc);

inline constexpr std::size_t kExplanationBodyWords = 30;

}  // namespace narrmap
