#pragma once

#include "narrmap/corpus.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace narrmap {

struct VectorizerConfig {
  /// 0 keeps the raw vocabulary space; otherwise a seeded random projection to this many dimensions.
  std::size_t projection_dim = 0;
  std::uint64_t seed = 0;
};

/// Lexical TF-IDF space over the non-stopword tokens of each document's
/// explanation text: w(t, d) = ln(1 + tf(t, d)) * ln(N / df(t)).
class TfidfModel {
 public:
  static TfidfModel fit(const Corpus& corpus, const Lexicon& lexicon, const VectorizerConfig& config = {});

  std::size_t document_count() const { return document_count_; }
  std::size_t vocabulary_size() const { return vocabulary_.size(); }
  /// Dimension of vectors produced by this model (after projection, if any).
  std::size_t dim() const { return projection_ ? static_cast<std::size_t>(projection_->rows()) : vocabulary_.size(); }

  std::optional<std::size_t> term_index(const std::string& term) const;
  /// ln(N / df); zero for unknown terms.
  double idf(const std::string& term) const;
  std::size_t document_frequency(const std::string& term) const;

  /// Unnormalized weights of a token bag in the output space.
  Eigen::VectorXd weigh(const std::vector<std::string>& tokens) const;
  /// Output-space direction of a single term (projection column or unit axis); zero for unknown terms.
  Eigen::VectorXd term_direction(const std::string& term) const;

  /// Tokens the model saw for document i (non-stopword tokens of its explanation text).
  const std::vector<std::string>& document_tokens(std::size_t i) const { return doc_tokens_[i]; }
  /// Unit-norm (or zero) lexical vectors, one row per document.
  const Eigen::MatrixXd& document_matrix() const { return documents_; }

 private:
  std::size_t document_count_ = 0;
  std::map<std::string, std::size_t> vocabulary_;  // term -> column, lexicographic
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::optional<Eigen::MatrixXd> projection_;  // dim x vocabulary
  std::vector<std::vector<std::string>> doc_tokens_;
  Eigen::MatrixXd documents_;
};

/// One unit-norm (or all-zero) row per document.
struct DocumentVectors {
  Eigen::MatrixXd values;
  bool provided = false;  // taken from the corpus instead of the lexical model

  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  auto row(std::size_t i) const { return values.row(static_cast<Eigen::Index>(i)); }
};

/// Provided vectors when every document has one (L2-normalized), otherwise
/// the lexical TF-IDF rows of `model`. Mixing provided and missing vectors is an error.
DocumentVectors vectorize_corpus(const Corpus& corpus, const TfidfModel& model);
DocumentVectors vectorize_corpus(const Corpus& corpus, const VectorizerConfig& config, const Lexicon& lexicon);

}  // namespace narrmap
