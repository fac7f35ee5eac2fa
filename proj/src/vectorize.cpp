#include "narrmap/vectorize.hpp"

#include "narrmap/error.hpp"
#include "narrmap/linalg.hpp"

#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

namespace narrmap {

TfidfModel TfidfModel::fit(const Corpus& corpus, const Lexicon& lexicon, const VectorizerConfig& config) {
  TfidfModel m;
  m.document_count_ = corpus.size();
  m.doc_tokens_.reserve(corpus.size());
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    m.doc_tokens_.push_back(token_texts(tokenize(explanation_text(doc), lexicon), true));
    const std::set<std::string> distinct(m.doc_tokens_.back().begin(), m.doc_tokens_.back().end());
    for (const auto& t : distinct) ++df[t];
  }
  std::size_t column = 0;
  for (const auto& [term, count] : df) {
    m.vocabulary_.emplace(term, column++);
    m.df_.push_back(count);
    m.idf_.push_back(std::log(static_cast<double>(m.document_count_) / static_cast<double>(count)));
  }

  if (config.projection_dim > 0) {
    // Dense Rademacher projection scaled by 1/sqrt(dim); draws come straight
    // from the 64-bit engine so the matrix is identical on every platform.
    const auto dim = static_cast<Eigen::Index>(config.projection_dim);
    const auto vocab = static_cast<Eigen::Index>(m.vocabulary_.size());
    Eigen::MatrixXd p(dim, vocab);
    std::mt19937_64 rng(config.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Eigen::Index c = 0; c < vocab; ++c) {
      std::uint64_t bits = 0;
      for (Eigen::Index r = 0; r < dim; ++r) {
        if (r % 64 == 0) bits = rng();
        p(r, c) = (bits & 1u) ? scale : -scale;
        bits >>= 1;
      }
    }
    m.projection_ = std::move(p);
  }

  m.documents_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(m.dim()));
  for (std::size_t i = 0; i < corpus.size(); ++i) m.documents_.row(static_cast<Eigen::Index>(i)) = m.weigh(m.doc_tokens_[i]).transpose();
  normalize_rows(m.documents_);
  return m;
}

std::optional<std::size_t> TfidfModel::term_index(const std::string& term) const {
  auto it = vocabulary_.find(term);
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

double TfidfModel::idf(const std::string& term) const {
  auto i = term_index(term);
  return i ? idf_[*i] : 0.0;
}

std::size_t TfidfModel::document_frequency(const std::string& term) const {
  auto i = term_index(term);
  return i ? df_[*i] : 0;
}

Eigen::VectorXd TfidfModel::weigh(const std::vector<std::string>& tokens) const {
  std::map<std::size_t, std::size_t> tf;
  for (const auto& t : tokens) {
    if (auto i = term_index(t)) ++tf[*i];
  }
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocabulary_.size()));
  for (const auto& [col, count] : tf) raw(static_cast<Eigen::Index>(col)) = std::log1p(static_cast<double>(count)) * idf_[col];
  if (projection_) return *projection_ * raw;
  return raw;
}

Eigen::VectorXd TfidfModel::term_direction(const std::string& term) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  auto i = term_index(term);
  if (!i) return out;
  if (projection_) return projection_->col(static_cast<Eigen::Index>(*i));
  out(static_cast<Eigen::Index>(*i)) = 1.0;
  return out;
}

DocumentVectors vectorize_corpus(const Corpus& corpus, const TfidfModel& model) {
  if (corpus.empty()) fail(ErrorKind::invalid_input, "cannot vectorize an empty corpus");
  std::size_t with_vector = 0;
  for (const auto& d : corpus) with_vector += d.provided_vector.has_value();
  if (with_vector != 0 && with_vector != corpus.size())
    fail(ErrorKind::invalid_input, std::to_string(with_vector) + " of " + std::to_string(corpus.size()) +
                                       " documents carry a vector; provide vectors for all documents or none");
  DocumentVectors out;
  if (with_vector == corpus.size()) {
    const auto dim = corpus[0].provided_vector->size();
    out.values.resize(static_cast<Eigen::Index>(corpus.size()), dim);
    for (std::size_t i = 0; i < corpus.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = corpus[i].provided_vector->transpose();
    normalize_rows(out.values);
    out.provided = true;
  } else {
    out.values = model.document_matrix();
  }
  return out;
}

DocumentVectors vectorize_corpus(const Corpus& corpus, const VectorizerConfig& config, const Lexicon& lexicon) {
  if (corpus.empty()) fail(ErrorKind::invalid_input, "cannot vectorize an empty corpus");
  return vectorize_corpus(corpus, TfidfModel::fit(corpus, lexicon, config));
}

}  // namespace narrmap
