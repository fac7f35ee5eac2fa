#pragma once

#include "narrmap/clustering.hpp"
#include "narrmap/corpus.hpp"
#include "narrmap/vectorize.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace narrmap {

struct AnalysisConfig {
  VectorizerConfig vectorizer;
  ClusterParams clustering;
  std::optional<std::filesystem::path> stopwords_path;
};

/// Everything derived from a corpus before extraction: lexical model,
/// document vectors, clusters, entities and per-cluster keywords. Immutable
/// once built and safe to share across threads.
class AnalyzedCorpus {
 public:
  /// `clusters_override` replaces density clustering (fixtures, external clusterers).
  static std::shared_ptr<const AnalyzedCorpus> build(Corpus corpus, const AnalysisConfig& config,
                                                     std::optional<ClusterModel> clusters_override = std::nullopt);

  const Corpus& corpus() const { return corpus_; }
  const Lexicon& lexicon() const { return *lexicon_; }
  const AnalysisConfig& config() const { return config_; }
  const TfidfModel& tfidf() const { return tfidf_; }
  const DocumentVectors& vectors() const { return vectors_; }
  const ClusterModel& clusters() const { return clusters_; }
  const std::vector<EntitySpan>& entities(std::size_t doc) const { return entities_[doc]; }
  /// Ranked keywords and the selected top-k for a non-noise cluster.
  const std::vector<ClusterKeyword>& keywords(int cluster) const { return keywords_.at(static_cast<std::size_t>(cluster)); }
  const std::vector<ClusterKeyword>& top_keywords(int cluster) const { return top_keywords_.at(static_cast<std::size_t>(cluster)); }

  std::size_t size() const { return corpus_.size(); }

 private:
  AnalyzedCorpus() = default;

  Corpus corpus_;
  AnalysisConfig config_;
  std::shared_ptr<const Lexicon> lexicon_;
  TfidfModel tfidf_;
  DocumentVectors vectors_;
  ClusterModel clusters_;
  std::vector<std::vector<EntitySpan>> entities_;
  std::vector<std::vector<ClusterKeyword>> keywords_;
  std::vector<std::vector<ClusterKeyword>> top_keywords_;
};

}  // namespace narrmap
