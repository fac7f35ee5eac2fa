#include "narrmap/analysis.hpp"

#include "narrmap/error.hpp"

namespace narrmap {

std::shared_ptr<const AnalyzedCorpus> AnalyzedCorpus::build(Corpus corpus, const AnalysisConfig& config,
                                                            std::optional<ClusterModel> clusters_override) {
  if (corpus.empty()) fail(ErrorKind::invalid_input, "corpus is empty");
  std::shared_ptr<AnalyzedCorpus> a(new AnalyzedCorpus());
  a->config_ = config;
  a->lexicon_ = config.stopwords_path ? Lexicon::with_stopwords(*config.stopwords_path) : Lexicon::builtin();
  a->tfidf_ = TfidfModel::fit(corpus, *a->lexicon_, config.vectorizer);
  a->vectors_ = vectorize_corpus(corpus, a->tfidf_);
  if (clusters_override) {
    if (clusters_override->document_count() != corpus.size() ||
        static_cast<std::size_t>(clusters_override->membership.rows()) != corpus.size())
      fail(ErrorKind::invalid_input, "cluster model does not match the corpus size");
    a->clusters_ = std::move(*clusters_override);
  } else {
    a->clusters_ = cluster_documents(a->vectors_.values, config.clustering);
  }
  a->entities_.reserve(corpus.size());
  for (const auto& d : corpus) a->entities_.push_back(extract_entities(d, *a->lexicon_));
  const auto terms = keyword_terms(corpus, *a->lexicon_);
  for (int c : a->clusters_.cluster_ids) {
    a->keywords_.push_back(cluster_keywords(terms, a->clusters_, c));
    a->top_keywords_.push_back(select_top_k(a->keywords_.back(), a->clusters_.member_count(c)));
  }
  a->corpus_ = std::move(corpus);
  return a;
}

}  // namespace narrmap
