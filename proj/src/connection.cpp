#include "narrmap/connection.hpp"

#include "narrmap/error.hpp"
#include "narrmap/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace narrmap {

std::string_view to_string(ConnectionType t) { return t == ConnectionType::topical ? "Topical" : "Similarity"; }
std::string_view to_string(Side s) { return s == Side::source ? "source" : "target"; }

double token_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.contains(t);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

std::vector<EntityOverlap> entity_overlaps(std::span<const EntitySpan> a, std::span<const EntitySpan> b) {
  std::vector<EntityOverlap> out;
  for (const auto& x : a)
    for (const auto& y : b) out.push_back({x, y, token_jaccard(x.tokens, y.tokens)});
  std::stable_sort(out.begin(), out.end(), [](const EntityOverlap& l, const EntityOverlap& r) {
    if (l.overlap != r.overlap) return l.overlap > r.overlap;
    if (l.a.surface != r.a.surface) return l.a.surface < r.a.surface;
    return l.b.surface < r.b.surface;
  });
  return out;
}

ConnectionType primary_label(double cluster_share) {
  return cluster_share > 0.5 ? ConnectionType::topical : ConnectionType::similarity;
}

ConnectionLabel label_connection(const CoherenceScore& coherence, std::span<const EntityOverlap> overlaps) {
  ConnectionLabel label;
  label.primary = primary_label(coherence.cluster_share);
  label.entity = std::any_of(overlaps.begin(), overlaps.end(), [](const EntityOverlap& o) { return o.overlap >= kEntityOverlapThreshold; });
  return label;
}

std::vector<TokenAttribution> keyword_attributions(const AnalyzedCorpus& analysis, std::size_t source,
                                                   const Eigen::VectorXd& target_vec, const ShapleyConfig& config, Side side) {
  const auto& model = analysis.tfidf();
  const auto& tokens = model.document_tokens(source);
  std::vector<std::string> players;
  std::map<std::string, std::size_t> tf;
  for (const auto& t : tokens) {
    if (tf[t]++ == 0) players.push_back(t);
  }
  if (players.empty())
    fail(ErrorKind::invalid_input, "document '" + analysis.corpus()[source].id + "' has no content tokens to attribute");
  if (target_vec.size() != static_cast<Eigen::Index>(model.dim())) fail(ErrorKind::invalid_input, "target vector dimension mismatch");

  Eigen::MatrixXd columns(static_cast<Eigen::Index>(model.dim()), static_cast<Eigen::Index>(players.size()));
  for (std::size_t p = 0; p < players.size(); ++p) {
    const double w = std::log1p(static_cast<double>(tf[players[p]])) * model.idf(players[p]);
    columns.col(static_cast<Eigen::Index>(p)) = w * model.term_direction(players[p]);
  }
  const CosineGame game(columns, target_vec);
  const auto phi = players.size() <= config.exact_max_tokens ? shapley_exact(game)
                                                             : shapley_permutation(game, config.permutations, config.seed);
  std::vector<TokenAttribution> out;
  for (std::size_t p = 0; p < players.size(); ++p) out.push_back({players[p], phi[p], side});
  std::stable_sort(out.begin(), out.end(), [](const TokenAttribution& a, const TokenAttribution& b) { return std::abs(a.phi) > std::abs(b.phi); });
  return out;
}

namespace {

EventTopic topic_of(const AnalyzedCorpus& analysis, std::size_t doc) {
  EventTopic t;
  t.doc_id = analysis.corpus()[doc].id;
  t.cluster = analysis.clusters().hard_label[doc];
  if (t.cluster != kNoise) t.keywords = analysis.top_keywords(t.cluster);
  return t;
}

Eigen::VectorXd lexical_vector(const AnalyzedCorpus& analysis, std::size_t doc) {
  return analysis.tfidf().document_matrix().row(static_cast<Eigen::Index>(doc)).transpose();
}

}  // namespace

ConnectionExplanation explain_pair(const AnalyzedCorpus& analysis, std::size_t from, std::size_t to, const ExtractionParams& params,
                                   const ShapleyConfig& config) {
  const auto& corpus = analysis.corpus();
  ConnectionExplanation ex;
  ex.from = corpus[from].id;
  ex.to = corpus[to].id;
  ex.coherence = coherence(analysis, from, to, params.coherence());
  const auto overlaps = entity_overlaps(analysis.entities(from), analysis.entities(to));
  ex.label = label_connection(ex.coherence, overlaps);
  for (const auto& o : overlaps)
    if (o.overlap >= kEntityOverlapThreshold) ex.shared_entities.push_back(o);
  ex.topics = {topic_of(analysis, from), topic_of(analysis, to)};

  auto attribute = [&](std::size_t src, std::size_t dst, Side side, std::uint64_t seed) {
    if (analysis.tfidf().document_tokens(src).empty()) return;
    ShapleyConfig cfg = config;
    cfg.seed = seed;
    auto a = keyword_attributions(analysis, src, lexical_vector(analysis, dst), cfg, side);
    ex.attributions.insert(ex.attributions.end(), a.begin(), a.end());
  };
  attribute(from, to, Side::source, config.seed);
  attribute(to, from, Side::target, config.seed ^ 0x9E3779B97F4A7C15ull);
  return ex;
}

ConnectionExplanation explain_connection(const AnalyzedCorpus& analysis, const NarrativeMap& map, std::string_view from,
                                         std::string_view to, const ShapleyConfig& config) {
  if (!map.find_edge(from, to))
    fail(ErrorKind::not_found, "no edge " + std::string(from) + " -> " + std::string(to) + " in the map; use compare for arbitrary pairs");
  return explain_pair(analysis, analysis.corpus().index_of(from), analysis.corpus().index_of(to), map.params, config);
}

EventComparison compare_events(const AnalyzedCorpus& analysis, const NarrativeMap& map, std::string_view a, std::string_view b,
                               const ShapleyConfig& config) {
  const auto& corpus = analysis.corpus();
  auto ia = corpus.index_of(a);
  auto ib = corpus.index_of(b);
  if (ia == ib) fail(ErrorKind::invalid_input, "cannot compare an event with itself");
  if (ib < ia) std::swap(ia, ib);  // corpus order is time order
  EventComparison cmp;
  cmp.explanation = explain_pair(analysis, ia, ib, map.params, config);
  const double theta = map.params.min_edge_coherence;
  cmp.non_connection.margin = theta - cmp.explanation.coherence.combined;
  cmp.non_connection.below_threshold = cmp.explanation.coherence.combined < theta;
  cmp.non_connection.connected = map.find_edge(corpus[ia].id, corpus[ib].id) != nullptr;
  std::vector<TokenAttribution> negative;
  for (const auto& t : cmp.explanation.attributions)
    if (t.phi < 0) negative.push_back(t);
  std::stable_sort(negative.begin(), negative.end(), [](const TokenAttribution& x, const TokenAttribution& y) { return x.phi < y.phi; });
  if (negative.size() > kTopNegative) negative.resize(kTopNegative);
  cmp.non_connection.top_negative = std::move(negative);
  return cmp;
}

}  // namespace narrmap
