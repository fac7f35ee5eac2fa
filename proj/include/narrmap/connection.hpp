#pragma once

#include "narrmap/analysis.hpp"
#include "narrmap/coherence.hpp"
#include "narrmap/extraction.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace narrmap {

enum class ConnectionType { topical, similarity };
std::string_view to_string(ConnectionType t);

struct ConnectionLabel {
  ConnectionType primary = ConnectionType::similarity;
  bool entity = false;
};

struct EntityOverlap {
  EntitySpan a;
  EntitySpan b;
  double overlap = 0;
};

/// |A ∩ B| / |A ∪ B| over token sets; 0 when both are empty.
double token_jaccard(std::span<const std::string> a, std::span<const std::string> b);

/// All cross pairs, by descending overlap then lexicographic (a, b) surfaces.
std::vector<EntityOverlap> entity_overlaps(std::span<const EntitySpan> a, std::span<const EntitySpan> b);

inline constexpr double kEntityOverlapThreshold = 0.5;

/// Topical iff the cluster share of coherence is strictly above one half;
/// the entity flag is set when any entity pair overlaps by at least 0.5.
ConnectionLabel label_connection(const CoherenceScore& coherence, std::span<const EntityOverlap> overlaps);
ConnectionType primary_label(double cluster_share);

struct ShapleyConfig {
  std::size_t permutations = 200;
  std::uint64_t seed = 0;
  std::size_t exact_max_tokens = 12;
};

enum class Side { source, target };
std::string_view to_string(Side s);

struct TokenAttribution {
  std::string token;
  double phi = 0;
  Side side = Side::source;
};

/// Shapley attributions of the source document's distinct non-stopword
/// explanation-text tokens to max(0, cos(tfidf(S), target_vec)), using the
/// corpus TF-IDF weights. Sorted by |phi| descending.
std::vector<TokenAttribution> keyword_attributions(const AnalyzedCorpus& analysis, std::size_t source,
                                                   const Eigen::VectorXd& target_vec, const ShapleyConfig& config,
                                                   Side side = Side::source);

struct EventTopic {
  std::string doc_id;
  int cluster = kNoise;
  std::vector<ClusterKeyword> keywords;  // top-k of the cluster; empty for noise
};

struct ConnectionExplanation {
  std::string from;
  std::string to;
  ConnectionLabel label;
  std::array<EventTopic, 2> topics;
  std::vector<EntityOverlap> shared_entities;  // overlap >= 0.5
  std::vector<TokenAttribution> attributions;  // source side first, then target side
  CoherenceScore coherence;
};

/// Explanation of the pair (from, to) as if it were an edge; `from` must not be later than `to`.
ConnectionExplanation explain_pair(const AnalyzedCorpus& analysis, std::size_t from, std::size_t to, const ExtractionParams& params,
                                   const ShapleyConfig& config);

/// Throws not_found when (from, to) is not an edge of `map`.
ConnectionExplanation explain_connection(const AnalyzedCorpus& analysis, const NarrativeMap& map, std::string_view from,
                                         std::string_view to, const ShapleyConfig& config);

struct NonConnection {
  bool below_threshold = false;
  double margin = 0;  // theta_min - combined
  bool connected = false;  // the pair is an edge of the map
  std::vector<TokenAttribution> top_negative;
};

struct EventComparison {
  ConnectionExplanation explanation;
  NonConnection non_connection;
};

inline constexpr std::size_t kTopNegative = 5;

/// Explains why two events are (not) connected; arguments are reordered by time.
EventComparison compare_events(const AnalyzedCorpus& analysis, const NarrativeMap& map, std::string_view a, std::string_view b,
                               const ShapleyConfig& config);

}  // namespace narrmap
