#pragma once

#include "narrmap/analysis.hpp"
#include "narrmap/coherence.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace narrmap {

struct ExtractionParams {
  std::size_t map_size = 20;             // K
  double coverage = 0.5;                 // sigma in [0, 1]
  double temporal_sensitivity = 0.0;     // [0, 1], mapped onto a per-day decay
  double min_edge_coherence = 0.05;      // theta_min
  double cross_edge_quantile = 0.85;     // support-edge threshold quantile
  double cluster_weight = 0.5;           // w_c
  std::size_t max_successors = 30;       // fan-out cap of the candidate graph
  double major_cluster_fraction = 0.05;  // hard-label share that makes a cluster "major"

  CoherenceParams coherence() const { return {cluster_weight, lambda_from_sensitivity(temporal_sensitivity)}; }
  /// Throws invalid_input for out-of-range values and infeasible when K exceeds the corpus.
  void validate(std::size_t corpus_size) const;
};

struct CandidateEdge {
  std::size_t from;
  std::size_t to;
  CoherenceScore coherence;
};

/// Forward-in-time edges over all documents whose coherence clears theta_min.
struct CandidateGraph {
  std::size_t node_count = 0;
  std::vector<CandidateEdge> edges;  // sorted by (from, to)

  const CandidateEdge* find(std::size_t from, std::size_t to) const;
};

using CoherenceFn = std::function<CoherenceScore(std::size_t, std::size_t)>;

/// Edge (i, j) iff times[i] < times[j] and combined coherence >= theta_min,
/// keeping at most `max_successors` best successors per node (ties: lower index).
CandidateGraph build_candidate_graph(std::span<const Timestamp> times, const CoherenceFn& score, double theta_min,
                                     std::size_t max_successors, std::stop_token stop = {});
CandidateGraph build_candidate_graph(const AnalyzedCorpus& analysis, const ExtractionParams& params, std::stop_token stop = {});

struct NodeSelection {
  std::vector<std::size_t> nodes;  // ascending document index
  double relaxation = 1.0;         // factor applied to the coverage requirements (1 = as requested)
  double objective = 0.0;          // sum of representativeness over selected nodes
};

/// rep(i) = cos(v_i, corpus centroid) + max_c membership(i, c).
Eigen::VectorXd representativeness(const Eigen::MatrixXd& vectors, const ClusterModel& clusters);

/// Mass sum_{i in V} membership(i, c) per major cluster, and its requirement sigma * K * share(c).
struct CoverageRequirement {
  int cluster;
  double share;     // hard-label share of the corpus
  double required;  // sigma * K * share
};
std::vector<CoverageRequirement> coverage_requirements(const ClusterModel& clusters, const ExtractionParams& params);

/// Greedy selection of the K most representative documents followed by
/// deficit-repairing and objective-improving swaps under the coverage
/// constraint. When no swap sequence reaches feasibility, all requirements
/// are scaled by the largest factor that can be met and `relaxation` reports it.
NodeSelection select_nodes(const Eigen::MatrixXd& vectors, const ClusterModel& clusters, const ExtractionParams& params);
NodeSelection select_nodes(const AnalyzedCorpus& analysis, const ExtractionParams& params);

/// Edge weight used by the path cover: ln(c + 1e-9) - ln(1e-9).
double path_cover_weight(double coherence);

/// Maximum-weight path cover of `nodes` through the induced candidate edges,
/// via a bipartite matching of out-copies to in-copies. Storylines are sorted
/// by their first node.
std::vector<std::vector<std::size_t>> link_storylines(std::span<const std::size_t> nodes, const CandidateGraph& graph);

enum class EdgeKind { storyline, support };

struct MapEdge {
  std::string from;
  std::string to;
  EdgeKind kind;
  CoherenceScore coherence;
};

struct NarrativeMap {
  std::vector<std::string> nodes;                 // corpus order
  std::vector<MapEdge> edges;                     // sorted by (from, to) in corpus order
  std::vector<std::vector<std::string>> storylines;
  std::size_t main_storyline = 0;
  ExtractionParams params;
  std::vector<std::string> flags;

  const MapEdge* find_edge(std::string_view from, std::string_view to) const;
};

/// Linear-interpolated quantile (the usual "type 7" definition) of `values`.
double quantile(std::vector<double> values, double q);

/// Picks the main storyline, adds high-coherence support edges that do not
/// shadow storyline edges, and drops every edge implied by a longer path.
NarrativeMap finalize_map(const std::vector<std::vector<std::size_t>>& storylines, const CandidateGraph& graph,
                          const AnalyzedCorpus& analysis, const ExtractionParams& params);

/// Problems with the map's structural invariants; empty when valid.
std::vector<std::string> validate_map(const NarrativeMap& map, const Corpus& corpus);

struct ExtractionControl {
  std::function<void(double)> progress;  // monotone in [0, 1]
  std::stop_token stop;
};

NarrativeMap extract(const AnalyzedCorpus& analysis, const ExtractionParams& params, const ExtractionControl& control = {});

}  // namespace narrmap
