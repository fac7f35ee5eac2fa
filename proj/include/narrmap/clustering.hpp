#pragma once

#include "narrmap/corpus.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace narrmap {

inline constexpr int kNoise = -1;

struct ClusterParams {
  std::size_t min_cluster_size = 5;
  std::size_t min_samples = 3;
  double softmax_temperature = 0.2;
};

/// Hard density clusters plus soft per-document memberships.
struct ClusterModel {
  std::vector<int> cluster_ids;        // 0..C-1
  Eigen::MatrixXd membership;          // documents x clusters, rows sum to 1
  std::vector<int> hard_label;         // cluster id or kNoise
  std::vector<std::size_t> medoids;    // document index per cluster

  std::size_t cluster_count() const { return cluster_ids.size(); }
  std::size_t document_count() const { return hard_label.size(); }
  std::size_t member_count(int cluster) const;
  bool is_cluster(int id) const { return id >= 0 && static_cast<std::size_t>(id) < cluster_ids.size(); }
};

/// One node of the condensed cluster tree: `child` is a point index (< n)
/// or a cluster label (>= n); lambda = 1 / distance at which it left `parent`.
struct CondensedEntry {
  std::size_t parent;
  std::size_t child;
  double lambda;
  std::size_t child_size;
};

struct DensityHierarchy {
  std::vector<CondensedEntry> condensed;
  std::vector<int> labels;  // per point, relabelled 0..C-1 in order of first member; kNoise otherwise
};

/// HDBSCAN over a precomputed symmetric distance matrix: core distances
/// (k-th nearest neighbour, the point itself counted first), mutual
/// reachability, minimum spanning tree, condensed tree and excess-of-mass
/// selection. Splits at zero distance are not treated as cluster births.
/// If the root never splits, it is selected as the single cluster.
DensityHierarchy hdbscan(const Eigen::MatrixXd& distances, std::size_t min_cluster_size, std::size_t min_samples);

/// Medoid per cluster (minimum summed cosine distance to hard members) and
/// softmax(-cosine_distance / temperature) memberships against those medoids.
ClusterModel soft_memberships(const Eigen::MatrixXd& vectors, std::vector<int> hard_labels, double temperature);

/// Density clustering of document vectors (rows) with Euclidean distance.
ClusterModel cluster_documents(const Eigen::MatrixXd& vectors, const ClusterParams& params);

struct ClusterKeyword {
  std::string term;
  double score = 0;
  double tf = 0;
  double idf_global = 0;
  double idf_local = 0;
};

/// Per-cluster keyword scores S(t, c) = TF(t, c) * IDF_global(t) * IDF_local(t, c), with
/// TF the term's share of all term occurrences in the cluster, IDF_global =
/// ln(N / df) over all documents and IDF_local = ln(|C| / cf) across non-noise
/// clusters. `doc_terms` holds each document's non-stopword tokens.
std::vector<ClusterKeyword> cluster_keywords(std::span<const std::vector<std::string>> doc_terms, const ClusterModel& model,
                                             int cluster);
/// Same, over headline + body of every document.
std::vector<ClusterKeyword> cluster_keywords(const Corpus& corpus, const ClusterModel& model, int cluster, const Lexicon& lexicon);

/// Non-stopword tokens of headline and body.
std::vector<std::vector<std::string>> keyword_terms(const Corpus& corpus, const Lexicon& lexicon);

inline constexpr double kTopKRelativeThreshold = 0.3;
inline constexpr std::size_t kTopKFloor = 3;

/// Keeps the terms scoring at least 30% of the best, but never fewer than 3
/// and never more than 3 + floor(ln(cluster_size)).
std::vector<ClusterKeyword> select_top_k(std::span<const ClusterKeyword> keywords, std::size_t cluster_size);

/// Provided coordinates when every document has them, otherwise PCA to 2D.
Eigen::MatrixX2d project_2d(const Eigen::MatrixXd& vectors, std::span<const std::optional<Eigen::Vector2d>> provided_xy);
Eigen::MatrixX2d project_2d(const Eigen::MatrixXd& vectors, const Corpus& corpus);

}  // namespace narrmap
