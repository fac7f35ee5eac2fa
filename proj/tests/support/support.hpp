#pragma once

#include "narrmap/graph.hpp"
#include "narrmap/json_io.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace narrmap::testing {

std::filesystem::path source_path(std::string_view relative);
std::string slurp(const std::filesystem::path& path);

Document make_doc(std::string id, std::string_view timestamp, std::string headline, std::string body = {});

/// The bundled 160-document news fixture.
Corpus fixture_corpus();
const std::filesystem::path& fixture_path();

/// Hard labels with one-hot memberships and medoid = first member.
ClusterModel one_hot_model(const std::vector<int>& labels, std::size_t clusters);

/// Random corpus over a few topic vocabularies, with at least two distinct timestamps.
Corpus random_corpus(std::mt19937_64& rng, std::size_t n);

// Graph oracles.
using Matrix = std::vector<std::vector<bool>>;
Matrix closure(std::size_t n, const std::vector<Arc>& arcs);
/// Minimal equivalent subgraph by brute force: drop (u, v) when some w lies strictly between u and v.
std::vector<Arc> brute_force_reduction(std::size_t n, const std::vector<Arc>& arcs);
/// Random DAG on 0..n-1 with arcs only from lower to higher index.
std::vector<Arc> random_dag(std::size_t n, double density, std::mt19937_64& rng);

using WeightedArc = std::tuple<std::size_t, std::size_t, double>;
/// Best total weight over every set of arcs with in/out degree <= 1 (n small).
double brute_force_path_cover(const std::vector<WeightedArc>& arcs);

/// Exact Shapley values straight from the definition: all n! orderings, vector sums recomputed per coalition.
std::vector<double> shapley_by_orderings(const Eigen::MatrixXd& players, const Eigen::VectorXd& target);

/// Indices of the top n by score (ties: earlier time, then id) via a full sort.
std::vector<std::size_t> top_n_full_sort(const std::vector<double>& scores, const std::vector<Timestamp>& times,
                                         const std::vector<std::string>& ids, std::size_t n);

/// Problems found validating `value` against `#/definitions/<definition>` of schemas/api.schema.json.
std::vector<std::string> schema_errors(const Json& value, const std::string& definition);

}  // namespace narrmap::testing
