#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace narrmap {

using Arc = std::pair<std::size_t, std::size_t>;

/// Topological order of a directed graph on nodes 0..n-1 (smallest index
/// first among ready nodes). Empty optional if the graph has a cycle.
std::optional<std::vector<std::size_t>> topological_order(std::size_t n, std::span<const Arc> arcs);

/// Strict descendant sets of a DAG as bitsets.
class Reachability {
 public:
  /// Throws internal error if `arcs` contain a cycle.
  Reachability(std::size_t n, std::span<const Arc> arcs);

  /// True if there is a path of length >= 1 from u to v.
  bool reaches(std::size_t u, std::size_t v) const {
    return (bits_[u * words_ + v / 64] >> (v % 64)) & 1u;
  }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

/// Minimal subgraph of a DAG with the same reachability: an arc (u, v) is
/// dropped when v is reachable from another successor of u. Duplicate arcs
/// collapse; output is sorted.
std::vector<Arc> transitive_reduction(std::size_t n, std::span<const Arc> arcs);

/// True if (u, v) is implied by some path of length >= 2 in `arcs`.
bool implied_by_path(std::size_t n, std::span<const Arc> arcs, Arc arc);

/// Maximum-weight bipartite matching; rows and columns are the two sides,
/// entries <= 0 are not admissible. Returns the matched column per row.
std::vector<std::optional<std::size_t>> max_weight_matching(const Eigen::MatrixXd& weights);

}  // namespace narrmap
