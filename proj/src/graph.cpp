#include "narrmap/graph.hpp"

#include "narrmap/error.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

namespace narrmap {

std::optional<std::vector<std::size_t>> topological_order(std::size_t n, std::span<const Arc> arcs) {
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& [u, v] : arcs) {
    out[u].push_back(v);
    ++indegree[v];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto u = ready.top();
    ready.pop();
    order.push_back(u);
    for (auto v : out[u])
      if (--indegree[v] == 0) ready.push(v);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

Reachability::Reachability(std::size_t n, std::span<const Arc> arcs) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {
  auto order = topological_order(n, arcs);
  if (!order) fail(ErrorKind::internal, "graph contains a cycle");
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& [u, v] : arcs) out[u].push_back(v);
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    const auto u = *it;
    auto* row = &bits_[u * words_];
    for (auto v : out[u]) {
      row[v / 64] |= std::uint64_t{1} << (v % 64);
      const auto* child = &bits_[v * words_];
      for (std::size_t w = 0; w < words_; ++w) row[w] |= child[w];
    }
  }
}

std::vector<Arc> transitive_reduction(std::size_t n, std::span<const Arc> arcs) {
  const std::set<Arc> unique(arcs.begin(), arcs.end());
  const std::vector<Arc> deduped(unique.begin(), unique.end());
  const Reachability reach(n, deduped);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [u, v] : deduped) succ[u].push_back(v);
  std::vector<Arc> kept;
  for (const auto& [u, v] : deduped) {
    bool redundant = false;
    for (auto w : succ[u]) {
      if (w != v && reach.reaches(w, v)) {
        redundant = true;
        break;
      }
    }
    if (!redundant) kept.emplace_back(u, v);
  }
  return kept;
}

bool implied_by_path(std::size_t n, std::span<const Arc> arcs, Arc arc) {
  std::vector<Arc> others;
  for (const auto& a : arcs)
    if (a != arc) others.push_back(a);
  const Reachability reach(n, others);
  return reach.reaches(arc.first, arc.second);
}

std::vector<std::optional<std::size_t>> max_weight_matching(const Eigen::MatrixXd& weights) {
  // Hungarian algorithm (shortest augmenting paths with potentials) on the
  // square cost matrix max_w - w; inadmissible entries weigh 0 and are
  // dropped from the assignment afterwards.
  const auto rows = static_cast<std::size_t>(weights.rows());
  const auto cols = static_cast<std::size_t>(weights.cols());
  const std::size_t n = std::max(rows, cols);
  std::vector<std::optional<std::size_t>> result(rows);
  if (n == 0) return result;
  double max_w = 0;
  for (Eigen::Index i = 0; i < weights.rows(); ++i)
    for (Eigen::Index j = 0; j < weights.cols(); ++j) max_w = std::max(max_w, weights(i, j));
  auto weight = [&](std::size_t i, std::size_t j) {
    if (i >= rows || j >= cols) return 0.0;
    const double w = weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return w > 0 ? w : 0.0;
  };
  auto cost = [&](std::size_t i, std::size_t j) { return max_w - weight(i, j); };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    if (i < rows && j - 1 < cols && weight(i, j - 1) > 0) result[i] = j - 1;
  }
  return result;
}

}  // namespace narrmap
