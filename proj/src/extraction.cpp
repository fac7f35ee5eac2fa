#include "narrmap/extraction.hpp"

#include "narrmap/error.hpp"
#include "narrmap/graph.hpp"
#include "narrmap/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace narrmap {

void ExtractionParams::validate(std::size_t corpus_size) const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (map_size < 2) fail(ErrorKind::invalid_input, "map size K must be at least 2");
  if (!in_unit(coverage)) fail(ErrorKind::invalid_input, "coverage sigma must be in [0, 1]");
  if (!in_unit(temporal_sensitivity)) fail(ErrorKind::invalid_input, "temporal sensitivity must be in [0, 1]");
  if (!in_unit(min_edge_coherence)) fail(ErrorKind::invalid_input, "min_edge_coherence must be in [0, 1]");
  if (!(cross_edge_quantile > 0.0 && cross_edge_quantile < 1.0)) fail(ErrorKind::invalid_input, "cross_edge_quantile must be in (0, 1)");
  if (!in_unit(cluster_weight)) fail(ErrorKind::invalid_input, "cluster_weight must be in [0, 1]");
  if (max_successors < 1) fail(ErrorKind::invalid_input, "max_successors must be positive");
  if (!in_unit(major_cluster_fraction)) fail(ErrorKind::invalid_input, "major_cluster_fraction must be in [0, 1]");
  if (map_size > corpus_size)
    fail(ErrorKind::infeasible, "map size K = " + std::to_string(map_size) + " exceeds corpus size " + std::to_string(corpus_size));
}

const CandidateEdge* CandidateGraph::find(std::size_t from, std::size_t to) const {
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{from, to}, [](const CandidateEdge& e, const std::pair<std::size_t, std::size_t>& key) {
    return std::pair{e.from, e.to} < key;
  });
  if (it == edges.end() || it->from != from || it->to != to) return nullptr;
  return &*it;
}

CandidateGraph build_candidate_graph(std::span<const Timestamp> times, const CoherenceFn& score, double theta_min,
                                     std::size_t max_successors, std::stop_token stop) {
  CandidateGraph g;
  g.node_count = times.size();
  std::vector<CandidateEdge> out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (stop.stop_requested()) fail(ErrorKind::cancelled, "extraction cancelled");
    out.clear();
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (!(times[i] < times[j])) continue;
      const auto c = score(i, j);
      if (c.combined >= theta_min) out.push_back({i, j, c});
    }
    if (out.size() > max_successors) {
      std::stable_sort(out.begin(), out.end(), [](const CandidateEdge& a, const CandidateEdge& b) {
        return a.coherence.combined != b.coherence.combined ? a.coherence.combined > b.coherence.combined : a.to < b.to;
      });
      out.resize(max_successors);
      std::sort(out.begin(), out.end(), [](const CandidateEdge& a, const CandidateEdge& b) { return a.to < b.to; });
    }
    g.edges.insert(g.edges.end(), out.begin(), out.end());
  }
  return g;
}

CandidateGraph build_candidate_graph(const AnalyzedCorpus& analysis, const ExtractionParams& params, std::stop_token stop) {
  std::vector<Timestamp> times;
  for (const auto& d : analysis.corpus()) times.push_back(d.timestamp);
  const auto cp = params.coherence();
  return build_candidate_graph(
      times, [&](std::size_t a, std::size_t b) { return coherence(analysis, a, b, cp); }, params.min_edge_coherence,
      params.max_successors, stop);
}

Eigen::VectorXd representativeness(const Eigen::MatrixXd& vectors, const ClusterModel& clusters) {
  const Eigen::RowVectorXd centroid = vectors.colwise().mean();
  Eigen::VectorXd rep(vectors.rows());
  for (Eigen::Index i = 0; i < vectors.rows(); ++i)
    rep(i) = cosine(vectors.row(i), centroid) + clusters.membership.row(i).maxCoeff();
  return rep;
}

std::vector<CoverageRequirement> coverage_requirements(const ClusterModel& clusters, const ExtractionParams& params) {
  std::vector<CoverageRequirement> req;
  const auto n = static_cast<double>(clusters.document_count());
  for (int c : clusters.cluster_ids) {
    const double share = static_cast<double>(clusters.member_count(c)) / n;
    if (share >= params.major_cluster_fraction)
      req.push_back({c, share, params.coverage * static_cast<double>(params.map_size) * share});
  }
  return req;
}

namespace {

constexpr double kFeasibilityTol = 1e-12;

class SelectionSearch {
 public:
  SelectionSearch(const Eigen::VectorXd& rep, const Eigen::MatrixXd& membership, std::vector<CoverageRequirement> req, std::size_t k)
      : rep_(rep), membership_(membership), req_(std::move(req)), k_(k) {
    order_.resize(static_cast<std::size_t>(rep.size()));
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return rep_(static_cast<Eigen::Index>(a)) > rep_(static_cast<Eigen::Index>(b)); });
  }

  std::vector<std::size_t> top_k() const { return {order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(k_)}; }

  Eigen::VectorXd coverage(const std::vector<std::size_t>& sel) const {
    Eigen::VectorXd cov = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(req_.size()));
    for (auto i : sel)
      for (std::size_t r = 0; r < req_.size(); ++r) cov(static_cast<Eigen::Index>(r)) += m(i, r);
    return cov;
  }

  double deficit(const Eigen::VectorXd& cov, double factor) const {
    double d = 0;
    for (std::size_t r = 0; r < req_.size(); ++r) d += std::max(0.0, factor * req_[r].required - cov(static_cast<Eigen::Index>(r)));
    return d;
  }

  // Swaps that most reduce the total deficit, until none is left or no swap helps.
  // When no single swap helps, pair swaps are tried on small instances.
  bool repair(std::vector<std::size_t>& sel, double factor) const {
    auto cov = coverage(sel);
    double current = deficit(cov, factor);
    std::vector<bool> in(static_cast<std::size_t>(rep_.size()), false);
    for (auto i : sel) in[i] = true;
    for (std::size_t guard = 0; current > kFeasibilityTol && guard < 4 * static_cast<std::size_t>(rep_.size()) + 16; ++guard) {
      double best_def = current;
      double best_rep = -std::numeric_limits<double>::infinity();
      std::size_t best_out = 0, best_in = 0;
      bool found = false;
      for (std::size_t a = 0; a < sel.size(); ++a) {
        for (std::size_t b = 0; b < in.size(); ++b) {
          if (in[b]) continue;
          Eigen::VectorXd next = cov;
          for (std::size_t r = 0; r < req_.size(); ++r) next(static_cast<Eigen::Index>(r)) += m(b, r) - m(sel[a], r);
          const double d = deficit(next, factor);
          const double gain = rep_(static_cast<Eigen::Index>(b)) - rep_(static_cast<Eigen::Index>(sel[a]));
          if (d < best_def - 1e-15 || (found && d == best_def && gain > best_rep)) {
            best_def = d;
            best_rep = gain;
            best_out = a;
            best_in = b;
            found = true;
          }
        }
      }
      if (!found) {
        if (!pair_swap(sel, in, cov, factor, current)) return false;
      } else {
        in[sel[best_out]] = false;
        in[best_in] = true;
        sel[best_out] = best_in;
      }
      cov = coverage(sel);
      current = deficit(cov, factor);
    }
    return current <= kFeasibilityTol;
  }

  // Adds documents by largest deficit reduction (ties: higher rep), then fills up by rep.
  std::vector<std::size_t> constructive(double factor) const {
    std::vector<std::size_t> sel;
    std::vector<bool> in(static_cast<std::size_t>(rep_.size()), false);
    Eigen::VectorXd cov = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(req_.size()));
    while (sel.size() < k_ && deficit(cov, factor) > kFeasibilityTol) {
      const double current = deficit(cov, factor);
      std::size_t best = order_.front();
      double best_def = std::numeric_limits<double>::infinity();
      for (auto b : order_) {
        if (in[b]) continue;
        Eigen::VectorXd next = cov;
        for (std::size_t r = 0; r < req_.size(); ++r) next(static_cast<Eigen::Index>(r)) += m(b, r);
        const double d = deficit(next, factor);
        if (d < best_def - 1e-15) best_def = d, best = b;
      }
      if (best_def >= current) break;
      in[best] = true;
      sel.push_back(best);
      for (std::size_t r = 0; r < req_.size(); ++r) cov(static_cast<Eigen::Index>(r)) += m(best, r);
    }
    for (auto b : order_) {
      if (sel.size() == k_) break;
      if (!in[b]) in[b] = true, sel.push_back(b);
    }
    return sel;
  }

  // Best-improvement swaps on the objective that keep the selection feasible.
  void improve(std::vector<std::size_t>& sel, double factor) const {
    std::vector<bool> in(static_cast<std::size_t>(rep_.size()), false);
    for (auto i : sel) in[i] = true;
    auto cov = coverage(sel);
    for (std::size_t guard = 0; guard < 16 * static_cast<std::size_t>(rep_.size()) + 16; ++guard) {
      double best_gain = 1e-12;
      std::size_t best_out = 0, best_in = 0;
      bool found = false;
      for (std::size_t a = 0; a < sel.size(); ++a) {
        for (std::size_t b = 0; b < in.size(); ++b) {
          if (in[b]) continue;
          const double gain = rep_(static_cast<Eigen::Index>(b)) - rep_(static_cast<Eigen::Index>(sel[a]));
          if (gain <= best_gain) continue;
          Eigen::VectorXd next = cov;
          for (std::size_t r = 0; r < req_.size(); ++r) next(static_cast<Eigen::Index>(r)) += m(b, r) - m(sel[a], r);
          if (deficit(next, factor) > kFeasibilityTol) continue;
          best_gain = gain;
          best_out = a;
          best_in = b;
          found = true;
        }
      }
      if (!found) return;
      in[sel[best_out]] = false;
      in[best_in] = true;
      sel[best_out] = best_in;
      cov = coverage(sel);
    }
  }

  double objective(const std::vector<std::size_t>& sel) const {
    double s = 0;
    for (auto i : sel) s += rep_(static_cast<Eigen::Index>(i));
    return s;
  }

 private:
  static constexpr std::size_t kPairSwapBudget = 200000;

  bool pair_swap(std::vector<std::size_t>& sel, std::vector<bool>& in, const Eigen::VectorXd& cov, double factor, double current) const {
    std::vector<std::size_t> out_pool;
    for (std::size_t b = 0; b < in.size(); ++b)
      if (!in[b]) out_pool.push_back(b);
    const std::size_t k = sel.size(), o = out_pool.size();
    if (k < 2 || o < 2 || (k * (k - 1) / 2) * (o * (o - 1) / 2) > kPairSwapBudget) return false;
    double best_def = current - 1e-15;
    std::array<std::size_t, 4> best{};
    bool found = false;
    for (std::size_t a1 = 0; a1 < k; ++a1)
      for (std::size_t a2 = a1 + 1; a2 < k; ++a2)
        for (std::size_t b1 = 0; b1 < o; ++b1)
          for (std::size_t b2 = b1 + 1; b2 < o; ++b2) {
            Eigen::VectorXd next = cov;
            for (std::size_t r = 0; r < req_.size(); ++r)
              next(static_cast<Eigen::Index>(r)) += m(out_pool[b1], r) + m(out_pool[b2], r) - m(sel[a1], r) - m(sel[a2], r);
            const double d = deficit(next, factor);
            if (d < best_def) best_def = d, best = {a1, a2, b1, b2}, found = true;
          }
    if (!found) return false;
    in[sel[best[0]]] = in[sel[best[1]]] = false;
    sel[best[0]] = out_pool[best[2]];
    sel[best[1]] = out_pool[best[3]];
    in[sel[best[0]]] = in[sel[best[1]]] = true;
    return true;
  }

  double m(std::size_t doc, std::size_t r) const {
    return membership_(static_cast<Eigen::Index>(doc), static_cast<Eigen::Index>(req_[r].cluster));
  }

  const Eigen::VectorXd& rep_;
  const Eigen::MatrixXd& membership_;
  std::vector<CoverageRequirement> req_;
  std::size_t k_;
  std::vector<std::size_t> order_;
};

}  // namespace

NodeSelection select_nodes(const Eigen::MatrixXd& vectors, const ClusterModel& clusters, const ExtractionParams& params) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (params.map_size > n)
    fail(ErrorKind::infeasible, "map size K = " + std::to_string(params.map_size) + " exceeds corpus size " + std::to_string(n));
  if (clusters.document_count() != n) fail(ErrorKind::invalid_input, "cluster model does not match vectors");
  const Eigen::VectorXd rep = representativeness(vectors, clusters);
  SelectionSearch search(rep, clusters.membership, coverage_requirements(clusters, params), params.map_size);

  // Top-K first, then a deficit-driven start if swaps alone cannot reach feasibility.
  auto attempt = [&](double factor, std::vector<std::size_t>& sel) {
    sel = search.top_k();
    if (search.repair(sel, factor)) return true;
    sel = search.constructive(factor);
    return search.repair(sel, factor);
  };
  NodeSelection result;
  std::vector<std::size_t> sel;
  if (!attempt(1.0, sel)) {
    // Largest uniformly scaled requirement the search can still meet.
    double lo = 0.0, hi = 1.0;
    std::vector<std::size_t> trial;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (attempt(mid, trial)) lo = mid;
      else hi = mid;
    }
    result.relaxation = lo;
    attempt(lo, sel);
  }
  search.improve(sel, result.relaxation);
  std::sort(sel.begin(), sel.end());
  result.objective = search.objective(sel);
  result.nodes = std::move(sel);
  return result;
}

NodeSelection select_nodes(const AnalyzedCorpus& analysis, const ExtractionParams& params) {
  return select_nodes(analysis.vectors().values, analysis.clusters(), params);
}

double path_cover_weight(double coherence) { return std::log(coherence + 1e-9) - std::log(1e-9); }

std::vector<std::vector<std::size_t>> link_storylines(std::span<const std::size_t> nodes, const CandidateGraph& graph) {
  const std::size_t k = nodes.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      if (const auto* e = graph.find(nodes[a], nodes[b])) w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = path_cover_weight(e->coherence.combined);
  const auto match = max_weight_matching(w);
  std::vector<bool> has_pred(k, false);
  for (std::size_t a = 0; a < k; ++a)
    if (match[a]) has_pred[*match[a]] = true;
  std::vector<std::vector<std::size_t>> storylines;
  for (std::size_t a = 0; a < k; ++a) {
    if (has_pred[a]) continue;
    std::vector<std::size_t> path;
    for (std::optional<std::size_t> cur = a; cur; cur = match[*cur]) path.push_back(nodes[*cur]);
    storylines.push_back(std::move(path));
  }
  std::sort(storylines.begin(), storylines.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return storylines;
}

const MapEdge* NarrativeMap::find_edge(std::string_view from, std::string_view to) const {
  for (const auto& e : edges)
    if (e.from == from && e.to == to) return &e;
  return nullptr;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

NarrativeMap finalize_map(const std::vector<std::vector<std::size_t>>& storylines, const CandidateGraph& graph,
                          const AnalyzedCorpus& analysis, const ExtractionParams& params) {
  const auto& corpus = analysis.corpus();
  std::vector<std::size_t> nodes;
  for (const auto& s : storylines) nodes.insert(nodes.end(), s.begin(), s.end());
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) fail(ErrorKind::internal, "storylines overlap");
  const std::size_t k = nodes.size();
  auto local = [&](std::size_t doc) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), doc) - nodes.begin());
  };

  std::vector<Arc> storyline_arcs;
  std::set<Arc> storyline_set;
  for (const auto& s : storylines) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (!graph.find(s[i - 1], s[i])) fail(ErrorKind::internal, "storyline edge missing from the candidate graph");
      storyline_arcs.emplace_back(local(s[i - 1]), local(s[i]));
      storyline_set.insert(storyline_arcs.back());
    }
  }

  std::vector<const CandidateEdge*> induced;
  for (const auto& e : graph.edges)
    if (std::binary_search(nodes.begin(), nodes.end(), e.from) && std::binary_search(nodes.begin(), nodes.end(), e.to))
      induced.push_back(&e);
  std::vector<double> induced_coherence;
  for (const auto* e : induced) induced_coherence.push_back(e->coherence.combined);
  const double threshold = quantile(induced_coherence, params.cross_edge_quantile);

  std::vector<const CandidateEdge*> support_candidates;
  for (const auto* e : induced) {
    const Arc arc{local(e->from), local(e->to)};
    if (!storyline_set.contains(arc) && e->coherence.combined >= threshold) support_candidates.push_back(e);
  }
  std::stable_sort(support_candidates.begin(), support_candidates.end(), [](const CandidateEdge* a, const CandidateEdge* b) {
    return a->coherence.combined > b->coherence.combined;
  });

  // Insert support edges by decreasing coherence; skip those already implied
  // and those that would make a storyline edge redundant.
  std::vector<Arc> arcs = storyline_arcs;
  for (const auto* e : support_candidates) {
    const Arc arc{local(e->from), local(e->to)};
    const Reachability reach(k, arcs);
    if (reach.reaches(arc.first, arc.second)) continue;
    bool shadows = false;
    for (const auto& [a, b] : storyline_arcs) {
      const bool head = a == arc.first || reach.reaches(a, arc.first);
      const bool tail = b == arc.second || reach.reaches(arc.second, b);
      if (head && tail) {
        shadows = true;
        break;
      }
    }
    if (!shadows) arcs.push_back(arc);
  }
  const auto reduced = transitive_reduction(k, arcs);
  for (const auto& a : storyline_arcs)
    if (!std::binary_search(reduced.begin(), reduced.end(), a)) fail(ErrorKind::internal, "storyline edge removed by reduction");

  NarrativeMap map;
  map.params = params;
  for (auto d : nodes) map.nodes.push_back(corpus[d].id);
  for (const auto& [u, v] : reduced) {
    const auto* e = graph.find(nodes[u], nodes[v]);
    map.edges.push_back({corpus[nodes[u]].id, corpus[nodes[v]].id,
                         storyline_set.contains({u, v}) ? EdgeKind::storyline : EdgeKind::support, e->coherence});
  }

  // Main storyline: most nodes, then highest summed coherence, then earliest start.
  std::size_t best = 0;
  auto total = [&](const std::vector<std::size_t>& s) {
    double t = 0;
    for (std::size_t i = 1; i < s.size(); ++i) t += graph.find(s[i - 1], s[i])->coherence.combined;
    return t;
  };
  for (std::size_t i = 1; i < storylines.size(); ++i) {
    const auto& a = storylines[i];
    const auto& b = storylines[best];
    if (a.size() != b.size()) {
      if (a.size() > b.size()) best = i;
      continue;
    }
    const double ta = total(a), tb = total(b);
    if (ta != tb) {
      if (ta > tb) best = i;
      continue;
    }
    if (corpus[a.front()].timestamp < corpus[b.front()].timestamp) best = i;
  }
  map.main_storyline = best;
  for (const auto& s : storylines) {
    std::vector<std::string> ids;
    for (auto d : s) ids.push_back(corpus[d].id);
    map.storylines.push_back(std::move(ids));
  }
  if (auto problems = validate_map(map, corpus); !problems.empty()) fail(ErrorKind::internal, "invalid narrative map: " + problems.front());
  return map;
}

std::vector<std::string> validate_map(const NarrativeMap& map, const Corpus& corpus) {
  std::vector<std::string> problems;
  auto idx = [&](const std::string& id) -> std::optional<std::size_t> { return corpus.find(id); };
  std::vector<std::size_t> nodes;
  for (const auto& id : map.nodes) {
    auto i = idx(id);
    if (!i) {
      problems.push_back("unknown node " + id);
      return problems;
    }
    nodes.push_back(*i);
  }
  if (nodes.size() != map.params.map_size) problems.push_back("node count differs from K");
  std::vector<std::size_t> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) problems.push_back("duplicate nodes");
  auto local = [&](const std::string& id) -> std::optional<std::size_t> {
    auto i = idx(id);
    if (!i) return std::nullopt;
    auto it = std::lower_bound(sorted.begin(), sorted.end(), *i);
    if (it == sorted.end() || *it != *i) return std::nullopt;
    return static_cast<std::size_t>(it - sorted.begin());
  };

  std::vector<Arc> arcs;
  std::set<Arc> storyline_arcs;
  for (const auto& e : map.edges) {
    auto u = local(e.from), v = local(e.to);
    if (!u || !v) {
      problems.push_back("edge " + e.from + "->" + e.to + " leaves the node set");
      continue;
    }
    if (!(corpus[sorted[*u]].timestamp < corpus[sorted[*v]].timestamp)) problems.push_back("edge " + e.from + "->" + e.to + " is not forward in time");
    arcs.emplace_back(*u, *v);
    if (e.kind == EdgeKind::storyline) storyline_arcs.insert({*u, *v});
  }
  if (!problems.empty()) return problems;
  if (!topological_order(sorted.size(), arcs)) {
    problems.push_back("graph has a cycle");
    return problems;
  }

  std::vector<int> seen(sorted.size(), 0);
  std::set<Arc> path_arcs;
  for (const auto& s : map.storylines) {
    if (s.empty()) problems.push_back("empty storyline");
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto u = local(s[i]);
      if (!u) {
        problems.push_back("storyline node " + s[i] + " is not a map node");
        continue;
      }
      ++seen[*u];
      if (i > 0) {
        auto p = local(s[i - 1]);
        if (p) path_arcs.insert({*p, *u});
      }
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1) problems.push_back("node " + corpus[sorted[i]].id + " is covered " + std::to_string(seen[i]) + " times by storylines");
  if (path_arcs != storyline_arcs) problems.push_back("storyline edges do not match the storyline paths");
  if (map.main_storyline >= map.storylines.size()) problems.push_back("main storyline index out of range");

  const auto reduced = transitive_reduction(sorted.size(), arcs);
  if (reduced.size() != std::set<Arc>(arcs.begin(), arcs.end()).size()) problems.push_back("some edge is implied by a longer path");
  return problems;
}

NarrativeMap extract(const AnalyzedCorpus& analysis, const ExtractionParams& params, const ExtractionControl& control) {
  params.validate(analysis.size());
  double reported = 0.0;
  auto progress = [&](double p) {
    reported = std::max(reported, p);
    if (control.progress) control.progress(reported);
  };
  auto check = [&] {
    if (control.stop.stop_requested()) fail(ErrorKind::cancelled, "extraction cancelled");
  };
  progress(0.0);
  const auto graph = build_candidate_graph(analysis, params, control.stop);
  progress(0.5);
  check();
  const auto selection = select_nodes(analysis, params);
  progress(0.75);
  check();
  const auto storylines = link_storylines(selection.nodes, graph);
  progress(0.9);
  check();
  auto map = finalize_map(storylines, graph, analysis, params);
  if (selection.relaxation < 1.0) {
    std::ostringstream flag;
    flag.precision(6);
    flag << "coverage_relaxed:" << selection.relaxation;
    map.flags.push_back(flag.str());
  }
  progress(1.0);
  return map;
}

}  // namespace narrmap
