#include "narrmap/clustering.hpp"

#include "narrmap/error.hpp"
#include "narrmap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace narrmap {

std::size_t ClusterModel::member_count(int cluster) const {
  return static_cast<std::size_t>(std::count(hard_label.begin(), hard_label.end(), cluster));
}

namespace {

struct Merge {
  std::size_t left;
  std::size_t right;
  double distance;
  std::size_t size;
};

struct MstEdge {
  std::size_t a;
  std::size_t b;
  double weight;
};

std::vector<double> core_distances(const Eigen::MatrixXd& d, std::size_t min_samples) {
  const auto n = static_cast<std::size_t>(d.rows());
  const std::size_t k = std::min(std::max<std::size_t>(min_samples, 1), n);
  std::vector<double> core(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = i == j ? 0.0 : d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    core[i] = row[k - 1];
  }
  return core;
}

// Prim's algorithm on the dense mutual-reachability graph; ties go to the lower index.
std::vector<MstEdge> minimum_spanning_tree(const Eigen::MatrixXd& d, const std::vector<double>& core) {
  const auto n = core.size();
  auto mreach = [&](std::size_t i, std::size_t j) {
    return std::max({core[i], core[j], d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  };
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  std::vector<bool> in_tree(n, false);
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double w = mreach(current, j);
      if (w < key[j]) {
        key[j] = w;
        from[j] = current;
      }
    }
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_tree[j] && (best == n || key[j] < key[best])) best = j;
    }
    in_tree[best] = true;
    edges.push_back({std::min(from[best], best), std::max(from[best], best), key[best]});
    current = best;
  }
  std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return edges;
}

// Single-linkage dendrogram; merge k creates node n + k.
std::vector<Merge> single_linkage(const std::vector<MstEdge>& mst, std::size_t n) {
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::size_t> size(2 * n, 1);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::vector<Merge> merges;
  std::size_t next = n;
  for (const auto& e : mst) {
    const auto ra = find(e.a);
    const auto rb = find(e.b);
    merges.push_back({ra, rb, e.weight, size[ra] + size[rb]});
    parent[ra] = next;
    parent[rb] = next;
    size[next] = size[ra] + size[rb];
    ++next;
  }
  return merges;
}

}  // namespace

DensityHierarchy hdbscan(const Eigen::MatrixXd& distances, std::size_t min_cluster_size, std::size_t min_samples) {
  const auto n = static_cast<std::size_t>(distances.rows());
  if (distances.cols() != distances.rows()) fail(ErrorKind::invalid_input, "distance matrix must be square");
  if (min_cluster_size < 2) fail(ErrorKind::invalid_input, "min_cluster_size must be at least 2");
  if (min_samples < 1) fail(ErrorKind::invalid_input, "min_samples must be at least 1");
  if (n < min_cluster_size)
    fail(ErrorKind::invalid_input, "need at least min_cluster_size (" + std::to_string(min_cluster_size) + ") documents, got " +
                                       std::to_string(n));

  DensityHierarchy out;
  const auto core = core_distances(distances, min_samples);
  const auto merges = single_linkage(minimum_spanning_tree(distances, core), n);

  auto node_size = [&](std::size_t node) { return node < n ? std::size_t{1} : merges[node - n].size; };
  auto leaves = [&](std::size_t node) {
    std::vector<std::size_t> pts;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      if (x < n) {
        pts.push_back(x);
      } else {
        stack.push_back(merges[x - n].right);
        stack.push_back(merges[x - n].left);
      }
    }
    return pts;
  };

  // Condense the dendrogram top-down.
  const std::size_t root = 2 * n - 2;
  std::size_t next_label = n + 1;
  std::map<std::size_t, std::size_t> relabel{{root, n}};
  std::deque<std::size_t> queue{root};
  while (!queue.empty() && n > 1) {
    const auto node = queue.front();
    queue.pop_front();
    const auto& m = merges[node - n];
    const auto label = relabel.at(node);
    const double lambda = m.distance > 0 ? 1.0 / m.distance : std::numeric_limits<double>::infinity();
    const auto ls = node_size(m.left);
    const auto rs = node_size(m.right);
    const bool left_big = ls >= min_cluster_size;
    const bool right_big = rs >= min_cluster_size;
    auto spill = [&](std::size_t sub) {
      for (auto p : leaves(sub)) out.condensed.push_back({label, p, lambda, 1});
    };
    auto carry = [&](std::size_t sub) {
      if (sub < n) {
        out.condensed.push_back({label, sub, lambda, 1});
      } else {
        relabel[sub] = label;
        queue.push_back(sub);
      }
    };
    if (m.distance <= 0) {
      spill(m.left);
      spill(m.right);
    } else if (left_big && right_big) {
      for (auto sub : {m.left, m.right}) {
        relabel[sub] = next_label;
        out.condensed.push_back({label, next_label, lambda, node_size(sub)});
        ++next_label;
        queue.push_back(sub);
      }
    } else if (!left_big && !right_big) {
      spill(m.left);
      spill(m.right);
    } else if (!left_big) {
      spill(m.left);
      carry(m.right);
    } else {
      spill(m.right);
      carry(m.left);
    }
  }
  if (n == 1) out.condensed.push_back({n, 0, std::numeric_limits<double>::infinity(), 1});

  // Stability of every condensed cluster. Infinite lambdas (zero distances)
  // are clamped to the largest finite lambda so stabilities stay finite.
  double max_finite = 0;
  for (const auto& e : out.condensed)
    if (std::isfinite(e.lambda)) max_finite = std::max(max_finite, e.lambda);
  const double lambda_cap = max_finite > 0 ? max_finite : 1.0;
  auto clamp_lambda = [&](double l) { return std::isfinite(l) ? l : lambda_cap; };

  const std::size_t cluster_count = next_label - n;
  std::vector<double> birth(cluster_count, 0.0);
  std::vector<std::size_t> cluster_parent(cluster_count, 0);
  std::vector<std::vector<std::size_t>> children(cluster_count);
  for (const auto& e : out.condensed) {
    if (e.child >= n) {
      birth[e.child - n] = clamp_lambda(e.lambda);
      cluster_parent[e.child - n] = e.parent - n;
      children[e.parent - n].push_back(e.child - n);
    }
  }
  std::vector<double> stability(cluster_count, 0.0);
  for (const auto& e : out.condensed) {
    const auto c = e.parent - n;
    stability[c] += (clamp_lambda(e.lambda) - birth[c]) * static_cast<double>(e.child_size);
  }

  // Excess-of-mass selection; children always carry larger labels than parents.
  std::vector<bool> selected(cluster_count, true);
  selected[0] = false;
  for (std::size_t c = cluster_count; c-- > 1;) {
    double subtree = 0;
    for (auto ch : children[c]) subtree += stability[ch];
    if (!children[c].empty() && subtree > stability[c]) {
      selected[c] = false;
      stability[c] = subtree;
    } else {
      std::vector<std::size_t> stack(children[c].begin(), children[c].end());
      while (!stack.empty()) {
        const auto x = stack.back();
        stack.pop_back();
        selected[x] = false;
        stack.insert(stack.end(), children[x].begin(), children[x].end());
      }
    }
  }
  if (children[0].empty()) selected[0] = true;

  // Point labels: walk from the cluster a point fell out of up to the first selected ancestor.
  std::vector<std::size_t> point_parent(n, 0);
  for (const auto& e : out.condensed)
    if (e.child < n) point_parent[e.child] = e.parent - n;
  std::vector<long> raw(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t c = point_parent[p];
    while (true) {
      if (selected[c]) {
        raw[p] = static_cast<long>(c);
        break;
      }
      if (c == 0) break;
      c = cluster_parent[c];
    }
  }
  std::map<long, int> dense;
  out.labels.assign(n, kNoise);
  for (std::size_t p = 0; p < n; ++p) {
    if (raw[p] < 0) continue;
    auto it = dense.try_emplace(raw[p], static_cast<int>(dense.size())).first;
    out.labels[p] = it->second;
  }
  return out;
}

ClusterModel soft_memberships(const Eigen::MatrixXd& vectors, std::vector<int> hard_labels, double temperature) {
  if (!(temperature > 0)) fail(ErrorKind::invalid_input, "softmax_temperature must be positive");
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (hard_labels.size() != n) fail(ErrorKind::invalid_input, "label count differs from document count");
  int max_label = kNoise;
  for (int l : hard_labels) max_label = std::max(max_label, l);
  const auto clusters = static_cast<std::size_t>(max_label + 1);
  if (clusters == 0) fail(ErrorKind::invalid_input, "at least one non-noise cluster is required");

  Eigen::MatrixXd normalized = vectors;
  normalize_rows(normalized);
  const Eigen::MatrixXd cos_dist = (Eigen::MatrixXd::Ones(vectors.rows(), vectors.rows()) - normalized * normalized.transpose());

  ClusterModel model;
  model.hard_label = std::move(hard_labels);
  model.cluster_ids.resize(clusters);
  std::iota(model.cluster_ids.begin(), model.cluster_ids.end(), 0);
  model.medoids.resize(clusters);
  for (std::size_t c = 0; c < clusters; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (model.hard_label[i] == static_cast<int>(c)) members.push_back(i);
    if (members.empty()) fail(ErrorKind::invalid_input, "cluster " + std::to_string(c) + " has no members");
    double best = std::numeric_limits<double>::infinity();
    for (auto i : members) {
      double total = 0;
      for (auto j : members) total += cos_dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (total < best) {
        best = total;
        model.medoids[c] = i;
      }
    }
  }
  model.membership.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(clusters));
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd logits(static_cast<Eigen::Index>(clusters));
    for (std::size_t c = 0; c < clusters; ++c)
      logits(static_cast<Eigen::Index>(c)) =
          -cos_dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(model.medoids[c])) / temperature;
    model.membership.row(static_cast<Eigen::Index>(i)) = softmax(logits).transpose();
  }
  return model;
}

ClusterModel cluster_documents(const Eigen::MatrixXd& vectors, const ClusterParams& params) {
  if (static_cast<std::size_t>(vectors.rows()) < params.min_cluster_size)
    fail(ErrorKind::invalid_input, "need at least min_cluster_size (" + std::to_string(params.min_cluster_size) +
                                       ") documents, got " + std::to_string(vectors.rows()));
  auto hierarchy = hdbscan(pairwise_distances(vectors), params.min_cluster_size, params.min_samples);
  return soft_memberships(vectors, std::move(hierarchy.labels), params.softmax_temperature);
}

std::vector<ClusterKeyword> cluster_keywords(std::span<const std::vector<std::string>> doc_terms, const ClusterModel& model,
                                             int cluster) {
  if (!model.is_cluster(cluster)) fail(ErrorKind::not_found, "unknown or noise cluster " + std::to_string(cluster));
  if (doc_terms.size() != model.document_count()) fail(ErrorKind::invalid_input, "term lists differ from cluster model size");

  const auto n = doc_terms.size();
  std::map<std::string, std::size_t> df;
  std::map<std::string, std::set<int>> clusters_with;
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::set<std::string> distinct(doc_terms[i].begin(), doc_terms[i].end());
    for (const auto& t : distinct) {
      ++df[t];
      if (model.hard_label[i] != kNoise) clusters_with[t].insert(model.hard_label[i]);
    }
    if (model.hard_label[i] == cluster) {
      for (const auto& t : doc_terms[i]) ++counts[t];
      total += doc_terms[i].size();
    }
  }
  const auto cluster_total = static_cast<double>(model.cluster_count());
  std::vector<ClusterKeyword> out;
  out.reserve(counts.size());
  for (const auto& [term, count] : counts) {
    ClusterKeyword k;
    k.term = term;
    k.tf = static_cast<double>(count) / static_cast<double>(total);
    k.idf_global = std::log(static_cast<double>(n) / static_cast<double>(df.at(term)));
    k.idf_local = std::log(cluster_total / static_cast<double>(clusters_with.at(term).size()));
    k.score = k.tf * k.idf_global * k.idf_local;
    out.push_back(std::move(k));
  }
  std::sort(out.begin(), out.end(), [](const ClusterKeyword& a, const ClusterKeyword& b) {
    return a.score != b.score ? a.score > b.score : a.term < b.term;
  });
  return out;
}

std::vector<std::vector<std::string>> keyword_terms(const Corpus& corpus, const Lexicon& lexicon) {
  std::vector<std::vector<std::string>> terms;
  terms.reserve(corpus.size());
  for (const auto& d : corpus) terms.push_back(token_texts(tokenize(d.headline + "\n" + d.body, lexicon), true));
  return terms;
}

std::vector<ClusterKeyword> cluster_keywords(const Corpus& corpus, const ClusterModel& model, int cluster, const Lexicon& lexicon) {
  const auto terms = keyword_terms(corpus, lexicon);
  return cluster_keywords(terms, model, cluster);
}

std::vector<ClusterKeyword> select_top_k(std::span<const ClusterKeyword> keywords, std::size_t cluster_size) {
  if (keywords.empty()) return {};
  double best = 0;
  for (const auto& k : keywords) best = std::max(best, k.score);
  const double cut = kTopKRelativeThreshold * best;
  const auto above = static_cast<std::size_t>(
      std::count_if(keywords.begin(), keywords.end(), [&](const ClusterKeyword& k) { return k.score >= cut; }));
  const auto cap = kTopKFloor + static_cast<std::size_t>(std::floor(std::log(static_cast<double>(std::max<std::size_t>(cluster_size, 1)))));
  const auto k = std::min(std::clamp(above, kTopKFloor, cap), keywords.size());
  return {keywords.begin(), keywords.begin() + static_cast<std::ptrdiff_t>(k)};
}

Eigen::MatrixX2d project_2d(const Eigen::MatrixXd& vectors, std::span<const std::optional<Eigen::Vector2d>> provided_xy) {
  if (vectors.rows() < 2) fail(ErrorKind::invalid_input, "projection needs at least 2 documents");
  const auto given = static_cast<std::size_t>(std::count_if(provided_xy.begin(), provided_xy.end(), [](const auto& p) { return p.has_value(); }));
  if (given != 0 && (given != provided_xy.size() || provided_xy.size() != static_cast<std::size_t>(vectors.rows())))
    fail(ErrorKind::invalid_input, std::to_string(given) + " of " + std::to_string(vectors.rows()) +
                                       " documents carry xy coordinates; provide them for all documents or none");
  if (given != 0) {
    Eigen::MatrixX2d out(vectors.rows(), 2);
    for (std::size_t i = 0; i < provided_xy.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = provided_xy[i]->transpose();
    return out;
  }
  return pca_2d(vectors);
}

Eigen::MatrixX2d project_2d(const Eigen::MatrixXd& vectors, const Corpus& corpus) {
  std::vector<std::optional<Eigen::Vector2d>> xy;
  xy.reserve(corpus.size());
  for (const auto& d : corpus) xy.push_back(d.provided_xy);
  return project_2d(vectors, xy);
}

}  // namespace narrmap
