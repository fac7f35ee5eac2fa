#include "support.hpp"

#include "narrmap/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stop_token>

using namespace narrmap;
using testing::make_doc;

namespace {

std::vector<Timestamp> daily(std::size_t n) {
  std::vector<Timestamp> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back(parse_timestamp("2022-01-01") + std::chrono::days(i));
  return t;
}

CoherenceScore score(double c) {
  CoherenceScore s;
  s.text_sim = s.cluster_sim = s.combined = c;
  s.cluster_share = 0.5;
  return s;
}

CandidateGraph graph_of(std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, double>> edges) {
  CandidateGraph g;
  g.node_count = n;
  std::sort(edges.begin(), edges.end());
  for (auto [u, v, c] : edges) g.edges.push_back({u, v, score(c)});
  return g;
}

std::shared_ptr<const AnalyzedCorpus> tiny_analysis(std::size_t n) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i)
    docs.push_back(make_doc("e" + std::to_string(i), format_timestamp(daily(n)[i]), "harbor strike talks " + std::to_string(i)));
  std::vector<int> labels(n, 0);
  return AnalyzedCorpus::build(Corpus(std::move(docs)), AnalysisConfig{}, testing::one_hot_model(labels, 1));
}

double rep_oracle(const Eigen::MatrixXd& v, const Eigen::MatrixXd& membership, Eigen::Index i) {
  const Eigen::VectorXd centroid = v.colwise().mean();
  const double denom = v.row(i).norm() * centroid.norm();
  const double cos = denom > 0 ? v.row(i).dot(centroid) / denom : 0.0;
  return cos + membership.row(i).maxCoeff();
}

double min_coverage_ratio(const NodeSelection& sel, const ClusterModel& model, const ExtractionParams& p) {
  double worst = INFINITY;
  for (const auto& req : coverage_requirements(model, p)) {
    double mass = 0;
    for (auto i : sel.nodes) mass += model.membership(static_cast<Eigen::Index>(i), req.cluster);
    worst = std::min(worst, mass / (static_cast<double>(p.map_size) * req.share));
  }
  return worst;
}

}  // namespace

TEST_CASE("candidate graph thresholds and time order") {
  const auto times = daily(3);
  auto flat = [](double c) { return [c](std::size_t, std::size_t) { return score(c); }; };
  CHECK(build_candidate_graph(times, flat(0.01), 0.05, 30).edges.empty());
  const auto full = build_candidate_graph(times, flat(0.9), 0.05, 30);
  REQUIRE(full.edges.size() == 3);
  CHECK(full.find(0, 1));
  CHECK(full.find(0, 2));
  CHECK(full.find(1, 2));
  CHECK_FALSE(full.find(1, 0));

  std::vector<Timestamp> same(3, parse_timestamp("2022-01-01"));
  CHECK(build_candidate_graph(same, flat(0.9), 0.05, 30).edges.empty());
}

TEST_CASE("candidate graph keeps the 30 best successors") {
  const auto times = daily(41);
  const auto g = build_candidate_graph(times, [](std::size_t i, std::size_t j) { return score(i == 0 ? j / 100.0 : 0.0); }, 0.0, 30);
  std::vector<std::size_t> succ;
  for (const auto& e : g.edges)
    if (e.from == 0) succ.push_back(e.to);
  REQUIRE(succ.size() == 30);
  CHECK(succ.front() == 11);
  CHECK(succ.back() == 40);
}

TEST_CASE("candidate graph honours cancellation") {
  std::stop_source stop;
  stop.request_stop();
  CHECK_THROWS_AS(build_candidate_graph(daily(5), [](std::size_t, std::size_t) { return score(1); }, 0.0, 30, stop.get_token()), Error);
}

TEST_CASE("selection with sigma 0 is the top K by representativeness") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd v(9, 4);
  for (Eigen::Index r = 0; r < 9; ++r)
    for (Eigen::Index c = 0; c < 4; ++c) v(r, c) = u(rng);
  const auto model = testing::one_hot_model({0, 0, 0, 1, 1, 1, 2, 2, 2}, 3);
  ExtractionParams p;
  p.map_size = 4;
  p.coverage = 0.0;
  const auto sel = select_nodes(v, model, p);
  const auto rep = representativeness(v, model);
  std::vector<std::size_t> idx(9);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rep(static_cast<Eigen::Index>(a)) > rep(static_cast<Eigen::Index>(b)); });
  idx.resize(4);
  std::sort(idx.begin(), idx.end());
  CHECK(sel.nodes == idx);
  for (Eigen::Index i = 0; i < 9; ++i) CHECK(rep(i) == doctest::Approx(rep_oracle(v, model.membership, i)).epsilon(1e-12));

  p.map_size = 9;
  CHECK(select_nodes(v, model, p).nodes.size() == 9);
}

TEST_CASE("selection matches exhaustive search over C(6,4)") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int feasible_trials = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd v(6, 3);
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) v(r, c) = u(rng) + (c == r / 3 ? 1.0 : 0.0);
    auto model = testing::one_hot_model({0, 0, 0, 1, 1, 1}, 2);
    if (trial % 2) {
      for (Eigen::Index r = 0; r < 6; ++r) {
        const double keep = 0.5 + 0.5 * u(rng);
        model.membership(r, r / 3) = keep;
        model.membership(r, 1 - r / 3) = 1 - keep;
      }
    }
    ExtractionParams p;
    p.map_size = 4;
    p.coverage = trial % 4 < 2 ? 1.0 : u(rng);

    double best = -INFINITY;
    for (int mask = 0; mask < 64; ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) != 4) continue;
      double m0 = 0, m1 = 0, obj = 0;
      for (Eigen::Index i = 0; i < 6; ++i) {
        if (!((mask >> i) & 1)) continue;
        m0 += model.membership(i, 0);
        m1 += model.membership(i, 1);
        obj += rep_oracle(v, model.membership, i);
      }
      const double need = p.coverage * 4 * 0.5;
      if (m0 >= need - 1e-9 && m1 >= need - 1e-9) best = std::max(best, obj);
    }
    const auto sel = select_nodes(v, model, p);
    REQUIRE(sel.nodes.size() == 4);
    if (best > -INFINITY) {
      ++feasible_trials;
      CHECK(sel.relaxation == 1.0);
      CHECK(min_coverage_ratio(sel, model, p) >= p.coverage - 1e-9);
      CHECK(sel.objective >= 0.9 * best);
      CHECK(sel.objective <= best + 1e-9);
    } else {
      CHECK(sel.relaxation < 1.0);
    }
  }
  CHECK(feasible_trials > 50);
}

TEST_CASE("two equal one-hot clusters with sigma 1 split the map evenly") {
  Eigen::MatrixXd v(6, 2);
  v << 1, 0.1, 1, 0.2, 1, 0.15, 0.1, 1, 0.3, 1, 0.2, 1;
  const auto model = testing::one_hot_model({0, 0, 0, 1, 1, 1}, 2);
  ExtractionParams p;
  p.map_size = 4;
  p.coverage = 1.0;
  const auto sel = select_nodes(v, model, p);
  const auto in0 = std::count_if(sel.nodes.begin(), sel.nodes.end(), [](auto i) { return i < 3; });
  CHECK(in0 == 2);
  CHECK(sel.relaxation == 1.0);
}

TEST_CASE("selected coverage tracks sigma on the fixture") {
  const auto analysis = AnalyzedCorpus::build(testing::fixture_corpus(), AnalysisConfig{});
  for (double sigma = 0.0; sigma <= 1.0; sigma += 0.125) {
    ExtractionParams p;
    p.coverage = sigma;
    const auto sel = select_nodes(*analysis, p);
    CHECK(min_coverage_ratio(sel, analysis->clusters(), p) >= sigma * sel.relaxation - 1e-9);
  }
}

TEST_CASE("path cover: chain, empty and brute force") {
  const std::vector<std::size_t> nodes = {0, 1, 2, 3};
  const auto chain = link_storylines(nodes, graph_of(4, {{0, 1, 0.5}, {1, 2, 0.5}, {2, 3, 0.5}}));
  CHECK(chain == std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}});
  const auto none = link_storylines(nodes, graph_of(4, {}));
  CHECK(none.size() == 4);

  CHECK(path_cover_weight(0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(path_cover_weight(0.5) > path_cover_weight(0.4));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    std::vector<testing::WeightedArc> weighted;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (u(rng) < 0.6) {
          const double c = 0.05 + 0.95 * u(rng);
          edges.emplace_back(i, j, c);
          weighted.emplace_back(i, j, path_cover_weight(c));
        }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto g = graph_of(n, edges);
    const auto paths = link_storylines(all, g);
    double total = 0;
    std::size_t covered = 0;
    for (const auto& path : paths) {
      covered += path.size();
      for (std::size_t k = 1; k < path.size(); ++k) {
        const auto* e = g.find(path[k - 1], path[k]);
        REQUIRE(e);
        total += path_cover_weight(e->coherence.combined);
      }
    }
    CHECK(covered == n);
    CHECK(total == doctest::Approx(testing::brute_force_path_cover(weighted)).epsilon(1e-12));
  }
}

TEST_CASE("finalize drops edges implied by storylines") {
  const auto analysis = tiny_analysis(3);
  ExtractionParams p;
  p.map_size = 3;
  const auto g = graph_of(3, {{0, 1, 0.5}, {1, 2, 0.5}, {0, 2, 0.95}});
  const auto map = finalize_map({{0, 1, 2}}, g, *analysis, p);
  CHECK(map.edges.size() == 2);
  CHECK_FALSE(map.find_edge("e0", "e2"));
  CHECK(validate_map(map, analysis->corpus()).empty());
}

TEST_CASE("finalize adds high-coherence cross edges") {
  const auto analysis = tiny_analysis(4);
  ExtractionParams p;
  p.map_size = 4;
  const auto disjoint = finalize_map({{0, 2}, {1, 3}}, graph_of(4, {{0, 2, 0.5}, {1, 3, 0.5}}), *analysis, p);
  CHECK(disjoint.edges.size() == 2);

  const auto crossed = finalize_map({{0, 2}, {1, 3}}, graph_of(4, {{0, 2, 0.5}, {1, 3, 0.5}, {0, 3, 0.9}}), *analysis, p);
  REQUIRE(crossed.edges.size() == 3);
  const auto* e = crossed.find_edge("e0", "e3");
  REQUIRE(e);
  CHECK(e->kind == EdgeKind::support);
  CHECK(validate_map(crossed, analysis->corpus()).empty());
}

TEST_CASE("main storyline: most nodes, then coherence") {
  const auto analysis = tiny_analysis(5);
  ExtractionParams p;
  p.map_size = 5;
  const auto g = graph_of(5, {{0, 2, 0.3}, {1, 3, 0.6}, {3, 4, 0.2}, {2, 4, 0.1}});
  CHECK(finalize_map({{0, 2}, {1, 3, 4}}, g, *analysis, p).main_storyline == 1);
  CHECK(finalize_map({{0, 2, 4}, {1, 3}}, g, *analysis, p).main_storyline == 0);
  const auto tie = graph_of(4, {{0, 2, 0.3}, {1, 3, 0.6}});
  p.map_size = 4;
  CHECK(finalize_map({{0, 2}, {1, 3}}, tie, *tiny_analysis(4), p).main_storyline == 1);
}

TEST_CASE("quantile is type 7") {
  CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({1, 2, 3, 4, 5}, 0.85) == doctest::Approx(4.4));
  CHECK(quantile({7}, 0.3) == 7);
}

TEST_CASE("validate_map reports broken maps") {
  const auto analysis = tiny_analysis(3);
  NarrativeMap map;
  map.params.map_size = 3;
  map.nodes = {"e0", "e1", "e2"};
  map.storylines = {{"e0", "e1", "e2"}};
  map.edges = {{"e0", "e1", EdgeKind::storyline, score(0.5)}, {"e1", "e2", EdgeKind::storyline, score(0.5)}};
  CHECK(validate_map(map, analysis->corpus()).empty());

  auto implied = map;
  implied.edges.push_back({"e0", "e2", EdgeKind::support, score(0.5)});
  CHECK_FALSE(validate_map(implied, analysis->corpus()).empty());

  auto backwards = map;
  backwards.edges[1] = {"e2", "e1", EdgeKind::storyline, score(0.5)};
  CHECK_FALSE(validate_map(backwards, analysis->corpus()).empty());

  auto uncovered = map;
  uncovered.storylines = {{"e0", "e1"}};
  CHECK_FALSE(validate_map(uncovered, analysis->corpus()).empty());

  auto wrong_k = map;
  wrong_k.params.map_size = 4;
  CHECK_FALSE(validate_map(wrong_k, analysis->corpus()).empty());
}

TEST_CASE("parameter validation") {
  ExtractionParams p;
  CHECK_NOTHROW(p.validate(20));
  try {
    p.validate(19);
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible);
  }
  p.map_size = 1;
  CHECK_THROWS_AS(p.validate(20), Error);
  p = {};
  p.coverage = 1.5;
  CHECK_THROWS_AS(p.validate(20), Error);
  p = {};
  p.cross_edge_quantile = 1.0;
  CHECK_THROWS_AS(p.validate(20), Error);
}

TEST_CASE("minimal map of two documents") {
  const Corpus corpus({make_doc("a", "2022-01-01", "harbor strike cargo"), make_doc("b", "2022-01-02", "harbor strike wages")});
  const auto analysis = AnalyzedCorpus::build(corpus, AnalysisConfig{}, testing::one_hot_model({0, 0}, 1));
  ExtractionParams p;
  p.map_size = 2;
  const auto map = extract(*analysis, p);
  CHECK(map.storylines == std::vector<std::vector<std::string>>{{"a", "b"}});
  REQUIRE(map.edges.size() == 1);
  CHECK(map.edges[0].kind == EdgeKind::storyline);
}

TEST_CASE("fixture extraction is valid, deterministic and reports progress") {
  const auto analysis = AnalyzedCorpus::build(testing::fixture_corpus(), AnalysisConfig{});
  ExtractionParams p;
  p.map_size = 20;
  p.coverage = 0.5;
  std::vector<double> progress;
  ExtractionControl control;
  control.progress = [&](double x) { progress.push_back(x); };
  const auto a = extract(*analysis, p, control);
  const auto b = extract(*analysis, p);
  CHECK(validate_map(a, analysis->corpus()).empty());
  CHECK(a.nodes.size() == 20);
  CHECK(to_json(a).dump() == to_json(b).dump());
  REQUIRE_FALSE(progress.empty());
  CHECK(std::is_sorted(progress.begin(), progress.end()));
  CHECK(progress.back() == 1.0);

  // Every map edge is a candidate edge.
  const auto g = build_candidate_graph(*analysis, p);
  for (const auto& e : a.edges) CHECK(g.find(analysis->corpus().index_of(e.from), analysis->corpus().index_of(e.to)));
}

TEST_CASE("extraction can be cancelled") {
  const auto analysis = AnalyzedCorpus::build(testing::fixture_corpus(), AnalysisConfig{});
  std::stop_source stop;
  ExtractionControl control;
  control.stop = stop.get_token();
  stop.request_stop();
  try {
    extract(*analysis, ExtractionParams{}, control);
    FAIL("expected cancellation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cancelled);
  }
}

TEST_CASE("randomized corpora always yield valid maps") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 12 + static_cast<std::size_t>(trial);
    const auto analysis = AnalyzedCorpus::build(testing::random_corpus(rng, n), AnalysisConfig{});
    ExtractionParams p;
    p.map_size = 2 + static_cast<std::size_t>(trial) % 10;
    p.coverage = (trial % 5) / 4.0;
    p.temporal_sensitivity = (trial % 3) / 2.0;
    const auto map = extract(*analysis, p);
    const auto problems = validate_map(map, analysis->corpus());
    CHECK(problems.empty());
  }
}
