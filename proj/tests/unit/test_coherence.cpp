#include "support.hpp"

#include "narrmap/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace narrmap;
using testing::make_doc;

TEST_CASE("combine_coherence worked example") {
  const auto c = combine_coherence(0.2, 0.8, 0.0, CoherenceParams{0.5, 0.0});
  CHECK(c.combined == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.cluster_share == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(c.temporal_factor == 1.0);
}

TEST_CASE("identical and orthogonal cases") {
  const auto same = combine_coherence(1.0, 1.0, 0.0, CoherenceParams{0.3, 0.1});
  CHECK(same.combined == doctest::Approx(1.0));
  CHECK(same.cluster_share == doctest::Approx(0.3));
  const auto none = combine_coherence(0.0, 0.0, 2.0, CoherenceParams{});
  CHECK(none.combined == 0.0);
  CHECK(none.cluster_share == 0.0);
}

TEST_CASE("temporal decay") {
  CHECK(lambda_from_sensitivity(0.0) == 0.0);
  CHECK(lambda_from_sensitivity(1.0) == doctest::Approx(kMaxLambdaPerDay));
  CHECK_THROWS_AS(lambda_from_sensitivity(1.5), Error);
  const CoherenceParams p{0.5, lambda_from_sensitivity(1.0)};
  const auto c = combine_coherence(0.6, 0.4, 5.0, p);
  CHECK(c.temporal_factor == doctest::Approx(std::exp(-1.0)));
  CHECK(c.combined == doctest::Approx(0.5 * std::exp(-1.0)));
  double prev = 2.0;
  for (double days = 0; days < 30; days += 0.5) {
    const double now = combine_coherence(0.6, 0.4, days, p).combined;
    CHECK(now <= prev);
    prev = now;
  }
  CHECK_THROWS_AS(combine_coherence(0.5, 0.5, -1.0, p), Error);
}

TEST_CASE("cluster share above one half iff the weighted cluster term dominates") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double t = u(rng), c = u(rng), w = u(rng);
    const auto s = combine_coherence(t, c, u(rng) * 10, CoherenceParams{w, 0.05});
    CHECK((s.cluster_share > 0.5) == (w * c > (1 - w) * t));
    CHECK(s.combined == doctest::Approx(((1 - w) * t + w * c) * s.temporal_factor));
  }
}

TEST_CASE("coherence over an analyzed corpus") {
  const Corpus corpus({make_doc("a", "2022-01-01T00:00:00Z", "harbor strike cargo"), make_doc("b", "2022-01-01T00:00:00Z", "harbor strike cargo"),
                       make_doc("c", "2022-01-03T00:00:00Z", "drought water farmers"), make_doc("d", "2022-01-04T00:00:00Z", "harbor wages")});
  const auto analysis = AnalyzedCorpus::build(corpus, AnalysisConfig{}, testing::one_hot_model({0, 0, 1, 0}, 2));
  const CoherenceParams p{0.5, 0.0};

  const auto same = coherence(*analysis, 0, 1, p);
  CHECK(same.text_sim == doctest::Approx(1.0));
  CHECK(same.cluster_sim == doctest::Approx(1.0));
  CHECK(same.combined == doctest::Approx(1.0));
  CHECK(same.cluster_share == doctest::Approx(0.5));

  const auto apart = coherence(*analysis, 0, 2, p);
  CHECK(apart.text_sim == 0.0);
  CHECK(apart.cluster_sim == 0.0);
  CHECK(apart.combined == 0.0);

  const auto partial = coherence(*analysis, 1, 3, p);
  const auto& v = analysis->vectors().values;
  CHECK(partial.text_sim == doctest::Approx(v.row(1).dot(v.row(3))));
  CHECK(partial.cluster_share > 0.5);

  CHECK_THROWS_AS(coherence(*analysis, 3, 0, p), Error);
  const CoherenceParams decay{0.5, 0.2};
  CHECK(coherence(*analysis, 0, 3, decay).temporal_factor == doctest::Approx(std::exp(-0.6)));
}
