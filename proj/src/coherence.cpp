#include "narrmap/coherence.hpp"

#include "narrmap/analysis.hpp"
#include "narrmap/error.hpp"
#include "narrmap/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace narrmap {

double lambda_from_sensitivity(double sensitivity) {
  if (!(sensitivity >= 0.0 && sensitivity <= 1.0)) fail(ErrorKind::invalid_input, "temporal sensitivity must be in [0, 1]");
  return kMaxLambdaPerDay * sensitivity;
}

CoherenceScore combine_coherence(double text_sim, double cluster_sim, double gap_days, const CoherenceParams& params) {
  if (!(params.cluster_weight >= 0.0 && params.cluster_weight <= 1.0)) fail(ErrorKind::invalid_input, "cluster weight must be in [0, 1]");
  if (!(params.lambda_per_day >= 0.0)) fail(ErrorKind::invalid_input, "temporal decay must be non-negative");
  if (gap_days < 0) fail(ErrorKind::invalid_input, "negative time gap");
  CoherenceScore s;
  s.text_sim = std::clamp(text_sim, 0.0, 1.0);
  s.cluster_sim = std::clamp(cluster_sim, 0.0, 1.0);
  s.temporal_factor = std::exp(-params.lambda_per_day * gap_days);
  const double text_part = (1.0 - params.cluster_weight) * s.text_sim;
  const double cluster_part = params.cluster_weight * s.cluster_sim;
  const double base = text_part + cluster_part;
  s.combined = base * s.temporal_factor;
  s.cluster_share = base > 0 ? cluster_part / base : 0.0;
  return s;
}

CoherenceScore coherence(const AnalyzedCorpus& analysis, std::size_t a, std::size_t b, const CoherenceParams& params) {
  const auto& corpus = analysis.corpus();
  if (a >= corpus.size() || b >= corpus.size()) fail(ErrorKind::not_found, "unknown document index");
  const auto gap = corpus[b].timestamp - corpus[a].timestamp;
  if (gap.count() < 0) fail(ErrorKind::invalid_input, "negative time gap between '" + corpus[a].id + "' and '" + corpus[b].id + "'");
  const auto& vec = analysis.vectors();
  const auto& mem = analysis.clusters().membership;
  const double text_sim = std::max(0.0, cosine(vec.row(a), vec.row(b)));
  const double cluster_sim =
      std::max(0.0, cosine(mem.row(static_cast<Eigen::Index>(a)), mem.row(static_cast<Eigen::Index>(b))));
  return combine_coherence(text_sim, cluster_sim, static_cast<double>(gap.count()) / 86400.0, params);
}

}  // namespace narrmap
