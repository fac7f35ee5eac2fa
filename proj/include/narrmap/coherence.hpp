#pragma once

#include <cstddef>

namespace narrmap {

class AnalyzedCorpus;

struct CoherenceParams {
  double cluster_weight = 0.5;   // w_c in [0, 1]
  double lambda_per_day = 0.0;   // temporal decay rate, >= 0
};

/// Temporal sensitivity in [0, 1] maps linearly onto a decay of [0, 0.2] per day.
inline constexpr double kMaxLambdaPerDay = 0.2;
double lambda_from_sensitivity(double sensitivity);

struct CoherenceScore {
  double text_sim = 0;
  double cluster_sim = 0;
  double temporal_factor = 1;
  double combined = 0;
  double cluster_share = 0;  // fraction of the pre-temporal score due to cluster similarity
};

/// combined = ((1 - w) * text + w * cluster) * exp(-lambda * days);
/// cluster_share = w * cluster / ((1 - w) * text + w * cluster), 0 if that is 0.
CoherenceScore combine_coherence(double text_sim, double cluster_sim, double gap_days, const CoherenceParams& params);

/// Coherence of documents `a` then `b` (indices into the analyzed corpus).
/// Throws if b is earlier than a.
CoherenceScore coherence(const AnalyzedCorpus& analysis, std::size_t a, std::size_t b, const CoherenceParams& params);

}  // namespace narrmap
