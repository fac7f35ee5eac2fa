#pragma once

#include "narrmap/analysis.hpp"
#include "narrmap/connection.hpp"
#include "narrmap/extraction.hpp"
#include "narrmap/structure.hpp"

#include <json.hpp>

namespace narrmap {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const CoherenceScore& c);
Json to_json(const ExtractionParams& p);
/// Reads the keys produced by to_json(ExtractionParams) on top of `defaults`;
/// unknown keys and wrongly typed values are rejected.
ExtractionParams params_from_json(const Json& j, ExtractionParams defaults = {});

Json to_json(const AnalysisConfig& c);
AnalysisConfig analysis_config_from_json(const Json& j, AnalysisConfig defaults = {});

Json to_json(const NarrativeMap& map);
NarrativeMap map_from_json(const Json& j);

/// {clusters: [{id, medoid, size, keywords: [{term, score}]}], membership, documents, hard_labels}
Json clusters_to_json(const AnalyzedCorpus& analysis);
/// {points: [{id, x, y, cluster}]}
Json projection_to_json(const AnalyzedCorpus& analysis, const Eigen::MatrixX2d& xy);

Json to_json(const ConnectionExplanation& ex);
Json to_json(const EventComparison& cmp);
Json to_json(const StructureExplanation& s);

}  // namespace narrmap
