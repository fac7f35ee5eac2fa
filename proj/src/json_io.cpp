#include "narrmap/json_io.hpp"

#include "narrmap/error.hpp"

namespace narrmap {

Json to_json(const CoherenceScore& c) {
  return {{"text_sim", c.text_sim},
          {"cluster_sim", c.cluster_sim},
          {"temporal_factor", c.temporal_factor},
          {"combined", c.combined},
          {"cluster_share", c.cluster_share}};
}

namespace {

CoherenceScore coherence_from_json(const Json& j) {
  CoherenceScore c;
  c.text_sim = j.at("text_sim").get<double>();
  c.cluster_sim = j.at("cluster_sim").get<double>();
  c.temporal_factor = j.at("temporal_factor").get<double>();
  c.combined = j.at("combined").get<double>();
  c.cluster_share = j.at("cluster_share").get<double>();
  return c;
}

double number(const Json& j, const std::string& key) {
  if (!j.is_number()) fail(ErrorKind::invalid_input, "parameter '" + key + "' must be a number");
  return j.get<double>();
}

std::size_t count(const Json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(ErrorKind::invalid_input, "parameter '" + key + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

Json keywords_json(const std::vector<ClusterKeyword>& kws) {
  Json out = Json::array();
  for (const auto& k : kws) out.push_back({{"term", k.term}, {"score", k.score}});
  return out;
}

Json attribution_json(const std::vector<TokenAttribution>& items) {
  Json out = Json::array();
  for (const auto& a : items) out.push_back({{"token", a.token}, {"phi", a.phi}, {"side", to_string(a.side)}});
  return out;
}

}  // namespace

Json to_json(const ExtractionParams& p) {
  return {{"K", p.map_size},
          {"sigma", p.coverage},
          {"temporal_sensitivity", p.temporal_sensitivity},
          {"lambda_t", lambda_from_sensitivity(p.temporal_sensitivity)},
          {"theta_min", p.min_edge_coherence},
          {"cross_edge_quantile", p.cross_edge_quantile},
          {"cluster_weight", p.cluster_weight},
          {"max_successors", p.max_successors},
          {"major_cluster_fraction", p.major_cluster_fraction}};
}

ExtractionParams params_from_json(const Json& j, ExtractionParams p) {
  if (j.is_null()) return p;
  if (!j.is_object()) fail(ErrorKind::invalid_input, "params must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "K") p.map_size = count(value, key);
    else if (key == "sigma") p.coverage = number(value, key);
    else if (key == "temporal_sensitivity") p.temporal_sensitivity = number(value, key);
    else if (key == "lambda_t") continue;  // derived
    else if (key == "theta_min") p.min_edge_coherence = number(value, key);
    else if (key == "cross_edge_quantile") p.cross_edge_quantile = number(value, key);
    else if (key == "cluster_weight") p.cluster_weight = number(value, key);
    else if (key == "max_successors") p.max_successors = count(value, key);
    else if (key == "major_cluster_fraction") p.major_cluster_fraction = number(value, key);
    else fail(ErrorKind::invalid_input, "unknown parameter '" + key + "'");
  }
  return p;
}

Json to_json(const AnalysisConfig& c) {
  Json j = {{"projection_dim", c.vectorizer.projection_dim},
            {"seed", c.vectorizer.seed},
            {"min_cluster_size", c.clustering.min_cluster_size},
            {"min_samples", c.clustering.min_samples},
            {"softmax_temperature", c.clustering.softmax_temperature}};
  if (c.stopwords_path) j["stopwords_path"] = c.stopwords_path->string();
  return j;
}

AnalysisConfig analysis_config_from_json(const Json& j, AnalysisConfig c) {
  if (j.is_null()) return c;
  if (!j.is_object()) fail(ErrorKind::invalid_input, "analysis config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "projection_dim") c.vectorizer.projection_dim = count(value, key);
    else if (key == "seed") c.vectorizer.seed = value.get<std::uint64_t>();
    else if (key == "min_cluster_size") c.clustering.min_cluster_size = count(value, key);
    else if (key == "min_samples") c.clustering.min_samples = count(value, key);
    else if (key == "softmax_temperature") c.clustering.softmax_temperature = number(value, key);
    else if (key == "stopwords_path") c.stopwords_path = value.get<std::string>();
    else fail(ErrorKind::invalid_input, "unknown analysis setting '" + key + "'");
  }
  return c;
}

Json to_json(const NarrativeMap& map) {
  Json edges = Json::array();
  for (const auto& e : map.edges)
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"kind", e.kind == EdgeKind::storyline ? "storyline" : "support"},
                     {"coherence", to_json(e.coherence)}});
  return {{"schema_version", kSchemaVersion},
          {"nodes", map.nodes},
          {"edges", std::move(edges)},
          {"storylines", map.storylines},
          {"main_storyline", map.main_storyline},
          {"params", to_json(map.params)},
          {"flags", map.flags}};
}

NarrativeMap map_from_json(const Json& j) {
  try {
    if (j.value("schema_version", 0) != kSchemaVersion) fail(ErrorKind::invalid_input, "unsupported map schema_version");
    NarrativeMap map;
    map.nodes = j.at("nodes").get<std::vector<std::string>>();
    for (const auto& e : j.at("edges")) {
      const auto kind = e.at("kind").get<std::string>();
      if (kind != "storyline" && kind != "support") fail(ErrorKind::invalid_input, "unknown edge kind '" + kind + "'");
      map.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                           kind == "storyline" ? EdgeKind::storyline : EdgeKind::support, coherence_from_json(e.at("coherence"))});
    }
    map.storylines = j.at("storylines").get<std::vector<std::vector<std::string>>>();
    map.main_storyline = j.at("main_storyline").get<std::size_t>();
    map.params = params_from_json(j.at("params"));
    map.flags = j.value("flags", std::vector<std::string>{});
    return map;
  } catch (const Json::exception& e) {
    fail(ErrorKind::invalid_input, std::string("malformed map JSON: ") + e.what());
  }
}

Json clusters_to_json(const AnalyzedCorpus& analysis) {
  const auto& model = analysis.clusters();
  const auto& corpus = analysis.corpus();
  Json clusters = Json::array();
  for (int c : model.cluster_ids) {
    clusters.push_back({{"id", c},
                        {"medoid", corpus[model.medoids[static_cast<std::size_t>(c)]].id},
                        {"size", model.member_count(c)},
                        {"keywords", keywords_json(analysis.top_keywords(c))}});
  }
  Json membership = Json::array();
  for (Eigen::Index i = 0; i < model.membership.rows(); ++i) {
    std::vector<double> row(model.membership.row(i).begin(), model.membership.row(i).end());
    membership.push_back(row);
  }
  std::vector<std::string> ids;
  for (const auto& d : corpus) ids.push_back(d.id);
  return {{"schema_version", kSchemaVersion},
          {"clusters", std::move(clusters)},
          {"membership", std::move(membership)},
          {"documents", ids},
          {"hard_labels", model.hard_label}};
}

Json projection_to_json(const AnalyzedCorpus& analysis, const Eigen::MatrixX2d& xy) {
  Json points = Json::array();
  for (std::size_t i = 0; i < analysis.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    points.push_back({{"id", analysis.corpus()[i].id}, {"x", xy(r, 0)}, {"y", xy(r, 1)}, {"cluster", analysis.clusters().hard_label[i]}});
  }
  return {{"schema_version", kSchemaVersion}, {"points", std::move(points)}};
}

Json to_json(const ConnectionExplanation& ex) {
  Json topics = Json::array();
  for (const auto& t : ex.topics) topics.push_back({{"id", t.doc_id}, {"cluster", t.cluster}, {"keywords", keywords_json(t.keywords)}});
  Json entities = Json::array();
  for (const auto& e : ex.shared_entities) entities.push_back({{"a", e.a.surface}, {"b", e.b.surface}, {"overlap", e.overlap}});
  return {{"schema_version", kSchemaVersion},
          {"from", ex.from},
          {"to", ex.to},
          {"label", {{"primary", to_string(ex.label.primary)}, {"entity", ex.label.entity}}},
          {"topics", std::move(topics)},
          {"entities", std::move(entities)},
          {"attributions", attribution_json(ex.attributions)},
          {"coherence", to_json(ex.coherence)}};
}

Json to_json(const EventComparison& cmp) {
  Json j = to_json(cmp.explanation);
  j["non_connection"] = {{"below_threshold", cmp.non_connection.below_threshold},
                         {"margin", cmp.non_connection.margin},
                         {"connected", cmp.non_connection.connected},
                         {"top_negative", attribution_json(cmp.non_connection.top_negative)}};
  return j;
}

Json to_json(const StructureExplanation& s) {
  Json names = Json::array();
  for (const auto& n : s.names) {
    names.push_back({{"index", n.storyline},
                     {"name", n.name},
                     {"fallback", n.fallback},
                     {"score",
                      {{"c_entity", n.breakdown.c_entity},
                       {"c_abstract", n.breakdown.c_abstract},
                       {"c_coverage", n.breakdown.c_coverage},
                       {"o_overlap", n.breakdown.o_overlap},
                       {"total", n.breakdown.score}}}});
  }
  Json important = Json::array();
  for (const auto& e : s.important) {
    important.push_back({{"id", e.doc_id},
                         {"content_score", e.content_score},
                         {"structure_score", e.structure_score},
                         {"top_content", e.top_content},
                         {"top_structure", e.top_structure},
                         {"emphasized", e.emphasized}});
  }
  return {{"schema_version", kSchemaVersion}, {"storylines", std::move(names)}, {"important", std::move(important)}};
}

}  // namespace narrmap
