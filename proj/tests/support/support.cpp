#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

namespace narrmap::testing {

std::filesystem::path source_path(std::string_view relative) { return std::filesystem::path(NARRMAP_SOURCE_DIR) / relative; }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Document make_doc(std::string id, std::string_view timestamp, std::string headline, std::string body) {
  Document d;
  d.id = std::move(id);
  d.timestamp = parse_timestamp(timestamp);
  d.headline = std::move(headline);
  d.body = std::move(body);
  return d;
}

const std::filesystem::path& fixture_path() {
  static const auto path = source_path("tests/fixtures/news160.jsonl");
  return path;
}

Corpus fixture_corpus() {
  std::ifstream in(fixture_path());
  return load_corpus(in);
}

ClusterModel one_hot_model(const std::vector<int>& labels, std::size_t clusters) {
  ClusterModel m;
  m.hard_label = labels;
  m.membership = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(clusters));
  m.medoids.assign(clusters, 0);
  std::vector<bool> seen(clusters, false);
  for (std::size_t c = 0; c < clusters; ++c) m.cluster_ids.push_back(static_cast<int>(c));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      m.membership.row(static_cast<Eigen::Index>(i)).setConstant(1.0 / static_cast<double>(clusters));
      continue;
    }
    const auto c = static_cast<std::size_t>(labels[i]);
    m.membership(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = 1.0;
    if (!seen[c]) m.medoids[c] = i;
    seen[c] = true;
  }
  return m;
}

Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::vector<std::string>> topics = {
      {"harbor", "strike", "cargo", "wages", "union", "cranes", "ships"},
      {"drought", "water", "reservoir", "farmers", "rationing", "harvest"},
      {"election", "ballot", "campaign", "debate", "voters", "turnout"},
      {"factory", "robots", "investment", "permit", "engineers", "jobs"},
  };
  static const std::vector<std::string> places = {"Castamar", "Nerith", "Veloria", "Brisk", "Orvik"};
  std::uniform_int_distribution<std::size_t> topic_pick(0, topics.size() - 1);
  std::uniform_int_distribution<int> day(0, 40);
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& vocab = topics[topic_pick(rng)];
    std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
    std::string headline = places[rng() % places.size()];
    for (int k = 0; k < 4; ++k) headline += " " + vocab[word(rng)];
    std::string body;
    for (int k = 0; k < 25; ++k) body += (k ? " " : "") + vocab[word(rng)];
    char ts[32];
    const int d = static_cast<int>(i) < 2 ? static_cast<int>(i) : day(rng);
    std::snprintf(ts, sizeof ts, "2023-04-%02dT%02d:00:00Z", 1 + d % 28, static_cast<int>(d / 28) * 6 + static_cast<int>(i % 6));
    docs.push_back(make_doc("r" + std::to_string(i), ts, headline, body));
  }
  return Corpus(std::move(docs));
}

Matrix closure(std::size_t n, const std::vector<Arc>& arcs) {
  Matrix r(n, std::vector<bool>(n, false));
  for (auto [u, v] : arcs) r[u][v] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

std::vector<Arc> brute_force_reduction(std::size_t n, const std::vector<Arc>& arcs) {
  const auto r = closure(n, arcs);
  std::vector<Arc> out;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      if (!r[u][v]) continue;
      bool between = false;
      for (std::size_t w = 0; w < n && !between; ++w) between = w != u && w != v && r[u][w] && r[w][v];
      if (!between) out.emplace_back(u, v);
    }
  return out;
}

std::vector<Arc> random_dag(std::size_t n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(density);
  std::vector<Arc> arcs;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (coin(rng)) arcs.emplace_back(u, v);
  std::shuffle(arcs.begin(), arcs.end(), rng);
  return arcs;
}

double brute_force_path_cover(const std::vector<WeightedArc>& arcs) {
  double best = 0;
  const std::size_t m = arcs.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<int> out_deg(64, 0), in_deg(64, 0);
    double total = 0;
    bool ok = true;
    for (std::size_t e = 0; e < m && ok; ++e) {
      if (!((mask >> e) & 1)) continue;
      const auto& [u, v, w] = arcs[e];
      ok = ++out_deg[u] <= 1 && ++in_deg[v] <= 1;
      total += w;
    }
    if (ok) best = std::max(best, total);
  }
  return best;
}

std::vector<double> shapley_by_orderings(const Eigen::MatrixXd& players, const Eigen::VectorXd& target) {
  const auto n = static_cast<std::size_t>(players.cols());
  auto v = [&](const std::vector<bool>& in) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(players.rows());
    for (std::size_t p = 0; p < n; ++p)
      if (in[p]) sum += players.col(static_cast<Eigen::Index>(p));
    const double denom = sum.norm() * target.norm();
    return denom > 0 ? std::max(0.0, sum.dot(target) / denom) : 0.0;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(n, 0.0);
  double count = 0;
  do {
    std::vector<bool> in(n, false);
    double prev = 0;
    for (auto p : order) {
      in[p] = true;
      const double cur = v(in);
      phi[p] += cur - prev;
      prev = cur;
    }
    count += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& x : phi) x /= count;
  return phi;
}

std::vector<std::size_t> top_n_full_sort(const std::vector<double>& scores, const std::vector<Timestamp>& times,
                                         const std::vector<std::string>& ids, std::size_t n) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(scores[b], times[a], ids[a]) < std::tie(scores[a], times[b], ids[b]);
  });
  idx.resize(std::min(n, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

const Json& api_schema() {
  static const Json schema = Json::parse(slurp(source_path("schemas/api.schema.json")));
  return schema;
}

const Json& resolve(const Json& schema) {
  if (!schema.contains("$ref")) return schema;
  const auto ref = schema["$ref"].get<std::string>();
  const std::string prefix = "#/definitions/";
  return api_schema().at("definitions").at(ref.substr(prefix.size()));
}

bool has_type(const Json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "integer") return value.is_number_integer() || (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>());
  if (type == "number") return value.is_number();
  return false;
}

void check(const Json& value, const Json& raw_schema, const std::string& where, std::vector<std::string>& errors) {
  const Json& schema = resolve(raw_schema);
  if (schema.contains("type")) {
    std::vector<std::string> types;
    if (schema["type"].is_array())
      types = schema["type"].get<std::vector<std::string>>();
    else
      types.push_back(schema["type"].get<std::string>());
    if (std::none_of(types.begin(), types.end(), [&](const auto& t) { return has_type(value, t); })) {
      errors.push_back(where + ": expected " + schema["type"].dump() + ", got " + value.dump().substr(0, 60));
      return;
    }
  }
  if (schema.contains("enum")) {
    const auto& options = schema["enum"];
    if (std::find(options.begin(), options.end(), value) == options.end()) errors.push_back(where + ": not in enum: " + value.dump());
  }
  if (value.is_number()) {
    const double x = value.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) errors.push_back(where + ": below minimum");
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) errors.push_back(where + ": above maximum");
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>()) errors.push_back(where + ": not above exclusiveMinimum");
  }
  if (value.is_string() && schema.contains("pattern")) {
    if (!std::regex_search(value.get<std::string>(), std::regex(schema["pattern"].get<std::string>())))
      errors.push_back(where + ": does not match pattern");
  }
  if (value.is_array()) {
    if (schema.contains("minItems") && value.size() < schema["minItems"].get<std::size_t>()) errors.push_back(where + ": too few items");
    if (schema.contains("maxItems") && value.size() > schema["maxItems"].get<std::size_t>()) errors.push_back(where + ": too many items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < value.size(); ++i) check(value[i], schema["items"], where + "[" + std::to_string(i) + "]", errors);
  }
  if (value.is_object()) {
    const Json empty = Json::object();
    const Json& props = schema.contains("properties") ? schema["properties"] : empty;
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!value.contains(key.get<std::string>())) errors.push_back(where + ": missing '" + key.get<std::string>() + "'");
    for (const auto& [key, item] : value.items()) {
      if (props.contains(key))
        check(item, props[key], where + "." + key, errors);
      else if (schema.value("additionalProperties", true) == false)
        errors.push_back(where + ": unexpected key '" + key + "'");
    }
  }
}

}  // namespace

std::vector<std::string> schema_errors(const Json& value, const std::string& definition) {
  std::vector<std::string> errors;
  check(value, Json{{"$ref", "#/definitions/" + definition}}, "$", errors);
  return errors;
}

}  // namespace narrmap::testing
