// narrmap command line: ingest, extract, explain, compare, clusters, structure, serve.
#include "narrmap/error.hpp"
#include "narrmap/json_io.hpp"
#include "narrmap/service.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace narrmap;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNotAnEdge = 2;

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::stringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  return read_file(path);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::invalid_input, "cannot write " + path);
  out << text;
}

void emit(const std::string& path, const Json& j) { emit(path, j.dump(2) + "\n"); }

Corpus parse_corpus(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> warnings;
  auto corpus = load_corpus(in, CorpusFormat::jsonl, *Lexicon::builtin(), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return corpus;
}

std::string normalized(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(corpus, out);
  return out.str();
}

struct AnalysisFlags {
  std::uint64_t seed = 0;
  std::size_t projection_dim = 0;
  std::size_t min_cluster_size = ClusterParams{}.min_cluster_size;
  std::size_t min_samples = ClusterParams{}.min_samples;
  std::string stopwords;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "Seed for every stochastic component");
    app->add_option("--projection-dim", projection_dim, "Random projection dimension (0 = off)");
    app->add_option("--min-cluster-size", min_cluster_size);
    app->add_option("--min-samples", min_samples);
    app->add_option("--stopwords", stopwords, "Replacement stopword list");
  }
  AnalysisConfig config() const {
    AnalysisConfig c;
    c.vectorizer.seed = seed;
    c.vectorizer.projection_dim = projection_dim;
    c.clustering.min_cluster_size = min_cluster_size;
    c.clustering.min_samples = min_samples;
    if (!stopwords.empty()) c.stopwords_path = stopwords;
    return c;
  }
};

// A map file produced by `extract` carries enough to rebuild its analysis.
struct LoadedMap {
  NarrativeMap map;
  std::shared_ptr<const AnalyzedCorpus> analysis;
  std::uint64_t seed = 0;
};

LoadedMap load_map(const std::string& path, const std::string& corpus_override) {
  const auto j = Json::parse(slurp(path));
  LoadedMap out;
  out.map = map_from_json(j);
  out.seed = j.value("seed", std::uint64_t{0});
  std::string corpus_text;
  if (!corpus_override.empty()) {
    corpus_text = slurp(corpus_override);
  } else if (j.contains("corpus_jsonl")) {
    corpus_text = j["corpus_jsonl"].get<std::string>();
  } else if (j.contains("corpus_path")) {
    corpus_text = read_file(j["corpus_path"].get<std::string>());
  } else {
    fail(ErrorKind::invalid_input, "map does not reference a corpus; pass --corpus");
  }
  auto corpus = parse_corpus(corpus_text);
  if (j.contains("corpus_ref") && j["corpus_ref"].get<std::string>() != sha256_hex(normalized(corpus)))
    fail(ErrorKind::conflict, "corpus does not match the one the map was extracted from");
  const auto config = analysis_config_from_json(j.value("analysis", Json::object()));
  out.analysis = AnalyzedCorpus::build(std::move(corpus), config);
  return out;
}

// CLI11 wants "--sigma"; the documented spelling is "-sigma".
std::vector<std::string> normalize_args(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "-sigma" || a == "-temporal") a = "-" + a;
    args.push_back(std::move(a));
  }
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Narrative map extraction and explanation", "narrmap"};
  app.require_subcommand(1);

  std::string ingest_in, ingest_out = "-";
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a JSONL corpus");
  ingest->add_option("jsonl", ingest_in, "Input JSONL ('-' for stdin)")->required();
  ingest->add_option("-o,--output", ingest_out, "Output corpus ('-' for stdout)");

  std::string extract_in, extract_out = "-";
  ExtractionParams params;
  AnalysisFlags extract_flags;
  auto* extract_cmd = app.add_subcommand("extract", "Extract a narrative map");
  extract_cmd->add_option("corpus", extract_in, "Corpus JSONL ('-' for stdin)")->required();
  extract_cmd->add_option("-K,--map-size", params.map_size, "Number of events in the map");
  extract_cmd->add_option("--sigma,--coverage", params.coverage, "Story coverage in [0,1]");
  extract_cmd->add_option("--temporal", params.temporal_sensitivity, "Temporal sensitivity in [0,1]");
  extract_cmd->add_option("--theta-min", params.min_edge_coherence);
  extract_cmd->add_option("--cross-edge-quantile", params.cross_edge_quantile);
  extract_cmd->add_option("--cluster-weight", params.cluster_weight);
  extract_cmd->add_option("-o,--output", extract_out, "Output map JSON ('-' for stdout)");
  extract_flags.add_to(extract_cmd);

  std::string explain_map, explain_from, explain_to, explain_corpus;
  auto* explain = app.add_subcommand("explain", "Explain part of a map");
  explain->require_subcommand(1);
  auto* edge = explain->add_subcommand("edge", "Explain one map edge");
  edge->add_option("map", explain_map)->required();
  edge->add_option("from", explain_from)->required();
  edge->add_option("to", explain_to)->required();
  edge->add_option("--corpus", explain_corpus, "Corpus to use instead of the one recorded in the map");

  std::string compare_map, compare_a, compare_b, compare_corpus;
  auto* compare = app.add_subcommand("compare", "Compare two events");
  compare->add_option("map", compare_map)->required();
  compare->add_option("a", compare_a)->required();
  compare->add_option("b", compare_b)->required();
  compare->add_option("--corpus", compare_corpus);

  std::string clusters_in;
  AnalysisFlags cluster_flags;
  bool with_projection = false;
  auto* clusters = app.add_subcommand("clusters", "Cluster a corpus and print keywords");
  clusters->add_option("corpus", clusters_in)->required();
  clusters->add_flag("--projection", with_projection, "Print the 2D projection instead");
  cluster_flags.add_to(clusters);

  std::string structure_map, structure_corpus;
  std::size_t top_n = 3;
  auto* structure = app.add_subcommand("structure", "Name storylines and rank important events");
  structure->add_option("map", structure_map)->required();
  structure->add_option("--corpus", structure_corpus);
  structure->add_option("-n,--top", top_n, "Important events per criterion");

  ServiceConfig service_config;
  if (const char* dir = std::getenv("DATA_DIR")) service_config.data_dir = dir;
  if (const char* seed = std::getenv("DEFAULT_SEED")) service_config.default_seed = std::strtoull(seed, nullptr, 10);
  int port = 8080;
  if (const char* p = std::getenv("PORT")) port = std::atoi(p);
  std::string host = "127.0.0.1";
  std::string data_dir = service_config.data_dir.string();
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--data-dir", data_dir);
  serve_cmd->add_option("--seed", service_config.default_seed);

  try {
    app.parse(normalize_args(argc, argv));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest) {
      emit(ingest_out, normalized(parse_corpus(slurp(ingest_in))));
    } else if (*extract_cmd) {
      const auto text = normalized(parse_corpus(slurp(extract_in)));
      const auto config = extract_flags.config();
      auto analysis = AnalyzedCorpus::build(parse_corpus(text), config);
      auto j = to_json(extract(*analysis, params));
      j["seed"] = extract_flags.seed;
      j["analysis"] = to_json(config);
      j["corpus_ref"] = sha256_hex(text);
      if (extract_in == "-")
        j["corpus_jsonl"] = text;
      else
        j["corpus_path"] = std::filesystem::absolute(extract_in).lexically_normal().string();
      emit(extract_out, j);
    } else if (*explain) {
      const auto loaded = load_map(explain_map, explain_corpus);
      if (!loaded.map.find_edge(explain_from, explain_to)) {
        std::cerr << "error: " << explain_from << " -> " << explain_to
                  << " is not an edge of the map; use `compare <map> " << explain_from << " " << explain_to
                  << "` to explain an arbitrary pair\n";
        return kExitNotAnEdge;
      }
      ShapleyConfig cfg;
      cfg.seed = loaded.seed;
      emit("-", to_json(explain_connection(*loaded.analysis, loaded.map, explain_from, explain_to, cfg)));
    } else if (*compare) {
      const auto loaded = load_map(compare_map, compare_corpus);
      ShapleyConfig cfg;
      cfg.seed = loaded.seed;
      emit("-", to_json(compare_events(*loaded.analysis, loaded.map, compare_a, compare_b, cfg)));
    } else if (*clusters) {
      auto analysis = AnalyzedCorpus::build(parse_corpus(slurp(clusters_in)), cluster_flags.config());
      if (with_projection)
        emit("-", projection_to_json(*analysis, project_2d(analysis->vectors().values, analysis->corpus())));
      else
        emit("-", clusters_to_json(*analysis));
    } else if (*structure) {
      const auto loaded = load_map(structure_map, structure_corpus);
      emit("-", to_json(explain_structure(loaded.map, *loaded.analysis, {}, top_n)));
    } else if (*serve_cmd) {
      service_config.data_dir = data_dir;
      return serve(service_config, host, port);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
