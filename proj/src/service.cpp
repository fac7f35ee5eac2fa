#include "narrmap/service.hpp"

#include "narrmap/clustering.hpp"
#include "narrmap/connection.hpp"
#include "narrmap/error.hpp"
#include "narrmap/structure.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <condition_variable>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace narrmap {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    fail(ErrorKind::internal, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  static std::atomic<std::uint64_t> counter{0};
  const fs::path tmp = path.string() + ".tmp" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::internal, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::internal, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::not_found, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
    case JobState::cancelled: return "cancelled";
  }
  return "failed";
}

struct Service::Job {
  std::string id;
  std::string session_id;
  std::string corpus_ref;
  ExtractionParams params;
  AnalysisConfig analysis;

  std::mutex mutex;
  std::condition_variable changed;
  JobState state = JobState::queued;
  double progress = 0;
  std::optional<std::string> error;
  std::jthread thread;

  JobStatus status() {
    std::lock_guard lock(mutex);
    return {id, session_id, state, progress, error};
  }
  void set(JobState s, std::optional<std::string> err = std::nullopt) {
    {
      std::lock_guard lock(mutex);
      state = s;
      if (s == JobState::done) progress = 1.0;
      error = std::move(err);
    }
    changed.notify_all();
  }
  void advance(double p) {
    std::lock_guard lock(mutex);
    progress = std::max(progress, std::min(p, 1.0));
  }
};

namespace {

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return 400;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::cancelled: return 409;
    case ErrorKind::infeasible: return 422;
    case ErrorKind::internal: break;
  }
  return 500;
}

Response error_response(int status, const std::string& message) {
  return {status, {{"schema_version", kSchemaVersion}, {"error", message}}};
}

template <typename F>
Response guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return error_response(http_status(e.kind()), e.what());
  } catch (const Json::exception& e) {
    return error_response(400, std::string("invalid JSON: ") + e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

Json job_json(const JobStatus& s) {
  Json j = {{"schema_version", kSchemaVersion},
            {"id", s.id},
            {"session_id", s.session_id},
            {"kind", "extract"},
            {"state", to_string(s.state)},
            {"progress", s.progress}};
  j["error"] = s.error ? Json(*s.error) : Json(nullptr);
  return j;
}

std::string now_string() {
  return format_timestamp(std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now()));
}

bool valid_ref(const std::string& ref) {
  return !ref.empty() && ref.size() <= 128 &&
         std::all_of(ref.begin(), ref.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; });
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  fs::create_directories(config_.data_dir / "corpora");
  fs::create_directories(config_.data_dir / "sessions");
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  load_sessions();
}

Service::~Service() {
  std::map<std::string, std::shared_ptr<Job>> jobs;
  {
    std::lock_guard lock(mutex_);
    jobs = jobs_;
  }
  for (auto& [_, job] : jobs) job->thread.request_stop();
  for (auto& [_, job] : jobs)
    if (job->thread.joinable()) job->thread.join();
}

std::string Service::new_id(std::string_view prefix) {
  std::mt19937_64 rng(id_salt_ + id_counter_++);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return std::string(prefix) + buf;
}

Response Service::post_corpus(std::string_view jsonl) {
  return guarded([&] {
    std::istringstream in{std::string(jsonl)};
    std::vector<std::string> warnings;
    const auto corpus = load_corpus(in, CorpusFormat::jsonl, *Lexicon::builtin(), &warnings);
    if (corpus.empty()) fail(ErrorKind::invalid_input, "corpus has no documents");
    std::ostringstream normalized;
    write_corpus(corpus, normalized);
    const auto text = normalized.str();
    const auto id = sha256_hex(text);
    const auto path = config_.data_dir / "corpora" / (id + ".jsonl");
    if (!fs::exists(path)) write_file_atomic(path, text);
    return Response{201, {{"schema_version", kSchemaVersion}, {"corpus_id", id}, {"documents", corpus.size()}, {"warnings", warnings}}};
  });
}

std::shared_ptr<const Corpus> Service::load_corpus_ref(const std::string& corpus_ref) {
  if (!valid_ref(corpus_ref)) fail(ErrorKind::not_found, "unknown corpus '" + corpus_ref + "'");
  const auto path = config_.data_dir / "corpora" / (corpus_ref + ".jsonl");
  if (!fs::exists(path)) fail(ErrorKind::not_found, "unknown corpus '" + corpus_ref + "'");
  std::istringstream in(read_file(path));
  return std::make_shared<const Corpus>(load_corpus(in));
}

Response Service::corpus_summary(const std::string& corpus_id) {
  return guarded([&] {
    const auto corpus = load_corpus_ref(corpus_id);
    std::set<Timestamp> times;
    std::set<std::string> sources;
    for (const auto& d : *corpus) {
      times.insert(d.timestamp);
      if (d.source) sources.insert(*d.source);
    }
    return Response{200,
                    {{"schema_version", kSchemaVersion},
                     {"corpus_id", corpus_id},
                     {"documents", corpus->size()},
                     {"distinct_timestamps", times.size()},
                     {"first_timestamp", format_timestamp(*times.begin())},
                     {"last_timestamp", format_timestamp(*times.rbegin())},
                     {"sources", sources.size()},
                     {"provided_vectors", corpus->has_provided_vectors()}}};
  });
}

std::shared_ptr<const AnalyzedCorpus> Service::analysis_for(const std::string& corpus_ref, const AnalysisConfig& config) {
  const auto key = corpus_ref + "|" + to_json(config).dump();
  {
    std::lock_guard lock(mutex_);
    if (auto it = analyses_.find(key); it != analyses_.end()) return it->second;
  }
  auto corpus = load_corpus_ref(corpus_ref);
  auto analysis = AnalyzedCorpus::build(*corpus, config);
  std::lock_guard lock(mutex_);
  return analyses_.try_emplace(key, std::move(analysis)).first->second;
}

Json Service::session_json(const Session& s) const {
  return {{"schema_version", kSchemaVersion},
          {"id", s.id},
          {"corpus_ref", s.corpus_ref},
          {"params", to_json(s.params)},
          {"analysis", to_json(s.analysis)},
          {"seed", s.seed},
          {"job_id", s.job_id},
          {"cluster_model_ref", s.corpus_ref + ":" + sha256_hex(to_json(s.analysis).dump()).substr(0, 16)},
          {"created", s.created},
          {"updated", s.updated},
          {"has_map", s.map != nullptr},
          {"flags", s.flags}};
}

void Service::persist_session(const Session& s) {
  write_file_atomic(config_.data_dir / "sessions" / (s.id + ".json"), session_json(s).dump(2) + "\n");
}

void Service::load_sessions() {
  for (const auto& entry : fs::directory_iterator(config_.data_dir / "sessions")) {
    const auto name = entry.path().filename().string();
    if (!name.ends_with(".json") || name.ends_with(".map.json")) continue;
    try {
      const auto j = Json::parse(read_file(entry.path()));
      Session s;
      s.id = j.at("id").get<std::string>();
      s.corpus_ref = j.at("corpus_ref").get<std::string>();
      s.params = params_from_json(j.at("params"));
      s.analysis = analysis_config_from_json(j.at("analysis"));
      s.seed = j.at("seed").get<std::uint64_t>();
      s.job_id = j.value("job_id", "");
      s.created = j.value("created", "");
      s.updated = j.value("updated", "");
      s.flags = j.value("flags", std::vector<std::string>{});
      const auto map_path = config_.data_dir / "sessions" / (s.id + ".map.json");
      if (fs::exists(map_path)) s.map = std::make_shared<const NarrativeMap>(map_from_json(Json::parse(read_file(map_path))));
      sessions_.emplace(s.id, std::move(s));
    } catch (const std::exception&) {
      // Unreadable session files are skipped.
    }
  }
}

Service::Session* Service::find_session(const std::string& id) {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

std::string Service::start_job(Session& session) {
  auto job = std::make_shared<Job>();
  job->id = new_id("job-");
  job->session_id = session.id;
  job->corpus_ref = session.corpus_ref;
  job->params = session.params;
  job->analysis = session.analysis;
  if (!session.job_id.empty()) {
    if (auto it = jobs_.find(session.job_id); it != jobs_.end()) it->second->thread.request_stop();
  }
  session.job_id = job->id;
  jobs_.emplace(job->id, job);
  job->thread = std::jthread([this, job](std::stop_token stop) { run_job(job, stop); });
  return job->id;
}

void Service::run_job(std::shared_ptr<Job> job, std::stop_token stop) {
  try {
    if (stop.stop_requested()) fail(ErrorKind::cancelled, "cancelled");
    job->set(JobState::running);
    auto analysis = analysis_for(job->corpus_ref, job->analysis);
    job->advance(0.2);
    if (stop.stop_requested()) fail(ErrorKind::cancelled, "cancelled");
    ExtractionControl control;
    control.stop = stop;
    control.progress = [&](double p) { job->advance(0.2 + 0.8 * p); };
    auto map = std::make_shared<const NarrativeMap>(extract(*analysis, job->params, control));
    {
      std::lock_guard lock(mutex_);
      Session* s = find_session(job->session_id);
      if (stop.stop_requested() || !s || s->job_id != job->id) fail(ErrorKind::cancelled, "superseded");
      write_file_atomic(config_.data_dir / "sessions" / (s->id + ".map.json"), to_json(*map).dump(2) + "\n");
      s->map = map;
      s->flags = map->flags;
      s->updated = now_string();
      persist_session(*s);
    }
    job->set(JobState::done);
  } catch (const Error& e) {
    job->set(e.kind() == ErrorKind::cancelled ? JobState::cancelled : JobState::failed,
             e.kind() == ErrorKind::cancelled ? std::nullopt : std::optional<std::string>(e.what()));
  } catch (const std::exception& e) {
    job->set(JobState::failed, std::string(e.what()));
  }
}

Response Service::create_session(const Json& body) {
  return guarded([&] {
    if (!body.is_object()) fail(ErrorKind::invalid_input, "request body must be a JSON object");
    if (!body.contains("corpus_id") || !body["corpus_id"].is_string()) fail(ErrorKind::invalid_input, "missing string field 'corpus_id'");
    Session s;
    s.corpus_ref = body["corpus_id"].get<std::string>();
    const auto corpus = load_corpus_ref(s.corpus_ref);
    s.params = params_from_json(body.value("params", Json(nullptr)));
    s.analysis = analysis_config_from_json(body.value("analysis", Json(nullptr)));
    s.seed = body.contains("seed") ? body["seed"].get<std::uint64_t>() : config_.default_seed;
    if (!body.contains("analysis") || !body["analysis"].contains("seed")) s.analysis.vectorizer.seed = s.seed;
    s.params.validate(corpus->size());
    std::lock_guard lock(mutex_);
    s.id = new_id("ses-");
    s.created = s.updated = now_string();
    auto& stored = sessions_.emplace(s.id, std::move(s)).first->second;
    const auto job_id = start_job(stored);
    persist_session(stored);
    return Response{202, {{"schema_version", kSchemaVersion}, {"session_id", stored.id}, {"job_id", job_id}}};
  });
}

Response Service::reextract(const std::string& session_id, const Json& body) {
  return guarded([&] {
    std::lock_guard lock(mutex_);
    Session* s = find_session(session_id);
    if (!s) fail(ErrorKind::not_found, "unknown session '" + session_id + "'");
    auto params = params_from_json(body.is_object() ? body.value("params", Json(nullptr)) : Json(nullptr), s->params);
    const auto path = config_.data_dir / "corpora" / (s->corpus_ref + ".jsonl");
    std::istringstream in(read_file(path));
    params.validate(load_corpus(in).size());
    s->params = params;
    s->updated = now_string();
    const auto job_id = start_job(*s);
    persist_session(*s);
    return Response{202, {{"schema_version", kSchemaVersion}, {"session_id", s->id}, {"job_id", job_id}}};
  });
}

Response Service::get_session(const std::string& session_id) {
  return guarded([&] {
    std::lock_guard lock(mutex_);
    Session* s = find_session(session_id);
    if (!s) fail(ErrorKind::not_found, "unknown session '" + session_id + "'");
    return Response{200, session_json(*s)};
  });
}

Response Service::get_job(const std::string& job_id) {
  return guarded([&] {
    std::shared_ptr<Job> job;
    {
      std::lock_guard lock(mutex_);
      auto it = jobs_.find(job_id);
      if (it == jobs_.end()) fail(ErrorKind::not_found, "unknown job '" + job_id + "'");
      job = it->second;
    }
    return Response{200, job_json(job->status())};
  });
}

Response Service::cancel_job(const std::string& job_id) {
  return guarded([&] {
    std::shared_ptr<Job> job;
    {
      std::lock_guard lock(mutex_);
      auto it = jobs_.find(job_id);
      if (it == jobs_.end()) fail(ErrorKind::not_found, "unknown job '" + job_id + "'");
      job = it->second;
    }
    job->thread.request_stop();
    return Response{202, job_json(job->status())};
  });
}

std::optional<JobStatus> Service::wait_for_job(const std::string& job_id, std::chrono::milliseconds timeout) {
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) return std::nullopt;
    job = it->second;
  }
  std::unique_lock lock(job->mutex);
  job->changed.wait_for(lock, timeout, [&] { return job->state != JobState::queued && job->state != JobState::running; });
  return JobStatus{job->id, job->session_id, job->state, job->progress, job->error};
}

Service::Session Service::ready_session(const std::string& id) {
  std::shared_ptr<Job> job;
  Session copy;
  {
    std::lock_guard lock(mutex_);
    Session* s = find_session(id);
    if (!s) fail(ErrorKind::not_found, "unknown session '" + id + "'");
    copy = *s;
    if (auto it = jobs_.find(s->job_id); it != jobs_.end()) job = it->second;
  }
  if (job) {
    const auto st = job->status();
    if (st.state == JobState::queued || st.state == JobState::running) fail(ErrorKind::conflict, "extraction still running");
  }
  if (!copy.map) {
    std::string why = "no narrative map for this session";
    if (job) {
      const auto st = job->status();
      if (st.state == JobState::failed) why += ": extraction failed (" + st.error.value_or("unknown error") + ")";
      if (st.state == JobState::cancelled) why += ": extraction was cancelled";
    }
    fail(ErrorKind::conflict, why);
  }
  return copy;
}

Response Service::get_map(const std::string& session_id) {
  return guarded([&] { return Response{200, to_json(*ready_session(session_id).map)}; });
}

Response Service::get_clusters(const std::string& session_id) {
  return guarded([&] {
    const auto s = ready_session(session_id);
    return Response{200, clusters_to_json(*analysis_for(s.corpus_ref, s.analysis))};
  });
}

Response Service::get_projection(const std::string& session_id) {
  return guarded([&] {
    const auto s = ready_session(session_id);
    const auto analysis = analysis_for(s.corpus_ref, s.analysis);
    return Response{200, projection_to_json(*analysis, project_2d(analysis->vectors().values, analysis->corpus()))};
  });
}

Response Service::get_edge_explanation(const std::string& session_id, const std::string& from, const std::string& to) {
  return guarded([&] {
    const auto s = ready_session(session_id);
    const auto analysis = analysis_for(s.corpus_ref, s.analysis);
    ShapleyConfig cfg;
    cfg.seed = s.seed;
    return Response{200, to_json(explain_connection(*analysis, *s.map, from, to, cfg))};
  });
}

Response Service::compare(const std::string& session_id, const std::string& a, const std::string& b) {
  return guarded([&] {
    if (a.empty() || b.empty()) fail(ErrorKind::invalid_input, "query parameters 'a' and 'b' are required");
    const auto s = ready_session(session_id);
    const auto analysis = analysis_for(s.corpus_ref, s.analysis);
    ShapleyConfig cfg;
    cfg.seed = s.seed;
    return Response{200, to_json(compare_events(*analysis, *s.map, a, b, cfg))};
  });
}

Response Service::get_structure(const std::string& session_id) {
  return guarded([&] {
    const auto s = ready_session(session_id);
    const auto analysis = analysis_for(s.corpus_ref, s.analysis);
    return Response{200, to_json(explain_structure(*s.map, *analysis))};
  });
}

void mount_routes(httplib::Server& server, Service& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req) -> std::optional<Json> {
    if (req.body.empty()) return Json::object();
    try {
      return Json::parse(req.body);
    } catch (const Json::exception&) {
      return std::nullopt;
    }
  };
  auto bad_json = [&](httplib::Response& res) { reply(res, error_response(400, "request body is not valid JSON")); };

  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/corpora", [&](const httplib::Request& req, httplib::Response& res) { reply(res, service.post_corpus(req.body)); });
  server.Get(R"(/corpora/([^/]+)/summary)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.corpus_summary(req.matches[1]));
  });
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (!body) return bad_json(res);
    reply(res, service.create_session(*body));
  });
  server.Post(R"(/sessions/([^/]+)/extract)", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (!body) return bad_json(res);
    reply(res, service.reextract(req.matches[1], *body));
  });
  server.Get(R"(/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) { reply(res, service.get_session(req.matches[1])); });
  server.Get(R"(/jobs/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) { reply(res, service.get_job(req.matches[1])); });
  server.Delete(R"(/jobs/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) { reply(res, service.cancel_job(req.matches[1])); });
  server.Get(R"(/sessions/([^/]+)/map)", [&](const httplib::Request& req, httplib::Response& res) { reply(res, service.get_map(req.matches[1])); });
  server.Get(R"(/sessions/([^/]+)/clusters)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_clusters(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/projection)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_projection(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/structure)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_structure(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/edges/([^/]+)/([^/]+)/explanation)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_edge_explanation(req.matches[1], req.matches[2], req.matches[3]));
  });
  server.Get(R"(/sessions/([^/]+)/compare)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.compare(req.matches[1], req.get_param_value("a"), req.get_param_value("b")));
  });
}

int serve(const ServiceConfig& config, const std::string& host, int port) {
  Service service(config);
  httplib::Server server;
  mount_routes(server, service);
  std::fprintf(stderr, "narrmap: serving %s on http://%s:%d\n", config.data_dir.c_str(), host.c_str(), port);
  return server.listen(host, port) ? 0 : 1;
}

}  // namespace narrmap
