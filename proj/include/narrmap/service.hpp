#pragma once

#include "narrmap/analysis.hpp"
#include "narrmap/extraction.hpp"
#include "narrmap/json_io.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace narrmap {

std::string sha256_hex(std::string_view data);

/// Writes `content` to a sibling temp file and renames it over `path`, so
/// readers see either the old or the new file, never a partial one.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

enum class JobState { queued, running, done, failed, cancelled };
std::string_view to_string(JobState s);

struct JobStatus {
  std::string id;
  std::string session_id;
  JobState state = JobState::queued;
  double progress = 0;
  std::optional<std::string> error;
};

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::uint64_t default_seed = 0;
};

struct Response {
  int status = 200;
  Json body;
};

/// Corpus store, sessions and extraction jobs behind the HTTP API. All
/// persisted state is plain JSON under the data directory:
///   corpora/<sha256>.jsonl, sessions/<id>.json, sessions/<id>.map.json
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response post_corpus(std::string_view jsonl);
  Response corpus_summary(const std::string& corpus_id);
  /// Body: {corpus_id, params?, analysis?, seed?}. Starts an extraction job.
  Response create_session(const Json& body);
  /// Body: {params?}. Re-runs extraction, cancelling any job still running for the session.
  Response reextract(const std::string& session_id, const Json& body);
  Response get_session(const std::string& session_id);
  Response get_job(const std::string& job_id);
  Response cancel_job(const std::string& job_id);
  Response get_map(const std::string& session_id);
  Response get_clusters(const std::string& session_id);
  Response get_projection(const std::string& session_id);
  Response get_edge_explanation(const std::string& session_id, const std::string& from, const std::string& to);
  Response compare(const std::string& session_id, const std::string& a, const std::string& b);
  Response get_structure(const std::string& session_id);

  /// Blocks until the job leaves queued/running or the timeout expires.
  std::optional<JobStatus> wait_for_job(const std::string& job_id, std::chrono::milliseconds timeout);

  const ServiceConfig& config() const { return config_; }

 private:
  struct Job;
  struct Session {
    std::string id;
    std::string corpus_ref;
    ExtractionParams params;
    AnalysisConfig analysis;
    std::uint64_t seed = 0;
    std::shared_ptr<const NarrativeMap> map;
    std::string job_id;
    std::string created;
    std::string updated;
    std::vector<std::string> flags;
  };

  std::shared_ptr<const AnalyzedCorpus> analysis_for(const std::string& corpus_ref, const AnalysisConfig& config);
  std::shared_ptr<const Corpus> load_corpus_ref(const std::string& corpus_ref);
  std::string start_job(Session& session);
  void run_job(std::shared_ptr<Job> job, std::stop_token stop);
  void persist_session(const Session& s);
  void load_sessions();
  Session* find_session(const std::string& id);
  // Snapshot of a session whose map is ready; throws conflict/not_found otherwise.
  Session ready_session(const std::string& id);
  std::string new_id(std::string_view prefix);
  Json session_json(const Session& s) const;

  ServiceConfig config_;
  std::mutex mutex_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::map<std::string, std::shared_ptr<const AnalyzedCorpus>> analyses_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_ = 0;
};

/// Registers every endpoint (with CORS headers) on `server`.
void mount_routes(httplib::Server& server, Service& service);

/// Runs the HTTP API until the process is stopped.
int serve(const ServiceConfig& config, const std::string& host, int port);

}  // namespace narrmap
