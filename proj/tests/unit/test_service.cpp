#include "support.hpp"

#include "narrmap/service.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <random>
#include <sstream>
#include <thread>

using namespace narrmap;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() / ("narrmap-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string big_corpus_jsonl(std::size_t n) {
  std::mt19937_64 rng(77);
  std::ostringstream out;
  write_corpus(testing::random_corpus(rng, n), out);
  return out.str();
}

void check_valid(const Json& value, const std::string& definition) {
  const auto errors = testing::schema_errors(value, definition);
  for (const auto& e : errors) INFO(e);
  CHECK_MESSAGE(errors.empty(), definition);
}

// A live HTTP server on an ephemeral port.
struct Server {
  Service& service;
  httplib::Server http;
  std::thread thread;
  int port = 0;

  explicit Server(Service& s) : service(s) {
    mount_routes(http, service);
    port = http.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { http.listen_after_bind(); });
    http.wait_until_ready();
  }
  ~Server() {
    http.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

Json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return Json::parse(r->body);
}

std::string fixture_corpus_id(Service& service) {
  const auto r = service.post_corpus(testing::slurp(testing::fixture_path()));
  REQUIRE(r.status == 201);
  return r.body.at("corpus_id").get<std::string>();
}

}  // namespace

TEST_CASE("corpus store is content addressed") {
  TempDir dir;
  Service service({dir.path, 0});
  const auto text = testing::slurp(testing::fixture_path());
  const auto a = service.post_corpus(text);
  REQUIRE(a.status == 201);
  check_valid(a.body, "corpus_created");
  CHECK(a.body["documents"] == 160);
  // Reordering lines normalizes to the same corpus.
  std::istringstream in(text);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::string reversed;
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) reversed += *it + "\n";
  const auto b = service.post_corpus(reversed);
  CHECK(b.body["corpus_id"] == a.body["corpus_id"]);
  const auto id = a.body["corpus_id"].get<std::string>();
  CHECK(fs::exists(dir.path / "corpora" / (id + ".jsonl")));
  CHECK(sha256_hex(testing::slurp(dir.path / "corpora" / (id + ".jsonl"))) == id);

  const auto summary = service.corpus_summary(id);
  CHECK(summary.status == 200);
  check_valid(summary.body, "corpus_summary");
  CHECK(service.corpus_summary(std::string(64, 'a')).status == 404);
  CHECK(service.corpus_summary("../etc").status == 404);

  const auto bad = service.post_corpus("{\"id\": \"x\"}\n");
  CHECK(bad.status == 400);
  check_valid(bad.body, "error");
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("atomic writes replace whole files") {
  TempDir dir;
  const auto p = dir.path / "f.json";
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  CHECK(read_file(p) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("happy path over HTTP") {
  TempDir dir;
  Service service({dir.path, 7});
  Server server(service);
  auto cli = server.client();

  const auto posted = cli.Post("/corpora", testing::slurp(testing::fixture_path()), "application/x-ndjson");
  REQUIRE(posted);
  CHECK(posted->status == 201);
  CHECK(posted->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto corpus_id = body_of(posted)["corpus_id"].get<std::string>();
  check_valid(body_of(cli.Get("/corpora/" + corpus_id + "/summary")), "corpus_summary");

  const Json request = {{"corpus_id", corpus_id}, {"params", {{"K", 20}, {"sigma", 0.5}}}};
  const auto created = cli.Post("/sessions", request.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 202);
  const auto c = body_of(created);
  check_valid(c, "session_created");
  const auto sid = c["session_id"].get<std::string>();
  const auto jid = c["job_id"].get<std::string>();

  const auto status = service.wait_for_job(jid, 60s);
  REQUIRE(status);
  REQUIRE(status->state == JobState::done);
  const auto job = cli.Get("/jobs/" + jid);
  CHECK(job->status == 200);
  check_valid(body_of(job), "job");
  CHECK(body_of(job)["progress"] == 1.0);

  const auto session = body_of(cli.Get("/sessions/" + sid));
  check_valid(session, "session");
  CHECK(session["has_map"] == true);
  CHECK(session["seed"] == 7);

  const auto map = body_of(cli.Get("/sessions/" + sid + "/map"));
  check_valid(map, "map");
  check_valid(body_of(cli.Get("/sessions/" + sid + "/clusters")), "clusters");
  check_valid(body_of(cli.Get("/sessions/" + sid + "/projection")), "projection");
  check_valid(body_of(cli.Get("/sessions/" + sid + "/structure")), "structure");

  REQUIRE_FALSE(map["edges"].empty());
  const auto from = map["edges"][0]["from"].get<std::string>();
  const auto to = map["edges"][0]["to"].get<std::string>();
  const auto ex = cli.Get("/sessions/" + sid + "/edges/" + from + "/" + to + "/explanation");
  CHECK(ex->status == 200);
  check_valid(body_of(ex), "explanation");
  const auto nodes = map["nodes"];
  const auto cmp = cli.Get("/sessions/" + sid + "/compare?a=" + nodes[0].get<std::string>() + "&b=" + nodes[nodes.size() - 1].get<std::string>());
  CHECK(cmp->status == 200);
  check_valid(body_of(cmp), "comparison");

  // Errors.
  const auto non_edge = cli.Get("/sessions/" + sid + "/edges/" + to + "/" + from + "/explanation");
  CHECK(non_edge->status == 404);
  check_valid(body_of(non_edge), "error");
  CHECK(cli.Get("/sessions/" + sid + "/compare?a=" + from)->status == 400);
  CHECK(cli.Get("/sessions/nope/map")->status == 404);
  CHECK(cli.Get("/jobs/nope")->status == 404);
  CHECK(cli.Post("/sessions", "{not json", "application/json")->status == 400);
  CHECK(cli.Post("/sessions", Json{{"corpus_id", corpus_id}, {"params", {{"K", 500}}}}.dump(), "application/json")->status == 422);
  CHECK(cli.Post("/sessions", Json{{"corpus_id", corpus_id}, {"params", {{"sigma", 2}}}}.dump(), "application/json")->status == 400);
  CHECK(cli.Post("/sessions", Json{{"corpus_id", corpus_id}, {"params", {{"kay", 2}}}}.dump(), "application/json")->status == 400);
  CHECK(cli.Post("/sessions", Json{{"corpus_id", std::string(64, 'b')}}.dump(), "application/json")->status == 404);

  const auto pre = cli.Options("/sessions");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  // Re-extraction with the same inputs reproduces the map.
  const auto re = cli.Post("/sessions/" + sid + "/extract", "{}", "application/json");
  CHECK(re->status == 202);
  const auto rejob = body_of(re)["job_id"].get<std::string>();
  REQUIRE(service.wait_for_job(rejob, 60s)->state == JobState::done);
  CHECK(body_of(cli.Get("/sessions/" + sid + "/map")) == map);
}

TEST_CASE("results are refused until the job is done; progress is monotone") {
  TempDir dir;
  Service service({dir.path, 0});
  const auto corpus = service.post_corpus(big_corpus_jsonl(1500));
  REQUIRE(corpus.status == 201);
  const auto created = service.create_session({{"corpus_id", corpus.body["corpus_id"]}, {"params", {{"K", 40}}}});
  REQUIRE(created.status == 202);
  const auto sid = created.body["session_id"].get<std::string>();
  const auto jid = created.body["job_id"].get<std::string>();
  const auto early = service.get_map(sid);
  const auto first = service.get_job(jid).body;
  if (first["state"] == "queued" || first["state"] == "running") {
    CHECK(early.status == 409);
    check_valid(early.body, "error");
  }
  std::vector<double> progress;
  for (;;) {
    const auto j = service.get_job(jid).body;
    progress.push_back(j["progress"].get<double>());
    if (j["state"] != "queued" && j["state"] != "running") {
      CHECK(j["state"] == "done");
      break;
    }
    std::this_thread::sleep_for(2ms);
  }
  for (std::size_t i = 1; i < progress.size(); ++i) CHECK(progress[i] >= progress[i - 1]);
  CHECK(progress.back() == 1.0);
  CHECK(service.get_map(sid).status == 200);
}

TEST_CASE("cancelling and superseding jobs") {
  TempDir dir;
  Service service({dir.path, 0});
  const auto corpus = service.post_corpus(big_corpus_jsonl(1500));
  const auto created = service.create_session({{"corpus_id", corpus.body["corpus_id"]}, {"params", {{"K", 40}}}});
  const auto sid = created.body["session_id"].get<std::string>();
  const auto jid = created.body["job_id"].get<std::string>();
  const auto cancel = service.cancel_job(jid);
  CHECK(cancel.status == 202);
  check_valid(cancel.body, "job");
  const auto final_state = service.wait_for_job(jid, 60s);
  REQUIRE(final_state);
  CHECK(final_state->state == JobState::cancelled);
  CHECK(service.get_map(sid).status == 409);

  const auto r1 = service.reextract(sid, Json::object());
  const auto r2 = service.reextract(sid, {{"params", {{"K", 30}}}});
  const auto j1 = r1.body["job_id"].get<std::string>();
  const auto j2 = r2.body["job_id"].get<std::string>();
  REQUIRE(service.wait_for_job(j2, 60s)->state == JobState::done);
  const auto s1 = service.wait_for_job(j1, 60s);
  CHECK((s1->state == JobState::cancelled || s1->state == JobState::done));
  const auto map = service.get_map(sid);
  REQUIRE(map.status == 200);
  CHECK(map.body["params"]["K"] == 30);
  CHECK(service.reextract(sid, {{"params", {{"K", 5000}}}}).status == 422);
  CHECK(service.reextract("nope", Json::object()).status == 404);
}

TEST_CASE("sessions survive a restart") {
  TempDir dir;
  std::string sid, session_before, map_before;
  {
    Service service({dir.path, 3});
    const auto created = service.create_session({{"corpus_id", fixture_corpus_id(service)}});
    sid = created.body["session_id"].get<std::string>();
    REQUIRE(service.wait_for_job(created.body["job_id"].get<std::string>(), 60s)->state == JobState::done);
    session_before = service.get_session(sid).body.dump();
    map_before = service.get_map(sid).body.dump();
  }
  const auto map_file = dir.path / "sessions" / (sid + ".map.json");
  const auto bytes = testing::slurp(map_file);
  CHECK(to_json(map_from_json(Json::parse(bytes))).dump(2) + "\n" == bytes);

  Service reloaded({dir.path, 3});
  const auto session = reloaded.get_session(sid);
  REQUIRE(session.status == 200);
  CHECK(session.body.dump() == session_before);
  CHECK(reloaded.get_map(sid).body.dump() == map_before);
  CHECK(reloaded.get_structure(sid).status == 200);
}
