#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "debater/bundled.hpp"
#include "debater/error.hpp"
#include "debater/schema.hpp"
#include "debater/service.hpp"
#include "debater/text.hpp"
#include "httplib.h"

using namespace debater;
using namespace std::chrono_literals;
using nlohmann::json;
using service::Request;
using service::Response;

namespace {

const std::string kKey = "k-alpha-0123456789";
const std::string kOther = "k-beta-9876543210";

service::ServiceConfig config(service::JobStoreConfig jobs = {}) {
  service::ServiceConfig c;
  c.keys = service::KeyStore({kKey, kOther});
  c.jobs = jobs;
  if (c.jobs.workers == 0) c.jobs.workers = 2;
  return c;
}

Request post(const std::string& path, const std::string& body, const std::string& key = kKey) {
  Request r{"POST", path, {}, body};
  if (!key.empty()) r.headers["x-api-key"] = key;
  return r;
}

Request get(const std::string& path, const std::string& key = kKey) {
  Request r{"GET", path, {}, ""};
  if (!key.empty()) r.headers["x-api-key"] = key;
  return r;
}

std::string code_of(const Response& r) { return json::parse(r.body).at("code").get<std::string>(); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::filesystem::path kRequests = std::filesystem::path(DEBATER_SOURCE_DIR) / "tests/golden/requests";

std::string endpoint_for(const std::string& schema) {
  for (const auto& ep : api::endpoints()) {
    if (api::schema_name(ep) == schema) return ep;
  }
  return "";
}

json toy_comments(std::size_t n) {
  json out = json::array();
  for (const auto& line : text::data_lines(bundled::file("data/toy/survey.jsonl"))) {
    if (out.size() == n) break;
    out.push_back(json::parse(line));
  }
  for (const auto& line : text::data_lines(bundled::file("data/toy/kpa_comments.jsonl"))) {
    if (out.size() == n) break;
    auto c = json::parse(line);
    c["id"] = "k" + c["id"].get<std::string>();
    out.push_back(c);
  }
  return out;
}

json wait_done(service::Service& s, const std::string& id, std::vector<std::string>* states = nullptr,
               const std::string& key = kKey) {
  for (int i = 0; i < 6000; ++i) {
    const auto r = s.handle(get("/v1/kpa/jobs/" + id, key));
    REQUIRE(r.status == 200);
    auto j = json::parse(r.body);
    const auto state = j["state"].get<std::string>();
    if (states && (states->empty() || states->back() != state)) states->push_back(state);
    if (state == "done" || state == "failed") return j;
    std::this_thread::sleep_for(5ms);
  }
  FAIL("job did not finish");
  return {};
}

}  // namespace

TEST_CASE("key store") {
  const auto ks = service::KeyStore::parse("# keys\nalpha\n\n  beta  \n");
  CHECK(ks.size() == 2);
  CHECK(ks.contains("alpha"));
  CHECK(ks.contains("beta"));
  CHECK_FALSE(ks.contains("alph"));
  CHECK_FALSE(ks.contains("alphaa"));
  CHECK_FALSE(ks.contains(""));
  CHECK_FALSE(ks.contains("# keys"));
  CHECK_THROWS_AS(service::KeyStore::load_file("/nonexistent/keys"), Error);
}

TEST_CASE("authentication") {
  service::Service s(config());
  const std::string body = R"({"text": "", "lexicon": "default"})";

  auto r = s.handle(post("/v1/wikify", body, ""));
  CHECK(r.status == 401);
  CHECK(code_of(r) == "auth.missing");

  auto wrong = kKey;
  wrong.back() = wrong.back() == '9' ? '8' : '9';
  r = s.handle(post("/v1/wikify", body, wrong));
  CHECK(r.status == 401);
  CHECK(code_of(r) == "auth.invalid");

  r = s.handle(post("/v1/wikify", body));
  CHECK(r.status == 200);
  CHECK(json::parse(r.body) == json{{"mentions", json::array()}});

  // health needs no key
  r = s.handle(get("/v1/health", ""));
  CHECK(r.status == 200);
}

TEST_CASE("dispatch errors and status mapping") {
  service::Service s(config());
  const std::string topic = R"({"text": "We should ban smoking", "polarity": "suppressing"})";

  auto r = s.handle(post("/v1/stance", R"({"argument": "The meeting is on Tuesday.", "topic": )" + topic + "}"));
  CHECK(r.status == 422);
  CHECK(code_of(r) == "stance.abstain");

  r = s.handle(post("/v1/stance", "{\"argument\": "));
  CHECK(r.status == 400);
  CHECK(code_of(r) == "body.parse");

  r = s.handle(post("/v1/stance", R"({"argument": 3})"));
  CHECK(r.status == 400);
  CHECK(code_of(r) == "body.schema");

  r = s.handle(post("/v1/nope", "{}"));
  CHECK(r.status == 404);
  CHECK(code_of(r) == "route.unknown");
  r = s.handle(post("/wikify", "{}"));
  CHECK(r.status == 404);

  r = s.handle(get("/v1/wikify"));
  CHECK(r.status == 405);
  CHECK(code_of(r) == "method.not_allowed");

  // module input errors are 400
  r = s.handle(post("/v1/cluster", R"({"documents": ["parking fees", "bike lanes"], "k": 5, "min_df": 1})"));
  CHECK(r.status == 400);
  CHECK(code_of(r) == "cluster.k_too_large");

  // every error body has the published shape
  for (const auto& body : {"{", "{}", "[]"}) {
    const auto e = s.handle(post("/v1/quality", body));
    CHECK(e.status == 400);
    CHECK_FALSE(schema::check(schema::bundled("error"), json::parse(e.body)));
  }
}

TEST_CASE("status table") {
  CHECK(service::status_for(Error("auth.missing", "")) == 401);
  CHECK(service::status_for(Error("job.unknown", "")) == 404);
  CHECK(service::status_for(Error("job.too_large", "")) == 413);
  CHECK(service::status_for(Error("body.too_large", "")) == 413);
  CHECK(service::status_for(Error("stance.abstain", "", ErrorKind::semantic)) == 422);
  CHECK(service::status_for(Error("cluster.invalid", "")) == 400);
  CHECK(service::status_for(Error("internal", "")) == 500);
}

TEST_CASE("the error catalog lists every code the sources raise") {
  const auto catalog = json::parse(bundled::file("schemas/v1/error_codes.json"))["codes"];
  std::set<std::string> raised{"internal"};
  const std::regex pat(R"re(Error\("([a-z_.0-9]+)")re");
  for (const auto& entry : std::filesystem::recursive_directory_iterator(std::filesystem::path(DEBATER_SOURCE_DIR) / "src")) {
    if (entry.path().extension() != ".cpp") continue;
    const auto src = slurp(entry.path());
    for (std::sregex_iterator it(src.begin(), src.end(), pat), end; it != end; ++it) raised.insert((*it)[1]);
  }
  std::set<std::string> listed;
  for (const auto& [code, info] : catalog.items()) {
    listed.insert(code);
    const auto kind = info["kind"] == "semantic" ? ErrorKind::semantic : ErrorKind::input;
    CHECK_MESSAGE(service::status_for(Error(code, "", kind)) == info["status"].get<int>(), code);
  }
  CHECK(raised == listed);
}

TEST_CASE("body size limit") {
  auto c = config();
  c.max_body_bytes = 64;
  service::Service s(std::move(c));
  const auto r = s.handle(post("/v1/quality", R"({"sentence": ")" + std::string(100, 'a') + "\"}"));
  CHECK(r.status == 413);
  CHECK(code_of(r) == "body.too_large");
  CHECK(s.handle(post("/v1/quality", R"({"sentence": "ok"})")).status == 200);
}

TEST_CASE("responses validate against the published response schemas") {
  service::Service s(config());
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kRequests)) {
    const auto name = entry.path().stem().string();
    const auto ep = endpoint_for(name);
    REQUIRE_MESSAGE(!ep.empty(), name);
    const auto r = s.handle(post("/v1" + ep, slurp(entry.path())));
    CHECK_MESSAGE(r.status == 200, name << ": " << r.body);
    const auto violation = schema::check(schema::bundled(name + ".response"), json::parse(r.body));
    CHECK_MESSAGE(!violation, name << ": " << violation.value_or(""));
    ++seen;
  }
  CHECK(seen == static_cast<int>(api::endpoints().size()));
}

TEST_CASE("index/query without sentences needs a loaded index") {
  service::Service s(config());
  const auto r = s.handle(post("/v1/index/query", R"({"query": "bike"})"));
  CHECK(r.status == 422);
  CHECK(code_of(r) == "index.not_loaded");

  auto c = config();
  std::vector<text::SentenceRecord> recs{text::make_record("x1", "Bike lanes are safe.")};
  c.context.index = std::make_shared<index::SentenceIndex>(index::SentenceIndex::build(recs));
  service::Service with(std::move(c));
  const auto ok = with.handle(post("/v1/index/query", R"({"query": "bike"})"));
  REQUIRE(ok.status == 200);
  CHECK(json::parse(ok.body)["matches"][0]["id"] == "x1");
}

TEST_CASE("kpa job: submit, poll, parity with a direct run") {
  service::Service s(config());
  const json body = {{"comments", toy_comments(100)}, {"params", {{"k_max", 6}, {"tau", 0.5}}}};
  REQUIRE(body["comments"].size() == 100);

  const auto sub = s.handle(post("/v1/kpa/jobs", body.dump()));
  REQUIRE(sub.status == 202);
  const auto sj = json::parse(sub.body);
  CHECK_FALSE(schema::check(schema::bundled("job.response"), sj));
  const auto id = sj["job_id"].get<std::string>();
  CHECK(std::regex_match(id, std::regex("job-[0-9a-f]{16}")));

  std::vector<std::string> states{sj["state"].get<std::string>()};
  const auto done = wait_done(s, id, &states);
  CHECK_FALSE(schema::check(schema::bundled("job.response"), done));
  REQUIRE(done["state"] == "done");
  CHECK_FALSE(done.contains("error"));

  // observed states follow pending -> running -> done
  const std::vector<std::string> order{"pending", "running", "done"};
  std::size_t at = 0;
  for (const auto& st : states) {
    const auto pos = std::find(order.begin(), order.end(), st) - order.begin();
    REQUIRE(pos < 3);
    CHECK(static_cast<std::size_t>(pos) >= at);
    at = pos;
  }

  // direct run with identical params
  const auto params = api::kpa_params_from_json(body["params"]);
  const auto comments = api::kpa_comments(body);
  const auto direct = kpa::run_kpa(comments, params, *api::matcher_named("tfidf"), scorers::ScorerRegistry::baseline());
  CHECK(done["result"] == json::parse(kpa::summary_json(direct)));
  // byte parity of the rendered summary, key order included
  const auto raw = api::Json::parse(s.handle(get("/v1/kpa/jobs/" + id)).body);
  CHECK(api::render(raw["result"]) == api::render(api::run_kpa_request(body, api::Context{}.registry)));
}

TEST_CASE("kpa job errors") {
  service::JobStoreConfig jc;
  jc.max_comments = 10;
  service::Service s(config(jc));

  auto r = s.handle(get("/v1/kpa/jobs/job-0000000000000000"));
  CHECK(r.status == 404);
  CHECK(code_of(r) == "job.unknown");

  r = s.handle(post("/v1/kpa/jobs", json{{"comments", toy_comments(11)}}.dump()));
  CHECK(r.status == 413);
  CHECK(code_of(r) == "job.too_large");

  r = s.handle(post("/v1/kpa/jobs", R"({"comments": []})"));
  CHECK(r.status == 400);
  CHECK(code_of(r) == "body.schema");

  r = s.handle(post("/v1/kpa/jobs", R"({"comments": ["x"], "params": {"tau": 2}})"));
  CHECK(r.status == 400);
  CHECK(code_of(r) == "kpa.invalid");

  r = s.handle(get("/v1/kpa/jobs"));
  CHECK(r.status == 405);
  r = s.handle(post("/v1/kpa/jobs/whatever", "{}"));
  CHECK(r.status == 405);

  // a job whose run fails ends in failed with the module error
  r = s.handle(post("/v1/kpa/jobs", R"({"comments": ["   "]})"));
  REQUIRE(r.status == 202);
  const auto failed = wait_done(s, json::parse(r.body)["job_id"].get<std::string>());
  CHECK(failed["state"] == "failed");
  CHECK(failed["error"]["code"] == "kpa.empty");
  CHECK_FALSE(failed.contains("result"));
  CHECK_FALSE(schema::check(schema::bundled("job.response"), failed));
}

TEST_CASE("ten million comments are refused at the default limit") {
  service::JobStore store({1, 1h, 100'000}, [](const json&) { return std::string("{}"); });
  json body = {{"comments", json::array()}};
  auto& arr = body["comments"];
  arr.get_ref<json::array_t&>().assign(10'000'000, json());
  try {
    store.submit(kKey, body);
    FAIL("expected job.too_large");
  } catch (const Error& e) {
    CHECK(e.code() == "job.too_large");
    CHECK(service::status_for(e) == 413);
  }
}

TEST_CASE("idempotency keys and owner scoping") {
  service::Service s(config());
  const auto body = json{{"comments", toy_comments(12)}}.dump();
  auto req = post("/v1/kpa/jobs", body);
  req.headers["x-idempotency-key"] = "tok-1";
  const auto a = json::parse(s.handle(req).body)["job_id"];
  const auto b = json::parse(s.handle(req).body)["job_id"];
  CHECK(a == b);

  auto conflict = post("/v1/kpa/jobs", json{{"comments", toy_comments(13)}}.dump());
  conflict.headers["x-idempotency-key"] = "tok-1";
  const auto c = s.handle(conflict);
  CHECK(c.status == 422);
  CHECK(code_of(c) == "idempotency.conflict");

  // the same token under another key is a different job
  auto other = req;
  other.headers["x-api-key"] = kOther;
  const auto d = json::parse(s.handle(other).body)["job_id"];
  CHECK(d != a);

  // jobs are invisible to other keys
  const auto r = s.handle(get("/v1/kpa/jobs/" + a.get<std::string>(), kOther));
  CHECK(r.status == 404);

  // no token: every submission is new
  const auto e1 = json::parse(s.handle(post("/v1/kpa/jobs", body)).body)["job_id"];
  const auto e2 = json::parse(s.handle(post("/v1/kpa/jobs", body)).body)["job_id"];
  CHECK(e1 != e2);
  wait_done(s, a.get<std::string>());
  wait_done(s, d.get<std::string>(), nullptr, kOther);
}

TEST_CASE("finished jobs expire after the ttl") {
  service::JobStoreConfig jc;
  jc.ttl = 150ms;
  service::Service s(config(jc));
  auto req = post("/v1/kpa/jobs", json{{"comments", toy_comments(6)}}.dump());
  req.headers["x-idempotency-key"] = "t";
  const auto id = json::parse(s.handle(req).body)["job_id"].get<std::string>();
  wait_done(s, id);
  CHECK(s.handle(get("/v1/kpa/jobs/" + id)).status == 200);
  std::this_thread::sleep_for(300ms);
  CHECK(s.handle(get("/v1/kpa/jobs/" + id)).status == 404);
  // the token is released with its job
  const auto again = json::parse(s.handle(req).body)["job_id"].get<std::string>();
  CHECK(again != id);
  wait_done(s, again);
}

TEST_CASE("job ids are unique") {
  service::JobStore store({1, 1h, 100}, [](const json&) { return std::string("{}"); });
  std::set<std::string> ids;
  for (int i = 0; i < 500; ++i) ids.insert(store.submit(kKey, json{{"comments", {"x"}}}));
  CHECK(ids.size() == 500);
}

TEST_CASE("concurrent identical requests return identical bodies") {
  service::Service s(config());
  for (const auto* name : {"narrative", "cluster", "wikify", "themes"}) {
    const auto body = slurp(kRequests / (std::string(name) + ".json"));
    const auto req = post("/v1" + endpoint_for(name), body);
    std::vector<std::string> out(6);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < out.size(); ++i) {
      threads.emplace_back([&, i] { out[i] = s.handle(req).body; });
    }
    for (auto& t : threads) t.join();
    for (const auto& o : out) CHECK_MESSAGE(o == out[0], name);
  }
}

TEST_CASE("http round trip") {
  service::Service s(config());
  service::HttpServer server(s);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(30, 0);

  auto h = cli.Get("/v1/health");
  REQUIRE(h);
  CHECK(h->status == 200);

  auto r = cli.Post("/v1/wikify", R"({"text": "", "lexicon": "default"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 401);
  CHECK(json::parse(r->body)["code"] == "auth.missing");

  const httplib::Headers auth{{"X-Api-Key", kKey}};
  const auto wik = slurp(kRequests / "wikify.json");
  r = cli.Post("/v1/wikify", auth, wik, "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == s.handle(post("/v1/wikify", wik)).body);

  r = cli.Post("/v1/wikify", auth, "{nope", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["code"] == "body.parse");

  r = cli.Get("/v1/kpa/jobs/job-ffffffffffffffff", auth);
  REQUIRE(r);
  CHECK(r->status == 404);

  httplib::Headers job_headers = auth;
  job_headers.emplace("X-Idempotency-Key", "abc");
  const auto body = json{{"comments", toy_comments(20)}}.dump();
  r = cli.Post("/v1/kpa/jobs", job_headers, body, "application/json");
  REQUIRE(r);
  CHECK(r->status == 202);
  const auto id = json::parse(r->body)["job_id"].get<std::string>();
  auto again = cli.Post("/v1/kpa/jobs", job_headers, body, "application/json");
  REQUIRE(again);
  CHECK(json::parse(again->body)["job_id"] == id);
  const auto done = wait_done(s, id);
  auto polled = cli.Get("/v1/kpa/jobs/" + id, auth);
  REQUIRE(polled);
  CHECK(json::parse(polled->body) == done);
  server.stop();
}
