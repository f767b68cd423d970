#include "debater/service.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "debater/error.hpp"
#include "debater/random.hpp"
#include "debater/text.hpp"

namespace debater::service {

using nlohmann::json;

KeyStore::KeyStore(std::vector<std::string> keys) : keys_(std::move(keys)) {}

KeyStore KeyStore::parse(std::string_view contents) {
  std::vector<std::string> keys;
  for (const auto& line : text::data_lines(contents)) {
    auto k = text::trim(line);
    if (!k.empty()) keys.push_back(std::move(k));
  }
  return KeyStore(std::move(keys));
}

KeyStore KeyStore::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config.keys", "cannot read key file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

// Length-independent comparison: every byte of the longer input is visited.
bool equal_constant_time(std::string_view a, std::string_view b) {
  const std::size_t n = std::max(a.size(), b.size());
  unsigned diff = static_cast<unsigned>(a.size() ^ b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= static_cast<unsigned>(x ^ y);
  }
  return diff == 0;
}

}  // namespace

bool KeyStore::contains(std::string_view key) const {
  bool found = false;
  for (const auto& k : keys_) found |= equal_constant_time(k, key);
  return found;
}

const char* state_name(JobState s) {
  switch (s) {
    case JobState::pending: return "pending";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

// ---- job store -------------------------------------------------------------

JobStore::JobStore(JobStoreConfig config, Runner runner) : config_(config), runner_(std::move(runner)) {
  salt_ = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  std::size_t n = config_.workers;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this](std::stop_token st) { work(st); });
}

JobStore::~JobStore() {
  for (auto& w : workers_) w.request_stop();
  cv_.notify_all();
  workers_.clear();
}

std::string JobStore::new_id_locked() {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(random::splitmix64(salt_ ^ random::splitmix64(++counter_))));
  return std::string("job-") + buf;
}

void JobStore::purge_locked() {
  const auto now = std::chrono::steady_clock::now();
  for (auto it = jobs_.begin(); it != jobs_.end();) {
    if (it->second.finished && now - *it->second.finished >= config_.ttl) {
      if (it->second.idempotency_key) by_idempotency_key_.erase({it->second.owner, *it->second.idempotency_key});
      it = jobs_.erase(it);
    } else {
      ++it;
    }
  }
}

std::string JobStore::submit(const std::string& owner, const json& body,
                             const std::optional<std::string>& idempotency_key) {
  const auto n = body.at("comments").size();
  if (n > config_.max_comments) {
    throw Error("job.too_large", std::to_string(n) + " comments exceed the limit of " +
                                     std::to_string(config_.max_comments));
  }
  std::lock_guard lock(mu_);
  purge_locked();
  if (idempotency_key) {
    if (auto it = by_idempotency_key_.find({owner, *idempotency_key}); it != by_idempotency_key_.end()) {
      if (jobs_.at(it->second).body != body) {
        throw Error("idempotency.conflict", "idempotency key reused with a different request body",
                    ErrorKind::semantic);
      }
      return it->second;
    }
  }
  const auto id = new_id_locked();
  Job job;
  job.owner = owner;
  job.body = body;
  job.view.id = id;
  job.idempotency_key = idempotency_key;
  jobs_.emplace(id, std::move(job));
  if (idempotency_key) by_idempotency_key_[{owner, *idempotency_key}] = id;
  queue_.push_back(id);
  cv_.notify_one();
  return id;
}

JobView JobStore::poll(const std::string& owner, const std::string& id) {
  std::lock_guard lock(mu_);
  purge_locked();
  auto it = jobs_.find(id);
  if (it == jobs_.end() || it->second.owner != owner) throw Error("job.unknown", "no job " + id);
  return it->second.view;
}

std::size_t JobStore::size() {
  std::lock_guard lock(mu_);
  purge_locked();
  return jobs_.size();
}

void JobStore::work(std::stop_token stop) {
  while (true) {
    std::string id;
    json body;
    {
      std::unique_lock lock(mu_);
      if (!cv_.wait(lock, stop, [this] { return !queue_.empty(); })) return;
      id = queue_.front();
      queue_.pop_front();
      auto it = jobs_.find(id);
      if (it == jobs_.end()) continue;
      it->second.view.state = JobState::running;
      body = it->second.body;
    }
    JobView outcome;
    try {
      outcome.result = runner_(body);
      outcome.state = JobState::done;
    } catch (const Error& e) {
      outcome.state = JobState::failed;
      outcome.error_code = e.code();
      outcome.error_message = e.what();
    } catch (const std::exception& e) {
      outcome.state = JobState::failed;
      outcome.error_code = "internal";
      outcome.error_message = e.what();
    }
    std::lock_guard lock(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) continue;
    outcome.id = id;
    it->second.view = std::move(outcome);
    it->second.finished = std::chrono::steady_clock::now();
  }
}

// ---- service ---------------------------------------------------------------

ServiceConfig config_from_environment() {
  ServiceConfig c;
  const char* path = std::getenv("DEBATER_KEYS_FILE");
  if (path == nullptr || *path == '\0') throw Error("config.keys", "DEBATER_KEYS_FILE is not set");
  c.keys = KeyStore::load_file(path);
  if (c.keys.size() == 0) throw Error("config.keys", std::string("no keys in ") + path);
  return c;
}

int status_for(const Error& e) {
  const auto& c = e.code();
  if (c.starts_with("auth.")) return 401;
  if (c == "route.unknown" || c == "job.unknown") return 404;
  if (c == "method.not_allowed") return 405;
  if (c == "body.too_large" || c == "job.too_large") return 413;
  if (c == "internal") return 500;
  return e.kind() == ErrorKind::semantic ? 422 : 400;
}

std::string error_body(const std::string& code, const std::string& message) {
  return api::render(api::Json{{"code", code}, {"message", message}});
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      jobs_(config_.jobs, [registry = config_.context.registry](const json& body) {
        return api::render(api::run_kpa_request(body, registry));
      }) {}

namespace {

json parse_body(const std::string& body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error("body.parse", "request body is not valid JSON");
  return j;
}

api::Json job_json(const JobView& v) {
  api::Json j{{"job_id", v.id}, {"state", state_name(v.state)}};
  if (v.result) j["result"] = api::Json::parse(*v.result);
  if (v.error_code) j["error"] = {{"code", *v.error_code}, {"message", v.error_message.value_or("")}};
  return j;
}

}  // namespace

Response Service::handle(const Request& request) {
  try {
    if (request.path == "/v1/health") {
      if (request.method != "GET") throw Error("method.not_allowed", "use GET");
      return {200, api::render({{"status", "ok"}})};
    }
    const auto key = request.headers.find("x-api-key");
    if (key == request.headers.end() || key->second.empty()) {
      throw Error("auth.missing", "an API key is required in the x-api-key header");
    }
    if (!config_.keys.contains(key->second)) throw Error("auth.invalid", "unknown API key");
    if (request.body.size() > config_.max_body_bytes) {
      throw Error("body.too_large", "request body exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
    }
    return dispatch(request, key->second);
  } catch (const Error& e) {
    return {status_for(e), error_body(e.code(), e.what())};
  } catch (const std::exception& e) {
    return {500, error_body("internal", e.what())};
  }
}

Response Service::dispatch(const Request& request, const std::string& owner) {
  const std::string prefix = "/v1";
  if (!request.path.starts_with(prefix + "/")) throw Error("route.unknown", "no route " + request.path);
  const auto path = request.path.substr(prefix.size());

  const std::string jobs = "/kpa/jobs";
  if (path == jobs) {
    if (request.method != "POST") throw Error("method.not_allowed", "use POST to submit a job");
    const auto body = parse_body(request.body);
    api::validate_kpa_request(body);
    std::optional<std::string> idem;
    if (auto it = request.headers.find("x-idempotency-key"); it != request.headers.end() && !it->second.empty()) {
      idem = it->second;
    }
    const auto id = jobs_.submit(owner, body, idem);
    return {202, api::render(job_json(jobs_.poll(owner, id)))};
  }
  if (path.starts_with(jobs + "/")) {
    if (request.method != "GET") throw Error("method.not_allowed", "use GET to poll a job");
    return {200, api::render(job_json(jobs_.poll(owner, path.substr(jobs.size() + 1))))};
  }
  const auto& eps = api::endpoints();
  if (std::find(eps.begin(), eps.end(), path) == eps.end()) throw Error("route.unknown", "no route " + request.path);
  if (request.method != "POST") throw Error("method.not_allowed", "use POST for " + request.path);
  return {200, api::render(api::call(path, parse_body(request.body), config_.context))};
}

}  // namespace debater::service
