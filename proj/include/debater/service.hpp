#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "debater/api.hpp"

namespace debater::service {

// One key per line; blank lines and '#' comments ignored.
class KeyStore {
 public:
  KeyStore() = default;
  explicit KeyStore(std::vector<std::string> keys);
  static KeyStore parse(std::string_view contents);
  // Throws "config.keys" when the file cannot be read.
  static KeyStore load_file(const std::string& path);

  std::size_t size() const { return keys_.size(); }
  // Compares against every key without early exit.
  bool contains(std::string_view key) const;

 private:
  std::vector<std::string> keys_;
};

enum class JobState { pending, running, done, failed };
const char* state_name(JobState s);

struct JobView {
  std::string id;
  JobState state = JobState::pending;
  std::optional<std::string> result;  // rendered summary JSON, iff done
  std::optional<std::string> error_code;
  std::optional<std::string> error_message;
};

struct JobStoreConfig {
  std::size_t workers = 0;  // 0: available parallelism
  std::chrono::milliseconds ttl = std::chrono::hours(1);
  std::size_t max_comments = 100'000;
};

// In-memory KPA jobs. Jobs belong to the key that submitted them. Finished
// jobs are dropped `ttl` after they finish; idempotency keys live as long as
// their job.
class JobStore {
 public:
  using Runner = std::function<std::string(const nlohmann::json&)>;

  JobStore(JobStoreConfig config, Runner runner);
  ~JobStore();
  JobStore(const JobStore&) = delete;
  JobStore& operator=(const JobStore&) = delete;

  // Validated body in, job id out. Throws "job.too_large" beyond the comment
  // limit and "idempotency.conflict" when a key is reused with another body.
  std::string submit(const std::string& owner, const nlohmann::json& body,
                     const std::optional<std::string>& idempotency_key = std::nullopt);
  // Throws "job.unknown" for ids that do not exist (or belong to another key).
  JobView poll(const std::string& owner, const std::string& id);
  std::size_t size();

 private:
  struct Job {
    std::string owner;
    nlohmann::json body;
    JobView view;
    std::optional<std::chrono::steady_clock::time_point> finished;
    std::optional<std::string> idempotency_key;
  };

  void work(std::stop_token stop);
  void purge_locked();
  std::string new_id_locked();

  JobStoreConfig config_;
  Runner runner_;
  std::mutex mu_;
  std::condition_variable_any cv_;
  std::map<std::string, Job> jobs_;
  std::map<std::pair<std::string, std::string>, std::string> by_idempotency_key_;
  std::deque<std::string> queue_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_ = 0;
  std::vector<std::jthread> workers_;
};

struct Request {
  std::string method;  // "GET", "POST"
  std::string path;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
};

struct ServiceConfig {
  KeyStore keys;
  std::size_t max_body_bytes = 10 * 1024 * 1024;
  JobStoreConfig jobs;
  api::Context context;
};

// Reads DEBATER_KEYS_FILE (required) into a config with defaults otherwise.
// Throws "config.keys".
ServiceConfig config_from_environment();

class Service {
 public:
  explicit Service(ServiceConfig config);

  // Thread-safe. Routes under /v1/: GET /health (no key), POST /<endpoint>,
  // POST /kpa/jobs, GET /kpa/jobs/<id>.
  Response handle(const Request& request);

  const ServiceConfig& config() const { return config_; }

 private:
  Response dispatch(const Request& request, const std::string& owner);

  ServiceConfig config_;
  JobStore jobs_;
};

int status_for(const Error& e);
std::string error_body(const std::string& code, const std::string& message);

// HTTP/1.1 front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws "server.bind".
  int start(const std::string& host, int port);
  // Blocks until stop() or a signal-driven stop.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace debater::service
