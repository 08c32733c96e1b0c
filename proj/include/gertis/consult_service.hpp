#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "gertis/evidence_engine.hpp"

namespace gertis {

struct ServiceConfig {
  using Clock = std::chrono::steady_clock;

  EngineSettings settings;
  std::chrono::seconds idle_expiry{30 * 60};
  std::function<Clock::time_point()> now = [] { return Clock::now(); };
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Consultation sessions over one shared knowledge base. Thread-safe: the
// session table is locked briefly per request and each session serializes
// its own operations.
class ConsultService {
 public:
  explicit ConsultService(std::shared_ptr<const KnowledgeBase> kb, ServiceConfig config = {});

  Response create_session(const nlohmann::json& body);
  Response put_evidence(const std::string& session_id, const nlohmann::json& body);
  Response get_diagnoses(const std::string& session_id);
  Response get_explanation(const std::string& session_id, const std::string& hypothesis, int depth);
  Response whatif(const std::string& session_id, const nlohmann::json& body);
  Response kb_frames() const;
  Response kb_hypotheses() const;
  Response kb_rule(const std::string& rule_id) const;

  // Dispatches METHOD + path (with optional "?query") + raw JSON body to the
  // operations above.
  Response handle(std::string_view method, std::string_view target, std::string_view body);

  std::size_t session_count();
  const KnowledgeBase& kb() const noexcept { return *kb_; }

 private:
  struct Session {
    std::string id;
    std::mutex mutex;
    WorkingMemory wm;
    ServiceConfig::Clock::time_point created;
    ServiceConfig::Clock::time_point last_used;
  };

  std::shared_ptr<Session> find(const std::string& session_id);
  void purge_expired(ServiceConfig::Clock::time_point now);
  std::string new_session_id();

  std::shared_ptr<const KnowledgeBase> kb_;
  ServiceConfig config_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
};

// HTTP binding of ConsultService.
class HttpFrontend {
 public:
  explicit HttpFrontend(ConsultService& service);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Returns the bound port, or -1 on failure. Port 0 picks a free port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  // Blocks until a concurrent listen() accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gertis
