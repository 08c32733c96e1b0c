#include "gertis/consult_service.hpp"

#include <charconv>
#include <cstdio>

#include <httplib.h>

#include "gertis/json_io.hpp"

namespace gertis {

using nlohmann::json;

namespace {

Response error(int status, std::string message, json extra = json::object()) {
  extra["error"] = std::move(message);
  return {status, std::move(extra)};
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    auto slash = path.find('/');
    out.push_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash);
  }
  return out;
}

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int v = 0;
      auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      if (ec == std::errc() && p == s.data() + i + 3) {
        out += static_cast<char>(v);
        i += 2;
        continue;
      }
    }
    out += s[i] == '+' ? ' ' : s[i];
  }
  return out;
}

std::optional<std::string> query_param(std::string_view query, std::string_view key) {
  std::size_t start = 0;
  while (start <= query.size()) {
    std::size_t end = start;
    while (end < query.size() && query[end] != '&') ++end;
    std::string_view pair = query.substr(start, end - start);
    auto eq = pair.find('=');
    if (pair.substr(0, eq) == key) return eq == std::string_view::npos ? "" : url_decode(pair.substr(eq + 1));
    start = end + 1;
  }
  return std::nullopt;
}

json deltas(const WorkingMemory& before, const WorkingMemory& after) {
  json out = json::array();
  for (const auto& h : before.kb().hypotheses()) {
    BeliefInterval a = hypothesis_interval(before, h.name);
    BeliefInterval b = hypothesis_interval(after, h.name);
    out.push_back({{"hypothesis", h.name},
                   {"before", json_io::interval(a)},
                   {"after", json_io::interval(b)},
                   {"delta", {{"bel", b.bel - a.bel}, {"pl", b.pl - a.pl}}}});
  }
  return out;
}

json history_changes(const WorkingMemory& before, const WorkingMemory& after) {
  json out = json::array();
  for (const auto& c : diff_histories(before, after)) {
    const char* kind = c.kind == HistoryChange::Kind::added       ? "added"
                       : c.kind == HistoryChange::Kind::retracted ? "retracted"
                                                                  : "changed";
    out.push_back({{"frame", c.frame}, {"rule", c.rule_id}, {"kind", kind}});
  }
  return out;
}

}  // namespace

ConsultService::ConsultService(std::shared_ptr<const KnowledgeBase> kb, ServiceConfig config)
    : kb_(std::move(kb)), config_(std::move(config)), rng_(std::random_device{}()) {
  if (!kb_) throw Error("consultation service needs a knowledge base");
}

std::string ConsultService::new_session_id() {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

void ConsultService::purge_expired(ServiceConfig::Clock::time_point now) {
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_used > config_.idle_expiry) {
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<ConsultService::Session> ConsultService::find(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  auto now = config_.now();
  purge_expired(now);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return nullptr;
  it->second->last_used = now;
  return it->second;
}

std::size_t ConsultService::session_count() {
  std::lock_guard lock(mutex_);
  purge_expired(config_.now());
  return sessions_.size();
}

Response ConsultService::create_session(const json& body) {
  if (body.is_object() && body.contains("kb_id") && !body["kb_id"].is_null()) {
    if (!body["kb_id"].is_string() || body["kb_id"].get<std::string>() != kb_->id()) {
      return error(404, "unknown knowledge base", {{"kb_id", body["kb_id"]}});
    }
  }
  WorkingMemory wm = forward_chain(kb_, EvidenceMap{}, config_.settings);
  std::lock_guard lock(mutex_);
  auto now = config_.now();
  purge_expired(now);
  std::string id;
  do {
    id = new_session_id();
  } while (sessions_.contains(id));
  std::shared_ptr<Session> session(new Session{id, {}, std::move(wm), now, now});
  sessions_.emplace(id, session);
  return {201, {{"session_id", id}, {"kb_id", kb_->id()}}};
}

namespace {

// Evidence changes from a request body; a "replace" body also removes every
// current entry it does not mention.
std::variant<std::vector<EvidenceChange>, Response> read_changes(const KnowledgeBase& kb, const WorkingMemory& wm,
                                                                 const json& body) {
  if (!body.is_object() || !body.contains("entries")) {
    return error(422, "body must be an object with an 'entries' array", {{"errors", json::array()}});
  }
  json errors = json::array();
  auto changes = json_io::evidence_changes(body["entries"], errors);
  if (errors.empty()) {
    for (const auto& [index, message] : check_evidence(kb, changes)) errors.push_back({{"index", index}, {"message", message}});
  }
  if (!errors.empty()) return error(422, "invalid evidence", {{"errors", std::move(errors)}});
  if (body.value("replace", false)) {
    std::vector<EvidenceChange> full;
    for (const auto& [key, degree] : wm.evidence()) full.push_back({key.first, key.second, std::nullopt});
    full.insert(full.end(), changes.begin(), changes.end());
    changes = std::move(full);
  }
  return changes;
}

template <typename F>
Response guarded(F&& f) {
  try {
    return f();
  } catch (const TotalConflictError& e) {
    return error(409, e.what(), {{"rule", e.rule()}});
  } catch (const UnknownHypothesisError& e) {
    return error(404, e.what());
  } catch (const NoParentError& e) {
    return error(404, e.what());
  } catch (const CycleError& e) {
    return error(500, e.what(), {{"cycle", e.cycle()}});
  } catch (const Error& e) {
    return error(422, e.what());
  }
}

}  // namespace

Response ConsultService::put_evidence(const std::string& session_id, const json& body) {
  auto session = find(session_id);
  if (!session) return error(404, "unknown session", {{"session_id", session_id}});
  std::lock_guard lock(session->mutex);
  return guarded([&]() -> Response {
    auto changes = read_changes(*kb_, session->wm, body);
    if (auto* r = std::get_if<Response>(&changes)) return *r;
    session->wm = update_evidence(session->wm, std::get<std::vector<EvidenceChange>>(changes));
    return {200, {{"diagnoses", json_io::diagnoses(session->wm)}}};
  });
}

Response ConsultService::get_diagnoses(const std::string& session_id) {
  auto session = find(session_id);
  if (!session) return error(404, "unknown session", {{"session_id", session_id}});
  std::lock_guard lock(session->mutex);
  return guarded([&]() -> Response { return {200, {{"diagnoses", json_io::diagnoses(session->wm)}}}; });
}

Response ConsultService::get_explanation(const std::string& session_id, const std::string& hypothesis, int depth) {
  auto session = find(session_id);
  if (!session) return error(404, "unknown session", {{"session_id", session_id}});
  if (!kb_->find_hypothesis(hypothesis)) return error(404, "unknown hypothesis", {{"hypothesis", hypothesis}});
  if (depth < 0) return error(422, "depth must be nonnegative");
  std::lock_guard lock(session->mutex);
  return guarded([&]() -> Response { return {200, json_io::explanation_chain(session->wm, hypothesis, depth)}; });
}

Response ConsultService::whatif(const std::string& session_id, const json& body) {
  auto session = find(session_id);
  if (!session) return error(404, "unknown session", {{"session_id", session_id}});
  std::lock_guard lock(session->mutex);
  return guarded([&]() -> Response {
    auto changes = read_changes(*kb_, session->wm, body);
    if (auto* r = std::get_if<Response>(&changes)) return *r;
    WorkingMemory tentative = update_evidence(session->wm, std::get<std::vector<EvidenceChange>>(changes));
    return {200,
            {{"diagnoses", json_io::diagnoses(tentative)},
             {"deltas", deltas(session->wm, tentative)},
             {"history_changes", history_changes(session->wm, tentative)}}};
  });
}

Response ConsultService::kb_frames() const { return {200, {{"frames", json_io::frames(*kb_)}}}; }

Response ConsultService::kb_hypotheses() const { return {200, {{"hypotheses", json_io::hypotheses(*kb_)}}}; }

Response ConsultService::kb_rule(const std::string& rule_id) const {
  const Rule* r = kb_->find_rule(rule_id);
  if (!r) return error(404, "unknown rule", {{"rule", rule_id}});
  return {200, json_io::rule(*kb_, *r)};
}

Response ConsultService::handle(std::string_view method, std::string_view target, std::string_view body) {
  std::string_view path = target;
  std::string_view query;
  if (auto q = target.find('?'); q != std::string_view::npos) {
    path = target.substr(0, q);
    query = target.substr(q + 1);
  }
  auto parts = split_path(path);
  json payload = json::object();
  if (!body.empty()) {
    payload = json::parse(body, nullptr, false);
    if (payload.is_discarded()) return error(400, "malformed JSON body");
  }
  auto is = [&](std::initializer_list<std::string_view> shape) {
    if (parts.size() != shape.size()) return false;
    std::size_t i = 0;
    for (auto s : shape) {
      if (s != "*" && parts[i] != s) return false;
      ++i;
    }
    return true;
  };

  if (method == "POST" && is({"sessions"})) return create_session(payload);
  if (method == "PUT" && is({"sessions", "*", "evidence"})) return put_evidence(url_decode(parts[1]), payload);
  if (method == "GET" && is({"sessions", "*", "diagnoses"})) return get_diagnoses(url_decode(parts[1]));
  if (method == "GET" && is({"sessions", "*", "explanations", "*"})) {
    int depth = 0;
    if (auto d = query_param(query, "depth")) {
      auto [p, ec] = std::from_chars(d->data(), d->data() + d->size(), depth);
      if (ec != std::errc() || p != d->data() + d->size()) return error(422, "depth must be an integer");
    }
    return get_explanation(url_decode(parts[1]), url_decode(parts[3]), depth);
  }
  if (method == "POST" && is({"sessions", "*", "whatif"})) return whatif(url_decode(parts[1]), payload);
  if (method == "GET" && is({"kb", "frames"})) return kb_frames();
  if (method == "GET" && is({"kb", "hypotheses"})) return kb_hypotheses();
  if (method == "GET" && is({"kb", "rules", "*"})) return kb_rule(url_decode(parts[2]));
  return error(404, "no such endpoint", {{"method", std::string(method)}, {"path", std::string(path)}});
}

// ---------------------------------------------------------------------------

struct HttpFrontend::Impl {
  explicit Impl(ConsultService& s) : service(s) {}
  ConsultService& service;
  httplib::Server server;
};

HttpFrontend::HttpFrontend(ConsultService& service) : impl_(std::make_unique<Impl>(service)) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::string target = req.path;
    if (!req.params.empty()) {
      std::string query;
      for (const auto& [k, v] : req.params) query += (query.empty() ? "" : "&") + k + "=" + v;
      target += "?" + query;
    }
    Response r = impl_->service.handle(req.method, target, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto& s = impl_->server;
  s.Get(R"(/.*)", route);
  s.Post(R"(/.*)", route);
  s.Put(R"(/.*)", route);
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::listen() { return impl_->server.listen_after_bind(); }

void HttpFrontend::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpFrontend::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace gertis
