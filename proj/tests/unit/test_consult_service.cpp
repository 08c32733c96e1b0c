#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "gertis/consult_service.hpp"
#include "support/fixtures.hpp"

using namespace gertis;
using nlohmann::json;

namespace {

json e4_entries() {
  json entries = json::array();
  for (const auto& e : fixtures::evidence_file("data/E4").entries) {
    entries.push_back({{"frame", e.frame}, {"element", e.element}, {"degree", e.degree}});
  }
  return entries;
}

std::string start(ConsultService& s) {
  Response r = s.create_session(json::object());
  REQUIRE(r.status == 201);
  return r.body["session_id"].get<std::string>();
}

const json* row(const json& diagnoses, const std::string& id) {
  for (const auto& r : diagnoses) {
    if (r["hypothesis"] == id) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("evidence, diagnoses and explanations") {
  ConsultService s(fixtures::sample_kb());
  std::string id = start(s);
  CHECK(id.size() == 32);
  CHECK(s.get_diagnoses(id).body["diagnoses"].empty());

  Response put = s.put_evidence(id, {{"entries", e4_entries()}});
  REQUIRE(put.status == 200);
  const json& rows = put.body["diagnoses"];
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["hypothesis"] == "Ne");
  CHECK(rows[0]["bel"].get<double>() == doctest::Approx(0.56));
  CHECK(rows[0]["pl"].get<double>() == 1.0);
  CHECK(s.get_diagnoses(id).body["diagnoses"] == rows);

  Response ex = s.get_explanation(id, "Ne", 1);
  REQUIRE(ex.status == 200);
  CHECK(ex.body["contributions"].size() == 1);
  CHECK(ex.body["contributions"][0]["rule"] == "Rule1");
  CHECK(ex.body["contributions"][0]["role_effect"] == "supportive");
  CHECK(ex.body["parent"]["hypothesis"] == "Rh");
  CHECK(ex.body["parent_node"]["hypothesis"] == "Rh");
  CHECK(ex.body["parent_node"]["contributions"][0]["rule"] == "Rule4");
  CHECK_FALSE(ex.body["parent_node"].contains("parent_node"));
  CHECK(s.get_explanation(id, "Ne", 5).body["parent_node"]["parent_node"]["hypothesis"] == "PA");
  CHECK(s.get_explanation(id, "Ne", 0).body.contains("parent_node") == false);
}

TEST_CASE("single-rule fixture") {
  ConsultService s(load_knowledge_base(fixtures::path("tests/data/r1.gkb")));
  std::string id = start(s);
  Response put = s.put_evidence(id, {{"entries", json::array({{{"frame", "RE000042"}, {"element", "negative"}}})}});
  REQUIRE(put.status == 200);
  // All of the rule's mass sits on "Ne or not Rh", which is not inside Ne.
  CHECK(row(put.body["diagnoses"], "Ne") == nullptr);
  Response ex = s.get_explanation(id, "Ne", 0);
  CHECK(ex.body["interval"] == json{{"bel", 0.0}, {"pl", 1.0}});
  REQUIRE(ex.body["contributions"].size() == 1);
  CHECK(ex.body["contributions"][0]["inferred_degree"] == 1.0);
}

TEST_CASE("error statuses") {
  ConsultService s(fixtures::sample_kb());
  std::string id = start(s);
  CHECK(s.create_session({{"kb_id", "other"}}).status == 404);
  CHECK(s.create_session({{"kb_id", "polyarthritis"}}).status == 201);
  CHECK(s.put_evidence("nope", {{"entries", json::array()}}).status == 404);
  CHECK(s.get_diagnoses("nope").status == 404);
  CHECK(s.get_explanation(id, "Nope", 0).status == 404);
  CHECK(s.get_explanation(id, "Ne", -1).status == 422);
  CHECK(s.kb_rule("Nope").status == 404);

  Response bad = s.put_evidence(id, {{"entries", json::array({{{"frame", "RE000042"}, {"element", "negative"}},
                                                              {{"frame", "XX"}, {"element", "present"}},
                                                              {{"frame", "RE000011"}, {"element", "present"}, {"degree", 2}},
                                                              {{"frame", 3}}})}});
  REQUIRE(bad.status == 422);
  REQUIRE(bad.body["errors"].size() == 1);
  CHECK(bad.body["errors"][0]["index"] == 3);
  Response bad2 = s.put_evidence(id, {{"entries", json::array({{{"frame", "XX"}, {"element", "present"}},
                                                               {{"frame", "RE000011"}, {"element", "present"}, {"degree", 2}}})}});
  REQUIRE(bad2.status == 422);
  REQUIRE(bad2.body["errors"].size() == 2);
  CHECK(bad2.body["errors"][0]["index"] == 0);
  CHECK(bad2.body["errors"][1]["index"] == 1);
  CHECK(s.get_diagnoses(id).body["diagnoses"].empty());

  Response conflict = s.put_evidence(id, {{"entries", json::array({{{"frame", "RE000007"}, {"element", "present"}},
                                                                   {{"frame", "RE000007"}, {"element", "absent"}}})}});
  CHECK(conflict.status == 409);
  CHECK(conflict.body["rule"] == "evidence:RE000007");

  CHECK(s.handle("PUT", "/sessions/" + id + "/evidence", "{not json").status == 400);
  CHECK(s.handle("GET", "/nowhere", "").status == 404);
  CHECK(s.handle("DELETE", "/sessions/" + id + "/diagnoses", "").status == 404);
}

TEST_CASE("rule conflict reports the rule id") {
  auto kb = knowledge_base_from_text(
      "frame S \"s\" { elements: present, absent; }\nframe D \"d\" { elements: a, b; }\n"
      "rule R1 { consequent: D; if: (S); then: a : 1.0; }\nrule R2 { consequent: D; if: (S); then: b : 1.0; }\n",
      "c");
  ConsultService s(kb);
  std::string id = start(s);
  Response r = s.put_evidence(id, {{"entries", json::array({{{"frame", "S"}, {"element", "present"}}})}});
  CHECK(r.status == 409);
  CHECK(r.body["rule"] == "R2");
}

TEST_CASE("whatif never mutates the session") {
  ConsultService s(fixtures::sample_kb());
  std::string id = start(s);
  s.put_evidence(id, {{"entries", e4_entries()}});
  json before = s.get_diagnoses(id).body;

  Response same = s.whatif(id, {{"entries", e4_entries()}});
  REQUIRE(same.status == 200);
  for (const auto& d : same.body["deltas"]) {
    CHECK(d["delta"]["bel"] == 0.0);
    CHECK(d["delta"]["pl"] == 0.0);
  }
  CHECK(same.body["history_changes"].empty());

  Response drop = s.whatif(id, {{"entries", json::array({{{"frame", "RE000042"}, {"element", "negative"}, {"degree", nullptr}}})}});
  REQUIRE(drop.status == 200);
  CHECK(row(drop.body["diagnoses"], "Ne") == nullptr);
  REQUIRE(drop.body["history_changes"].size() == 1);
  CHECK(drop.body["history_changes"][0] == json{{"frame", "PA"}, {"rule", "Rule1"}, {"kind", "retracted"}});

  Response wipe = s.whatif(id, {{"entries", json::array()}, {"replace", true}});
  REQUIRE(wipe.status == 200);
  CHECK(wipe.body["diagnoses"].empty());
  CHECK(s.whatif(id, {{"entries", json::array({{{"frame", "Q"}, {"element", "x"}}})}}).status == 422);

  CHECK(s.get_diagnoses(id).body == before);

  // Committing the tentative entries gives the predicted diagnoses.
  Response commit = s.put_evidence(id, {{"entries", json::array({{{"frame", "RE000042"}, {"element", "negative"}, {"degree", nullptr}}})}});
  CHECK(commit.body["diagnoses"] == drop.body["diagnoses"]);
}

TEST_CASE("knowledge-base endpoints") {
  ConsultService s(fixtures::sample_kb());
  json frames = s.handle("GET", "/kb/frames", "").body["frames"];
  CHECK(frames[0]["id"] == "PA");
  CHECK(frames[0]["elements"].size() == 19);
  json hyps = s.handle("GET", "/kb/hypotheses", "").body["hypotheses"];
  bool found = false;
  for (const auto& h : hyps) {
    if (h["id"] == "Ne") {
      found = true;
      CHECK(h["members"]["code"] == 240);
      CHECK(h["superclass"] == "Rh");
      CHECK(h["b_rules"] == json::array({"Rule1"}));
    }
  }
  CHECK(found);
  Response rule = s.handle("GET", "/kb/rules/Rule1", "");
  REQUIRE(rule.status == 200);
  CHECK(rule.body["then"][0]["code"] == 522480);
  CHECK(rule.body["if"] == json{{"op", "atom"}, {"frame", "RE000042"}, {"value", "negative"}});
  CHECK(s.handle("GET", "/kb/rules/Rule4", "").body["if"]["count"] == 5);
}

TEST_CASE("routing through handle") {
  ConsultService s(fixtures::sample_kb());
  Response created = s.handle("POST", "/sessions", "");
  REQUIRE(created.status == 201);
  std::string id = created.body["session_id"];
  json body{{"entries", e4_entries()}};
  CHECK(s.handle("PUT", "/sessions/" + id + "/evidence", body.dump()).status == 200);
  CHECK(s.handle("GET", "/sessions/" + id + "/diagnoses", "").body["diagnoses"].size() == 2);
  Response ex = s.handle("GET", "/sessions/" + id + "/explanations/Ne?depth=1", "");
  CHECK(ex.body["parent_node"]["hypothesis"] == "Rh");
  CHECK(s.handle("GET", "/sessions/" + id + "/explanations/Ne?depth=x", "").status == 422);
  CHECK(s.handle("POST", "/sessions/" + id + "/whatif", body.dump()).status == 200);
}

TEST_CASE("idle sessions expire") {
  auto now = ServiceConfig::Clock::now();
  ServiceConfig config;
  config.idle_expiry = std::chrono::minutes(30);
  config.now = [&] { return now; };
  ConsultService s(fixtures::sample_kb(), config);
  std::string a = start(s);
  now += std::chrono::minutes(20);
  std::string b = start(s);
  CHECK(s.get_diagnoses(a).status == 200);
  now += std::chrono::minutes(25);
  CHECK(s.session_count() == 2);
  now += std::chrono::minutes(6);
  CHECK(s.get_diagnoses(b).status == 404);
  CHECK(s.get_diagnoses(a).status == 404);
  CHECK(s.session_count() == 0);
}

TEST_CASE("concurrent sessions") {
  ConsultService s(fixtures::sample_kb());
  std::vector<std::string> ids;
  for (int i = 0; i < 8; ++i) ids.push_back(start(s));
  std::vector<int> failures(ids.size(), 0);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    threads.emplace_back([&, i] {
      for (int round = 0; round < 20; ++round) {
        double d = (round % 5) / 4.0;
        json entries = json::array({{{"frame", "RE000042"}, {"element", "negative"}, {"degree", d}}});
        if (s.put_evidence(ids[i], {{"entries", entries}}).status != 200) ++failures[i];
        if (s.whatif(ids[i], {{"entries", e4_entries()}}).status != 200) ++failures[i];
        if (s.get_explanation(ids[i], "Ne", 2).status != 200) ++failures[i];
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int f : failures) CHECK(f == 0);
}

TEST_CASE("HTTP round trip") {
  ConsultService s(fixtures::sample_kb());
  HttpFrontend http(s);
  int port = http.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread server([&] { http.listen(); });
  http.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);

  auto created = client.Post("/sessions", "{}", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  std::string id = json::parse(created->body)["session_id"];

  auto put = client.Put("/sessions/" + id + "/evidence", json{{"entries", e4_entries()}}.dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(json::parse(put->body)["diagnoses"][0]["hypothesis"] == "Ne");

  auto ex = client.Get("/sessions/" + id + "/explanations/Ne?depth=1");
  REQUIRE(ex);
  CHECK(ex->get_header_value("Content-Type") == "application/json");
  CHECK(json::parse(ex->body)["parent_node"]["hypothesis"] == "Rh");

  auto missing = client.Get("/sessions/nope/diagnoses");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  http.stop();
  server.join();
}
