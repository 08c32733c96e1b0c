#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gertis/consult_cli.hpp"
#include "gertis/consult_service.hpp"
#include "support/fixtures.hpp"

using namespace gertis;

namespace {

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& script, CliOptions opts = {}) {
  if (opts.kb_path.empty()) opts.kb_path = fixtures::path("data/polyarthritis.gkb");
  opts.echo = true;
  std::istringstream in(script);
  std::ostringstream out;
  int status = cli_loop(opts, in, out);
  return {status, out.str()};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("scripted consultation reproduces the committed transcript") {
  Run r = run(read_file(fixtures::path("tests/golden/consult.script")));
  CHECK(r.status == 0);
  CHECK(r.out == read_file(fixtures::path("tests/golden/consult.transcript")));
  CHECK(run(read_file(fixtures::path("tests/golden/consult.script"))).out == r.out);
}

TEST_CASE("commands and errors") {
  Run quit = run("quit\n");
  CHECK(quit.status == 0);
  CHECK(quit.out == "Command ? quit\n");

  Run eof = run("");
  CHECK(eof.status == 0);

  Run early = run("why\nfrobnicate\nquit\n");
  CHECK(contains(early.out, "Run diagnose first."));
  CHECK(contains(early.out, "Unknown command 'frobnicate'"));

  Run missing = run("diagnose\nno-such-file\nquit\n");
  CHECK(missing.status == 0);
  CHECK(contains(missing.out, "error: cannot open 'no-such-file'"));
  CHECK(contains(missing.out, "Command ? quit"));

  Run bad_number = run("diagnose\nE4\nwhy\n7\nquit\n");
  CHECK(contains(bad_number.out, "'7' is not a diagnosis number."));

  CliOptions missing_kb;
  missing_kb.kb_path = fixtures::path("tests/data/malformed/06_min_count.gkb");
  Run broken = run("quit\n", missing_kb);
  CHECK(broken.status == 1);
  CHECK(contains(broken.out, "06_min_count.gkb:6:12: count 3 out of range"));
}

TEST_CASE("evidence diagnostics carry spans and the loop continues") {
  auto dir = std::filesystem::temp_directory_path() / "gertis-cli-test";
  std::filesystem::create_directories(dir);
  auto file = dir / "bad.gev";
  std::ofstream(file) << "RE000042 negative\nRE000011 present 4\n";
  Run r = run("diagnose\n" + file.string() + "\nquit\n");
  CHECK(contains(r.out, file.string() + ":2:18: degree out of range"));

  std::ofstream(file) << "RE000042 maybe\n";
  Run unknown = run("diagnose\n" + file.string() + "\nquit\n");
  CHECK(contains(unknown.out, "error: "));
  CHECK(contains(unknown.out, "maybe"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty answer uses the preloaded evidence") {
  CliOptions opts;
  opts.evidence_path = fixtures::path("data/E4");
  Run r = run("diagnose\n\nquit\n", opts);
  CHECK(contains(r.out, "seronegative rheumatoid arthritis                    [0.560, 1.000]\n"));
}

TEST_CASE("threshold reaches the engine") {
  CliOptions opts;
  opts.settings.threshold = 0.75;
  Run r = run("diagnose\nE4\nquit\n", opts);
  // Rule4's antecedent (0.7) no longer clears the threshold.
  CHECK_FALSE(contains(r.out, "rheumatoid arthritis"));
  CHECK(contains(r.out, "Belief Intervals\n" + std::string(70, '-') + "\n\nCommand ? quit"));
}

TEST_CASE("json output agrees with the service") {
  CliOptions opts;
  opts.json = true;
  Run r = run("diagnose\nE4\nquit\n", opts);
  auto start = r.out.find('{');
  auto end = r.out.find("\nCommand ? quit");
  REQUIRE(start != std::string::npos);
  nlohmann::json cli = nlohmann::json::parse(r.out.substr(start, end - start));

  ConsultService service(fixtures::sample_kb());
  std::string id = service.create_session(nlohmann::json::object()).body["session_id"];
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : fixtures::evidence_file("data/E4").entries) {
    entries.push_back({{"frame", e.frame}, {"element", e.element}, {"degree", e.degree}});
  }
  CHECK(service.put_evidence(id, {{"entries", entries}}).body["diagnoses"] == cli["diagnoses"]);
}
