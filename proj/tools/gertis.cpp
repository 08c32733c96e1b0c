// gertis: consultation command loop, or an HTTP consultation service with --serve.

#include <unistd.h>

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "gertis/consult_cli.hpp"
#include "gertis/consult_service.hpp"
#include "gertis/kb_language.hpp"

namespace {

gertis::HttpFrontend* g_frontend = nullptr;

void on_signal(int) {
  if (g_frontend) g_frontend->stop();
}

int serve(const gertis::CliOptions& opts, const std::string& address, int expiry_minutes) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "error: --serve expects ADDR:PORT\n";
    return 2;
  }
  std::string host = address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "error: bad port in '" << address << "'\n";
    return 2;
  }

  std::shared_ptr<const gertis::KnowledgeBase> kb;
  try {
    kb = gertis::load_knowledge_base(opts.kb_path);
  } catch (const gertis::ParseFailedError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << d.str() << '\n';
    return 1;
  } catch (const gertis::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  gertis::ServiceConfig config;
  config.settings = opts.settings;
  config.idle_expiry = std::chrono::minutes(expiry_minutes);
  gertis::ConsultService service(kb, config);
  gertis::HttpFrontend frontend(service);
  int bound = frontend.bind(host, port);
  if (bound < 0) {
    std::cerr << "error: cannot bind " << address << '\n';
    return 1;
  }
  std::cerr << "serving knowledge base '" << kb->id() << "' on " << host << ':' << bound << std::endl;
  g_frontend = &frontend;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  frontend.listen();
  g_frontend = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidential-reasoning consultation"};
  gertis::CliOptions opts;
  std::string evidence;
  std::string address;
  int expiry_minutes = 30;
  app.add_option("--kb", opts.kb_path, "Knowledge-base file")->required()->check(CLI::ExistingFile);
  app.add_option("--evidence", evidence, "Evidence file used when the diagnose prompt is left empty");
  app.add_option("--threshold", opts.settings.threshold, "Clause firing threshold")->check(CLI::Range(0.0, 1.0));
  app.add_option("--serve", address, "Serve HTTP on ADDR:PORT instead of the command loop");
  app.add_option("--session-expiry", expiry_minutes, "Idle session expiry in minutes (with --serve)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json", opts.json, "Machine-readable output");
  CLI11_PARSE(app, argc, argv);

  if (!evidence.empty()) opts.evidence_path = evidence;
  if (!address.empty()) return serve(opts, address, expiry_minutes);
  opts.echo = !isatty(STDIN_FILENO);
  return gertis::cli_loop(opts, std::cin, std::cout);
}
