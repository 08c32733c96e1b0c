#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "gertis/evidence_engine.hpp"

namespace gertis {

struct CliOptions {
  std::string kb_path;
  std::optional<std::string> evidence_path;  // default answer of the diagnose prompt
  EngineSettings settings;
  bool json = false;
  // Copy each answer to the output, so piped sessions read like a terminal.
  bool echo = false;
};

// Command loop over diagnose / why / quit. Returns the process exit status.
int cli_loop(const CliOptions& options, std::istream& in, std::ostream& out);

}  // namespace gertis
