#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gertis/kb_ast.hpp"

namespace gertis {

inline constexpr std::string_view kKbHeader = "gertis-kb";
inline constexpr int kKbVersion = 1;

template <typename T>
struct ParseResult {
  T value;
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return diagnostics.empty(); }
};

// Parses a .gkb document. Recovers at declaration boundaries so a single call
// reports every independent error. Deterministic for identical input.
ParseResult<Declarations> parse_kb(std::string_view text, std::string_view file = "<input>");

// Parses a .gev document: one "frame element [degree]" entry per line.
ParseResult<EvidenceAssignment> parse_evidence(std::string_view text,
                                               std::string_view file = "<input>");

// Canonical text for declarations; parse_kb(serialize_kb(d)).value == d.
std::string serialize_kb(const Declarations& decls);

std::string serialize_evidence(const EvidenceAssignment& evidence);

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

// Reads a whole file. Throws gertis::Error when the file cannot be opened.
std::string read_file(const std::string& path);

}  // namespace gertis
