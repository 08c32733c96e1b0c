#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <cmath>

#include "gertis/evidence_engine.hpp"
#include "gertis/kb_language.hpp"
#include "gertis/knowledge_model.hpp"

namespace fixtures {

inline std::string path(const std::string& relative) { return std::string(GERTIS_SOURCE_DIR) + "/" + relative; }

inline std::shared_ptr<const gertis::KnowledgeBase> sample_kb() {
  return gertis::load_knowledge_base(path("data/polyarthritis.gkb"));
}

inline gertis::EvidenceAssignment evidence_file(const std::string& relative) {
  auto parsed = gertis::parse_evidence(gertis::read_file(path(relative)), relative);
  if (!parsed.ok()) throw gertis::ParseFailedError(parsed.diagnostics);
  return parsed.value;
}

struct MalformedCase {
  std::string file;
  int line = 0;
  int column = 0;
  std::string fragment;
};

inline std::vector<MalformedCase> malformed_cases() {
  std::ifstream in(path("tests/data/malformed/expected.txt"));
  std::vector<MalformedCase> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    MalformedCase c;
    ss >> c.file >> c.line >> c.column;
    std::getline(ss >> std::ws, c.fragment);
    out.push_back(std::move(c));
  }
  return out;
}

// Ten rules conclude on D; only R3 and R8 name H in a role.
inline std::string filtering_kb() {
  std::string text =
      "frame D \"disease\" { elements: h1, h2, g1, g2; }\n"
      "frame S \"sign\" { elements: present, absent; }\n"
      "hypothesis All \"any disease\" in D = (or H G);\n"
      "hypothesis H \"disease h\" in D = (or h1 h2) parent All;\n"
      "hypothesis G \"disease g\" in D = (or g1 g2) parent All;\n";
  for (int i = 1; i <= 10; ++i) {
    std::string id = "R" + std::to_string(i);
    std::string role = (i == 3 || i == 8) ? "supportive H" : (i % 2 ? "supportive G" : "nil");
    std::string target = i % 3 == 0 ? "H" : (i % 3 == 1 ? "G" : "(or h1 g1)");
    if (i == 3 || i == 8) target = "(or h1 h2)";
    text += "rule " + id + " { consequent: D; if: (S); then: " + target + " : 0.0" + std::to_string(i) +
            "; t-role: " + role + "; }\n";
  }
  return text;
}

// Empty when the two memories agree: codes exactly, masses within 1e-12.
inline std::string memory_difference(const gertis::WorkingMemory& got, const gertis::WorkingMemory& want) {
  const gertis::KnowledgeBase& kb = want.kb();
  if (got.evidence() != want.evidence()) return "evidence differs";
  for (const auto& f : kb.frames()) {
    const gertis::FrameState& a = got.frame_state(f.id);
    const gertis::FrameState& b = want.frame_state(f.id);
    if (a.defined != b.defined) return f.id + ": defined flag differs";
    const auto& ma = a.bpa.masses();
    const auto& mb = b.bpa.masses();
    if (ma.size() != mb.size()) return f.id + ": focal element count differs";
    for (auto ia = ma.begin(), ib = mb.begin(); ia != ma.end(); ++ia, ++ib) {
      if (ia->first.code() != ib->first.code()) return f.id + ": focal code differs";
      if (std::fabs(ia->second - ib->second) > 1e-12) return f.id + ": mass differs";
    }
    if (a.history.size() != b.history.size()) return f.id + ": history length differs";
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      if (a.history[i].rule_id != b.history[i].rule_id || a.history[i].clause != b.history[i].clause) {
        return f.id + ": history differs";
      }
    }
  }
  for (const auto& h : kb.hypotheses()) {
    const auto& a = got.triggered_b_rules(h.name);
    const auto& b = want.triggered_b_rules(h.name);
    if (a.size() != b.size()) return h.name + ": triggered rules differ";
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].rule_id != b[i].rule_id || std::fabs(a[i].total_mass() - b[i].total_mass()) > 1e-12) {
        return h.name + ": triggered rule entry differs";
      }
    }
  }
  return "";
}

}  // namespace fixtures
