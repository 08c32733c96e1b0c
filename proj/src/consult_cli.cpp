#include "gertis/consult_cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <istream>
#include <ostream>

#include "gertis/explanation.hpp"
#include "gertis/json_io.hpp"
#include "gertis/kb_language.hpp"

namespace gertis {

namespace {

constexpr std::size_t kRuleWidth = 70;
constexpr std::size_t kTextColumn = 53;
constexpr const char* kDefaultEvidence = "Evidence";

std::string padded(const std::string& text) {
  if (text.size() >= kTextColumn) return text + " ";
  return text + std::string(kTextColumn - text.size(), ' ');
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

class Consultation {
 public:
  Consultation(const CliOptions& options, std::istream& in, std::ostream& out)
      : options_(options), in_(in), out_(out) {}

  int run() {
    try {
      kb_ = load_knowledge_base(options_.kb_path);
    } catch (const ParseFailedError& e) {
      for (const auto& d : e.diagnostics()) out_ << d.str() << '\n';
      return 1;
    } catch (const Error& e) {
      out_ << "error: " << e.what() << '\n';
      return 1;
    }

    while (true) {
      auto command = ask("Command ? ");
      if (!command) return 0;
      std::string c = trim(*command);
      try {
        if (c == "quit") return 0;
        if (c == "diagnose") {
          diagnose();
        } else if (c == "why") {
          why();
        } else if (!c.empty()) {
          out_ << "Unknown command '" << c << "'. Commands are diagnose, why and quit.\n";
        }
      } catch (const ParseFailedError& e) {
        for (const auto& d : e.diagnostics()) out_ << d.str() << '\n';
      } catch (const Error& e) {
        out_ << "error: " << e.what() << '\n';
      }
      if (in_.eof()) return 0;
    }
  }

 private:
  std::optional<std::string> ask(std::string_view prompt) {
    out_ << prompt << std::flush;
    std::string line;
    if (!std::getline(in_, line)) {
      out_ << '\n';
      return std::nullopt;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (options_.echo) out_ << line << '\n';
    return line;
  }

  std::string resolve(const std::string& answer) const {
    namespace fs = std::filesystem;
    std::string name = answer.empty() ? options_.evidence_path.value_or(kDefaultEvidence) : answer;
    fs::path p(name);
    if (p.is_relative() && !fs::exists(p)) {
      fs::path alt = fs::path(options_.kb_path).parent_path() / p;
      if (fs::exists(alt)) return alt.string();
    }
    return name;
  }

  void diagnose() {
    auto answer = ask("Type the file name of patient symptoms (default file is Evidence) : ");
    if (!answer) return;
    std::string path = resolve(trim(*answer));
    auto parsed = parse_evidence(read_file(path), path);
    if (!parsed.ok()) throw ParseFailedError(parsed.diagnostics);
    wm_ = forward_chain(kb_, parsed.value, options_.settings);
    rows_.clear();
    for (const auto& f : kb_->frames()) {
      if (f.hierarchy.empty()) continue;
      for (auto& r : rank_diagnoses(*wm_, f.id)) rows_.push_back(std::move(r));
    }
    if (options_.json) {
      out_ << nlohmann::json{{"diagnoses", json_io::diagnoses(*wm_)}}.dump(2) << '\n';
      return;
    }
    std::string rule(kRuleWidth, '-');
    out_ << rule << '\n' << padded("Diagnostic Hypotheses") << "Belief Intervals\n" << rule << '\n';
    for (const auto& r : rows_) out_ << padded(r.text) << format_interval(r.interval) << '\n';
    out_ << '\n';
  }

  void why() {
    if (!wm_) {
      out_ << "No consultation yet. Run diagnose first.\n";
      return;
    }
    if (rows_.empty()) {
      out_ << "No diagnosis has positive belief.\n";
      return;
    }
    out_ << "Number          Diagnosis\n" << std::string(kRuleWidth, '-') << '\n';
    for (std::size_t i = 0; i < rows_.size(); ++i) out_ << i << " => " << rows_[i].text << '\n';
    auto answer = ask("Type the number of the diagnosis to be explained : ");
    if (!answer) return;
    std::string a = trim(*answer);
    std::size_t choice = 0;
    auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), choice);
    if (a.empty() || ec != std::errc() || p != a.data() + a.size() || choice >= rows_.size()) {
      out_ << "'" << a << "' is not a diagnosis number.\n";
      return;
    }

    ExplanationNode node = explain(*wm_, rows_[choice].id);
    while (true) {
      out_ << '\n';
      if (options_.json) {
        out_ << json_io::explanation(node).dump(2) << '\n';
        if (!node.parent) return;
        out_ << "Do you want a further explanation of " << node.parent->text << "? (y or n)";
      } else {
        out_ << render_text(node);
        if (!node.parent) return;
      }
      if (!yes()) return;
      node = expand(*wm_, node);
    }
  }

  // Reads the y/n answer typed after the further-explanation prompt.
  bool yes() {
    std::string line;
    if (!std::getline(in_, line)) {
      out_ << '\n';
      return false;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (options_.echo) out_ << line << '\n';
    std::string a = trim(line);
    return a == "y" || a == "Y" || a == "yes";
  }

  const CliOptions& options_;
  std::istream& in_;
  std::ostream& out_;
  std::shared_ptr<const KnowledgeBase> kb_;
  std::optional<WorkingMemory> wm_;
  std::vector<RankedHypothesis> rows_;
};

}  // namespace

int cli_loop(const CliOptions& options, std::istream& in, std::ostream& out) {
  return Consultation(options, in, out).run();
}

}  // namespace gertis
