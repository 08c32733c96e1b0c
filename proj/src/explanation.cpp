#include "gertis/explanation.hpp"

#include <algorithm>
#include <cstdio>

namespace gertis {

namespace {

constexpr std::size_t kDegreeColumn = 41;

void render_observation(const Observation& o, std::size_t indent, std::vector<std::string>& lines) {
  std::string pad(indent, ' ');
  if (o.kind == Observation::Kind::condition) {
    lines.push_back(pad + o.text);
    lines.push_back(std::string(kDegreeColumn, ' ') + "with degree of belief = " + format_degree(o.degree) + ",");
    return;
  }
  lines.push_back(pad + "(" + o.text);
  for (const auto& child : o.children) render_observation(child, indent + 2, lines);
  lines.push_back(pad + ")");
}

}  // namespace

std::string format_degree(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", d);
  return buf;
}

std::string format_interval(const BeliefInterval& iv) {
  return "[" + format_degree(iv.bel) + ", " + format_degree(iv.pl) + "]";
}

ExplanationNode explain(const WorkingMemory& wm, std::string_view hypothesis) {
  const Hypothesis* h = wm.kb().find_hypothesis(hypothesis);
  if (!h) throw UnknownHypothesisError(std::string(hypothesis));
  ExplanationNode node;
  node.hypothesis = h->name;
  node.text = h->text;
  node.interval = hypothesis_interval(wm, h->name);
  for (const auto& t : wm.triggered_b_rules(h->name)) {
    node.contributions.push_back({t.rule_id, t.observations, t.total_mass(), t.effect});
  }
  std::stable_sort(node.contributions.begin(), node.contributions.end(),
                   [](const RuleContribution& a, const RuleContribution& b) {
                     if (a.inferred_degree != b.inferred_degree) return a.inferred_degree > b.inferred_degree;
                     return a.rule_id < b.rule_id;
                   });
  if (h->superclass) {
    const Hypothesis& parent = wm.kb().hypothesis(*h->superclass);
    node.parent = ParentLink{parent.name, parent.text, hypothesis_interval(wm, parent.name)};
  }
  return node;
}

ExplanationNode expand(const WorkingMemory& wm, const ExplanationNode& node) {
  if (!node.parent) throw NoParentError(node.hypothesis);
  return explain(wm, node.parent->hypothesis);
}

std::string render_text(const ExplanationNode& node) {
  std::string out = "The belief interval of " + node.text + " is " + format_interval(node.interval) + "\n";
  if (node.contributions.empty() && !node.parent) return out + "is based on no rules whose roles refer to it.\n";
  out += "is based on\n";

  std::vector<std::vector<std::string>> items;
  std::size_t number = 1;
  for (const auto& c : node.contributions) {
    std::vector<std::string> lines{"(" + std::to_string(number++) + ") " + c.rule_id + " and the observations that"};
    for (const auto& o : c.observations) render_observation(o, 4, lines);
    if (c.inferred_degree < 1.0 - 1e-12) {
      lines.push_back("    infers that the degree of belief in " + node.text + " is " + format_degree(c.inferred_degree) +
                      ",");
    } else if (lines.back().back() != ',') {
      lines.back() += ",";
    }
    items.push_back(std::move(lines));
  }
  if (node.parent) {
    items.push_back({"(" + std::to_string(number) + ") the belief interval of " + node.parent->text + " is " +
                     format_interval(node.parent->interval) + ","});
  }
  // The final line of the final item closes the sentence.
  std::string& last = items.back().back();
  last.back() = '.';

  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += "and\n";
    for (const auto& line : items[i]) out += line + "\n";
  }
  if (node.parent) out += "\nDo you want a further explanation of " + node.parent->text + "? (y or n)";
  return out;
}

}  // namespace gertis
