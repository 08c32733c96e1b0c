#pragma once

// Explanations trace only the rules recorded in a hypothesis's
// triggered-b-rules slot, then defer to the superclass for the rest.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gertis/evidence_engine.hpp"

namespace gertis {

struct RuleContribution {
  std::string rule_id;
  std::vector<Observation> observations;
  double inferred_degree = 0.0;
  RoleEffect role_effect = RoleEffect::supportive;
};

struct ParentLink {
  std::string hypothesis;
  std::string text;
  BeliefInterval interval;
};

struct ExplanationNode {
  std::string hypothesis;
  std::string text;
  BeliefInterval interval;
  std::vector<RuleContribution> contributions;  // by inferred degree desc, then rule id
  std::optional<ParentLink> parent;
};

// Throws UnknownHypothesisError.
ExplanationNode explain(const WorkingMemory& wm, std::string_view hypothesis);

// Explanation of node.parent. Throws NoParentError at the root.
ExplanationNode expand(const WorkingMemory& wm, const ExplanationNode& node);

// Text in the consultation-dialogue layout, ending with the further-explanation
// prompt (no trailing newline) when the node has a parent.
std::string render_text(const ExplanationNode& node);

// "[0.560, 1.000]"
std::string format_interval(const BeliefInterval& iv);
std::string format_degree(double d);

}  // namespace gertis
