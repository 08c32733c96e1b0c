#pragma once

// JSON wire format shared by the HTTP service and the CLI --json mode.
// Focal sets are written as {"code": <decimal>, "members": [names...]}; the
// code is a JSON number when it fits in 64 bits and a decimal string otherwise.

#include <json.hpp>

#include "gertis/evidence_engine.hpp"
#include "gertis/explanation.hpp"

namespace gertis::json_io {

using nlohmann::json;

json focal_set(const FocalSet& set, const FrameSignature& frame);
json interval(const BeliefInterval& iv);
json bpa(const Bpa& m, const FrameSignature& frame);
json antecedent(const AntecedentExpr& e);
json observation(const Observation& o);

// Ranked rows for every frame that declares hypotheses, frames in declaration order.
json diagnoses(const WorkingMemory& wm);
json diagnoses(const WorkingMemory& wm, std::string_view frame_id);

json explanation(const ExplanationNode& node);
// explain(hypothesis) with up to `depth` expand steps nested under "parent_node".
json explanation_chain(const WorkingMemory& wm, std::string_view hypothesis, int depth);

json frames(const KnowledgeBase& kb);
json hypotheses(const KnowledgeBase& kb);
json rule(const KnowledgeBase& kb, const Rule& r);
json trigger_history(const WorkingMemory& wm, std::string_view frame_id);

// Parses [{"frame":..,"element":..,"degree": number|null}, ...]. Problems
// are appended to `errors` as {"index": i, "message": ...}.
std::vector<EvidenceChange> evidence_changes(const json& entries, json& errors);

}  // namespace gertis::json_io
