#include "gertis/json_io.hpp"

namespace gertis::json_io {

json focal_set(const FocalSet& set, const FrameSignature& frame) {
  json out;
  if (set.fits_u64()) {
    out["code"] = set.code_u64();
  } else {
    out["code"] = set.code();
  }
  auto names = decode(set, frame);
  std::sort(names.begin(), names.end());
  out["members"] = names;
  return out;
}

json interval(const BeliefInterval& iv) { return {{"bel", iv.bel}, {"pl", iv.pl}}; }

json bpa(const Bpa& m, const FrameSignature& frame) {
  json out = json::array();
  for (const auto& [set, mass] : m.masses()) {
    json entry = focal_set(set, frame);
    entry["mass"] = mass;
    out.push_back(std::move(entry));
  }
  return out;
}

json antecedent(const AntecedentExpr& e) {
  using Kind = AntecedentExpr::Kind;
  if (e.kind == Kind::atom) return {{"op", "atom"}, {"frame", e.frame}, {"value", e.value}};
  static const char* names[] = {"atom", "and", "or", "not", "min", "max"};
  json out{{"op", names[static_cast<int>(e.kind)]}};
  if (e.kind == Kind::at_least || e.kind == Kind::at_most) out["count"] = e.count;
  json operands = json::array();
  for (const auto& o : e.operands) operands.push_back(antecedent(o));
  out["operands"] = std::move(operands);
  return out;
}

json observation(const Observation& o) {
  json out{{"kind", o.kind == Observation::Kind::condition ? "condition" : "group"},
           {"text", o.text},
           {"degree", o.degree}};
  if (o.kind == Observation::Kind::group) {
    json children = json::array();
    for (const auto& c : o.children) children.push_back(observation(c));
    out["children"] = std::move(children);
  }
  return out;
}

json diagnoses(const WorkingMemory& wm, std::string_view frame_id) {
  json rows = json::array();
  for (const auto& r : rank_diagnoses(wm, frame_id)) {
    rows.push_back({{"frame", std::string(frame_id)},
                    {"hypothesis", r.id},
                    {"text", r.text},
                    {"bel", r.interval.bel},
                    {"pl", r.interval.pl}});
  }
  return rows;
}

json diagnoses(const WorkingMemory& wm) {
  json rows = json::array();
  for (const auto& f : wm.kb().frames()) {
    if (f.hierarchy.empty()) continue;
    for (auto& row : diagnoses(wm, f.id)) rows.push_back(std::move(row));
  }
  return rows;
}

json explanation(const ExplanationNode& node) {
  json contributions = json::array();
  for (const auto& c : node.contributions) {
    json obs = json::array();
    for (const auto& o : c.observations) obs.push_back(observation(o));
    contributions.push_back({{"rule", c.rule_id},
                             {"role_effect", std::string(to_string(c.role_effect))},
                             {"inferred_degree", c.inferred_degree},
                             {"observations", std::move(obs)}});
  }
  json out{{"hypothesis", node.hypothesis},
           {"text", node.text},
           {"interval", interval(node.interval)},
           {"contributions", std::move(contributions)},
           {"parent", nullptr}};
  if (node.parent) {
    out["parent"] = {{"hypothesis", node.parent->hypothesis},
                     {"text", node.parent->text},
                     {"interval", interval(node.parent->interval)}};
  }
  return out;
}

json explanation_chain(const WorkingMemory& wm, std::string_view hypothesis, int depth) {
  ExplanationNode node = explain(wm, hypothesis);
  json out = explanation(node);
  json* cursor = &out;
  for (int i = 0; i < depth && node.parent; ++i) {
    node = expand(wm, node);
    (*cursor)["parent_node"] = explanation(node);
    cursor = &(*cursor)["parent_node"];
  }
  return out;
}

json frames(const KnowledgeBase& kb) {
  json out = json::array();
  for (const auto& f : kb.frames()) {
    out.push_back({{"id", f.id},
                   {"name", f.name},
                   {"elements", f.signature.elements()},
                   {"prior", f.prior},
                   {"f_rules", f.f_rules},
                   {"hierarchy", f.hierarchy}});
  }
  return out;
}

json hypotheses(const KnowledgeBase& kb) {
  json out = json::array();
  for (const auto& h : kb.hypotheses()) {
    json entry{{"id", h.name},
               {"text", h.text},
               {"frame", h.frame_id},
               {"members", focal_set(h.members, kb.frame(h.frame_id).signature)},
               {"superclass", h.superclass ? json(*h.superclass) : json(nullptr)},
               {"subclasses", h.subclasses},
               {"b_rules", h.b_rules}};
    out.push_back(std::move(entry));
  }
  return out;
}

json rule(const KnowledgeBase& kb, const Rule& r) {
  const FrameSignature& sig = kb.frame(r.consequent_frame).signature;
  auto clauses = [&](const std::vector<Clause>& cs) {
    json out = json::array();
    for (const auto& c : cs) {
      json entry = focal_set(c.target, sig);
      entry["prob"] = c.prob;
      out.push_back(std::move(entry));
    }
    return out;
  };
  auto role = [](const std::optional<RoleDescriptor>& role) -> json {
    if (!role) return nullptr;
    return {{"effect", std::string(to_string(role->effect))}, {"hypothesis", role->acting_hypothesis}};
  };
  return {{"id", r.id},
          {"consequent", r.consequent_frame},
          {"if", antecedent(r.if_expr)},
          {"except", r.except_expr ? antecedent(*r.except_expr) : json(nullptr)},
          {"then", clauses(r.then_clauses)},
          {"else", clauses(r.else_clauses)},
          {"t_role", role(r.t_role)},
          {"nil_role", role(r.nil_role)},
          {"antecedent_frames", r.antecedent_frames}};
}

json trigger_history(const WorkingMemory& wm, std::string_view frame_id) {
  const Frame& f = wm.kb().frame(frame_id);
  json out = json::array();
  for (const auto& t : wm.frame_state(frame_id).history) {
    out.push_back({{"rule", t.rule_id},
                   {"antecedent_degree", t.antecedent_degree},
                   {"clause", std::string(to_string(t.clause))},
                   {"bpa", bpa(t.contributed_bpa, f.signature)}});
  }
  return out;
}

std::vector<EvidenceChange> evidence_changes(const json& entries, json& errors) {
  std::vector<EvidenceChange> out;
  if (!entries.is_array()) {
    errors.push_back({{"index", nullptr}, {"message", "'entries' must be an array"}});
    return out;
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    if (!e.is_object() || !e.contains("frame") || !e["frame"].is_string() || !e.contains("element") ||
        !e["element"].is_string()) {
      errors.push_back({{"index", i}, {"message", "entry needs string 'frame' and 'element'"}});
      continue;
    }
    EvidenceChange c{e["frame"].get<std::string>(), e["element"].get<std::string>(), 1.0};
    if (e.contains("degree")) {
      if (e["degree"].is_null()) {
        c.degree.reset();
      } else if (e["degree"].is_number()) {
        c.degree = e["degree"].get<double>();
      } else {
        errors.push_back({{"index", i}, {"message", "'degree' must be a number or null"}});
        continue;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace gertis::json_io
