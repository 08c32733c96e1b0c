#include "gertis/knowledge_model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "gertis/kb_language.hpp"

namespace gertis {

namespace {

std::string at(const SourceSpan& span) {
  return "line " + std::to_string(span.line) + ", column " + std::to_string(span.column);
}

struct SetResolver {
  const Frame& frame;
  const std::unordered_map<std::string, const HypothesisDecl*>& hypothesis_decls;
  // Memo of hypotheses already resolved in this frame and those on the stack.
  std::unordered_map<std::string, FocalSet>& resolved;
  std::set<std::string>& in_progress;

  FocalSet operator()(const SetExpr& s) {
    switch (s.kind) {
      case SetExpr::Kind::any_of: {
        FocalSet acc = FocalSet::empty(frame.signature);
        for (const auto& o : s.operands) acc = unite(acc, (*this)(o));
        return acc;
      }
      case SetExpr::Kind::negation:
        return complement((*this)(s.operands.at(0)));
      case SetExpr::Kind::name:
        break;
    }
    if (auto it = hypothesis_decls.find(s.name); it != hypothesis_decls.end()) {
      const HypothesisDecl& h = *it->second;
      if (h.frame != frame.id) {
        throw InvalidKnowledgeBaseError("hypothesis '" + s.name + "' belongs to frame '" + h.frame +
                                        "', not '" + frame.id + "' (" + at(s.span) + ")");
      }
      return hypothesis(h);
    }
    auto index = frame.signature.index_of(s.name);
    if (index == FrameSignature::npos) {
      throw DanglingReferenceError("hypothesis or element", s.name, "frame '" + frame.id + "' at " + at(s.span));
    }
    return FocalSet::singleton(frame.signature, index);
  }

  FocalSet hypothesis(const HypothesisDecl& h) {
    if (auto it = resolved.find(h.id); it != resolved.end()) return it->second;
    if (!in_progress.insert(h.id).second) {
      throw InvalidKnowledgeBaseError("hypothesis '" + h.id + "' is defined in terms of itself");
    }
    FocalSet members = (*this)(h.members);
    in_progress.erase(h.id);
    resolved.emplace(h.id, members);
    return members;
  }
};

void collect_atoms(const AntecedentExpr& e, std::vector<const AntecedentExpr*>& out) {
  if (e.kind == AntecedentExpr::Kind::atom) {
    out.push_back(&e);
    return;
  }
  for (const auto& o : e.operands) collect_atoms(o, out);
}

void check_antecedent_shape(const AntecedentExpr& e, const std::string& rule) {
  using Kind = AntecedentExpr::Kind;
  if (e.kind == Kind::atom) return;
  if (e.operands.empty()) throw InvalidRuleError(rule, "operator with no operands");
  if (e.kind == Kind::negation && e.operands.size() != 1) throw InvalidRuleError(rule, "'not' takes one operand");
  if ((e.kind == Kind::at_least || e.kind == Kind::at_most) &&
      (e.count < (e.kind == Kind::at_most ? 0 : 1) || e.count > static_cast<int>(e.operands.size()))) {
    throw InvalidRuleError(rule, "min/max count out of range");
  }
  for (const auto& o : e.operands) check_antecedent_shape(o, rule);
}

}  // namespace

const Frame* KnowledgeBase::find_frame(std::string_view id) const {
  auto it = frame_index_.find(std::string(id));
  return it == frame_index_.end() ? nullptr : &frames_[it->second];
}

const Hypothesis* KnowledgeBase::find_hypothesis(std::string_view id) const {
  auto it = hypothesis_index_.find(std::string(id));
  return it == hypothesis_index_.end() ? nullptr : &hypotheses_[it->second];
}

const Rule* KnowledgeBase::find_rule(std::string_view id) const {
  auto it = rule_index_.find(std::string(id));
  return it == rule_index_.end() ? nullptr : &rules_[it->second];
}

const Frame& KnowledgeBase::frame(std::string_view id) const {
  if (const auto* f = find_frame(id)) return *f;
  throw DanglingReferenceError("frame", std::string(id), "");
}

const Hypothesis& KnowledgeBase::hypothesis(std::string_view id) const {
  if (const auto* h = find_hypothesis(id)) return *h;
  throw DanglingReferenceError("hypothesis", std::string(id), "");
}

const Rule& KnowledgeBase::rule(std::string_view id) const {
  if (const auto* r = find_rule(id)) return *r;
  throw DanglingReferenceError("rule", std::string(id), "");
}

KnowledgeBase wire(const Declarations& decls, std::string kb_id) {
  KnowledgeBase kb;
  kb.id_ = std::move(kb_id);
  kb.declarations_ = decls;

  std::unordered_map<std::string, const HypothesisDecl*> hypothesis_decls;
  for (const auto& d : decls.items) {
    if (const auto* f = std::get_if<FrameDecl>(&d)) {
      if (kb.frame_index_.contains(f->id)) throw InvalidKnowledgeBaseError("duplicate frame id '" + f->id + "'");
      std::vector<double> prior;
      if (f->prior) {
        prior = *f->prior;
        if (prior.size() != f->elements.size()) {
          throw InvalidKnowledgeBaseError("prior of frame '" + f->id + "' has the wrong length");
        }
        double sum = 0;
        for (double p : prior) {
          if (!(p >= 0.0)) throw InvalidKnowledgeBaseError("negative prior in frame '" + f->id + "'");
          sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-9) {
          throw InvalidKnowledgeBaseError("prior of frame '" + f->id + "' does not sum to 1");
        }
      } else if (!f->elements.empty()) {
        prior.assign(f->elements.size(), 1.0 / static_cast<double>(f->elements.size()));
      }
      Frame frame{f->id, f->name, FrameSignature(f->id, f->elements), std::move(prior), {}, {}, kb.frames_.size()};
      kb.frame_index_.emplace(f->id, kb.frames_.size());
      kb.frames_.push_back(std::move(frame));
    } else if (const auto* h = std::get_if<HypothesisDecl>(&d)) {
      if (!hypothesis_decls.emplace(h->id, h).second) {
        throw InvalidKnowledgeBaseError("duplicate hypothesis id '" + h->id + "'");
      }
    }
  }

  // Hypotheses, resolved per frame so members may reference any sibling.
  std::unordered_map<std::string, FocalSet> resolved;
  std::set<std::string> in_progress;
  for (const auto& d : decls.items) {
    const auto* h = std::get_if<HypothesisDecl>(&d);
    if (!h) continue;
    const Frame* frame = kb.find_frame(h->frame);
    if (!frame) throw DanglingReferenceError("frame", h->frame, "hypothesis '" + h->id + "'");
    SetResolver resolve{*frame, hypothesis_decls, resolved, in_progress};
    FocalSet members = resolve.hypothesis(*h);
    if (members.none()) throw InvalidKnowledgeBaseError("hypothesis '" + h->id + "' denotes the empty set");
    kb.hypothesis_index_.emplace(h->id, kb.hypotheses_.size());
    kb.hypotheses_.push_back({h->id, h->text, h->frame, std::move(members), h->parent, {}, {}, kb.hypotheses_.size()});
    kb.frames_[frame->index].hierarchy.push_back(h->id);
  }
  for (auto& h : kb.hypotheses_) {
    if (!h.superclass) continue;
    auto it = kb.hypothesis_index_.find(*h.superclass);
    if (it == kb.hypothesis_index_.end()) {
      throw DanglingReferenceError("hypothesis", *h.superclass, "parent of '" + h.name + "'");
    }
    Hypothesis& parent = kb.hypotheses_[it->second];
    if (parent.frame_id != h.frame_id) {
      throw InvalidKnowledgeBaseError("hypothesis '" + h.name + "' and its parent '" + parent.name +
                                      "' belong to different frames");
    }
    parent.subclasses.push_back(h.name);
  }
  for (const auto& h : kb.hypotheses_) {
    std::set<std::string> chain{h.name};
    for (const Hypothesis* cur = &h; cur->superclass;) {
      cur = &kb.hypotheses_[kb.hypothesis_index_.at(*cur->superclass)];
      if (!chain.insert(cur->name).second) {
        throw InvalidKnowledgeBaseError("superclass cycle through hypothesis '" + h.name + "'");
      }
    }
  }

  for (const auto& d : decls.items) {
    const auto* r = std::get_if<RuleDecl>(&d);
    if (!r) continue;
    if (kb.rule_index_.contains(r->id)) throw InvalidKnowledgeBaseError("duplicate rule id '" + r->id + "'");
    const Frame* consequent = kb.find_frame(r->consequent);
    if (!consequent) throw DanglingReferenceError("frame", r->consequent, "consequent of rule '" + r->id + "'");

    Rule rule;
    rule.id = r->id;
    rule.consequent_frame = r->consequent;
    rule.if_expr = r->if_expr;
    rule.except_expr = r->except_expr;
    rule.index = kb.rules_.size();

    check_antecedent_shape(rule.if_expr, rule.id);
    if (rule.except_expr) check_antecedent_shape(*rule.except_expr, rule.id);
    std::vector<const AntecedentExpr*> atoms;
    collect_atoms(rule.if_expr, atoms);
    if (rule.except_expr) collect_atoms(*rule.except_expr, atoms);
    for (const auto* atom : atoms) {
      const Frame* f = kb.find_frame(atom->frame);
      if (!f) throw DanglingReferenceError("frame", atom->frame, "antecedent of rule '" + rule.id + "'");
      if (!f->signature.contains(atom->value)) throw UnknownElementError(f->id, atom->value);
      if (std::find(rule.antecedent_frames.begin(), rule.antecedent_frames.end(), f->id) ==
          rule.antecedent_frames.end()) {
        rule.antecedent_frames.push_back(f->id);
      }
    }

    SetResolver resolve{*consequent, hypothesis_decls, resolved, in_progress};
    auto build_clauses = [&](const std::vector<ClauseDecl>& src, const char* which) {
      std::vector<Clause> out;
      double total = 0;
      for (const auto& c : src) {
        FocalSet target = resolve(c.target);
        if (target.none()) throw InvalidRuleError(rule.id, std::string(which) + " target is the empty set");
        if (!(c.prob > 0.0 && c.prob <= 1.0)) throw InvalidRuleError(rule.id, "probability out of range (0, 1]");
        total += c.prob;
        out.push_back({std::move(target), c.prob});
      }
      if (total > 1.0 + 1e-9) throw InvalidRuleError(rule.id, std::string(which) + " probabilities sum to more than 1");
      return out;
    };
    if (r->then_clauses.empty()) throw InvalidRuleError(rule.id, "no THEN clause");
    rule.then_clauses = build_clauses(r->then_clauses, "THEN");
    rule.else_clauses = build_clauses(r->else_clauses, "ELSE");

    auto build_role = [&](const std::optional<RoleDecl>& src) -> std::optional<RoleDescriptor> {
      if (!src) return std::nullopt;
      const Hypothesis* h = kb.find_hypothesis(src->hypothesis);
      if (!h) throw DanglingReferenceError("hypothesis", src->hypothesis, "role of rule '" + rule.id + "'");
      if (h->frame_id != consequent->id) {
        throw InvalidRuleError(rule.id, "acting hypothesis '" + h->name + "' is not in consequent frame '" +
                                            consequent->id + "'");
      }
      return RoleDescriptor{src->effect, src->hypothesis};
    };
    rule.t_role = build_role(r->t_role);
    rule.nil_role = build_role(r->nil_role);

    kb.rule_index_.emplace(rule.id, kb.rules_.size());
    kb.rules_.push_back(std::move(rule));
  }

  for (const auto& rule : kb.rules_) {
    for (const auto& f : rule.antecedent_frames) kb.frames_[kb.frame_index_.at(f)].f_rules.push_back(rule.id);
    std::set<std::string> acting;
    if (rule.t_role) acting.insert(rule.t_role->acting_hypothesis);
    if (rule.nil_role) acting.insert(rule.nil_role->acting_hypothesis);
    for (const auto& h : acting) kb.hypotheses_[kb.hypothesis_index_.at(h)].b_rules.push_back(rule.id);
  }
  return kb;
}

ParseFailedError::ParseFailedError(std::vector<Diagnostic> diagnostics)
    : Error([&] {
        std::string msg = "parse failed";
        for (const auto& d : diagnostics) msg += "\n  " + d.str();
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

std::shared_ptr<const KnowledgeBase> knowledge_base_from_text(std::string_view text, std::string kb_id,
                                                              std::string_view file) {
  auto parsed = parse_kb(text, file);
  if (!parsed.ok()) throw ParseFailedError(std::move(parsed.diagnostics));
  return std::make_shared<const KnowledgeBase>(wire(parsed.value, std::move(kb_id)));
}

std::shared_ptr<const KnowledgeBase> load_knowledge_base(const std::string& path, std::optional<std::string> kb_id) {
  std::string text = read_file(path);
  std::string id = kb_id.value_or(std::filesystem::path(path).stem().string());
  return knowledge_base_from_text(text, std::move(id), path);
}

std::vector<TaxonomyViolation> validate_taxonomy(const KnowledgeBase& kb, std::string_view frame_id) {
  using Kind = TaxonomyViolation::Kind;
  std::vector<TaxonomyViolation> out;
  const Frame& frame = kb.frame(frame_id);
  for (const auto& name : frame.hierarchy) {
    const Hypothesis& h = kb.hypothesis(name);
    if (h.members.none()) out.push_back({name, Kind::empty_members, "hypothesis '" + name + "' is empty"});
    if (h.superclass) {
      const Hypothesis& parent = kb.hypothesis(*h.superclass);
      if (parent.frame_id != h.frame_id) {
        out.push_back({name, Kind::foreign_superclass, "superclass '" + parent.name + "' is in another frame"});
      } else if (!is_subset(h.members, parent.members) || h.members == parent.members) {
        out.push_back({name, Kind::not_strict_subset,
                       "'" + name + "' is not a strict subset of its superclass '" + parent.name + "'"});
      }
    }
    if (!h.subclasses.empty()) {
      FocalSet acc = FocalSet::empty(frame.signature);
      for (const auto& child : h.subclasses) acc = unite(acc, kb.hypothesis(child).members);
      if (acc != h.members) {
        out.push_back({name, Kind::union_mismatch,
                       "'" + name + "' (code " + h.members.code() + ") differs from the union of its subclasses (code " +
                           acc.code() + ")"});
      }
    }
    for (const auto& rid : h.b_rules) {
      const Rule& r = kb.rule(rid);
      bool names_it = (r.t_role && r.t_role->acting_hypothesis == name) ||
                      (r.nil_role && r.nil_role->acting_hypothesis == name);
      if (!names_it) out.push_back({name, Kind::stray_b_rule, "rule '" + rid + "' does not name '" + name + "' in a role"});
    }
  }
  return out;
}

std::vector<std::string> role_consistency_check(const KnowledgeBase& kb, const Rule& rule) {
  std::vector<std::string> out;
  auto check = [&](const std::optional<RoleDescriptor>& role, const std::vector<Clause>& clauses, const char* slot,
                   const char* clause_name) {
    if (!role) return;
    const Hypothesis& h = kb.hypothesis(role->acting_hypothesis);
    if (clauses.empty()) {
      out.push_back("rule '" + rule.id + "': " + slot + " names '" + h.name + "' but the rule has no " + clause_name +
                    " clause");
      return;
    }
    bool against = role->effect == RoleEffect::adversary || role->effect == RoleEffect::disconfirming;
    if (against) {
      bool excludes = std::any_of(clauses.begin(), clauses.end(),
                                  [&](const Clause& c) { return !is_subset(h.members, c.target); });
      if (!excludes) {
        out.push_back("rule '" + rule.id + "': " + slot + " names '" + h.name + "' as opposed, but every " +
                      clause_name + " target contains it");
      }
      return;
    }
    bool touches = std::any_of(clauses.begin(), clauses.end(),
                               [&](const Clause& c) { return !intersect(c.target, h.members).none(); });
    if (!touches) {
      out.push_back("rule '" + rule.id + "': " + slot + " names '" + h.name + "', which is disjoint from every " +
                    clause_name + " target");
    }
  };
  check(rule.t_role, rule.then_clauses, "t-role", "THEN");
  check(rule.nil_role, rule.else_clauses, "nil-role", "ELSE");
  return out;
}

}  // namespace gertis
