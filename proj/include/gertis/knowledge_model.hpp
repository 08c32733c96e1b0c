#pragma once

// Frames, hypotheses and rules of a wired knowledge base. A KnowledgeBase is
// immutable once built and may be shared by any number of sessions; belief
// state lives in WorkingMemory (evidence_engine.hpp).

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gertis/error.hpp"
#include "gertis/focal_set.hpp"
#include "gertis/kb_ast.hpp"

namespace gertis {

struct Frame {
  std::string id;
  std::string name;
  FrameSignature signature;
  std::vector<double> prior;
  std::vector<std::string> f_rules;    // rules whose IF/EXCEPT reference this frame
  std::vector<std::string> hierarchy;  // hypotheses of this frame, declaration order
  std::size_t index = 0;
};

struct Hypothesis {
  std::string name;
  std::string text;
  std::string frame_id;
  FocalSet members;
  std::optional<std::string> superclass;
  std::vector<std::string> subclasses;
  std::vector<std::string> b_rules;
  std::size_t index = 0;
};

struct Clause {
  FocalSet target;
  double prob = 1.0;
};

struct RoleDescriptor {
  RoleEffect effect = RoleEffect::supportive;
  std::string acting_hypothesis;
};

struct Rule {
  std::string id;
  std::string consequent_frame;
  AntecedentExpr if_expr;
  std::optional<AntecedentExpr> except_expr;
  std::vector<Clause> then_clauses;
  std::vector<Clause> else_clauses;
  std::optional<RoleDescriptor> t_role;
  std::optional<RoleDescriptor> nil_role;
  std::vector<std::string> antecedent_frames;  // distinct, first-mention order
  std::size_t index = 0;
};

class KnowledgeBase {
 public:
  const std::string& id() const noexcept { return id_; }
  const std::vector<Frame>& frames() const noexcept { return frames_; }
  const std::vector<Hypothesis>& hypotheses() const noexcept { return hypotheses_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const Declarations& declarations() const noexcept { return declarations_; }

  const Frame* find_frame(std::string_view id) const;
  const Hypothesis* find_hypothesis(std::string_view id) const;
  const Rule* find_rule(std::string_view id) const;

  // Throw DanglingReferenceError for unknown ids.
  const Frame& frame(std::string_view id) const;
  const Hypothesis& hypothesis(std::string_view id) const;
  const Rule& rule(std::string_view id) const;

 private:
  friend KnowledgeBase wire(const Declarations& decls, std::string kb_id);

  std::string id_;
  std::vector<Frame> frames_;
  std::vector<Hypothesis> hypotheses_;
  std::vector<Rule> rules_;
  std::unordered_map<std::string, std::size_t> frame_index_;
  std::unordered_map<std::string, std::size_t> hypothesis_index_;
  std::unordered_map<std::string, std::size_t> rule_index_;
  Declarations declarations_;
};

// Resolves every cross-reference, fills f_rules, b_rules, hierarchy and the
// superclass/subclasses links. Throws DanglingReferenceError,
// UnknownElementError, InvalidRuleError or InvalidKnowledgeBaseError.
KnowledgeBase wire(const Declarations& decls, std::string kb_id = "kb");

// Raised when a KB or evidence file does not parse.
class ParseFailedError : public Error {
 public:
  explicit ParseFailedError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// parse_kb + wire. The KB id defaults to the file stem.
std::shared_ptr<const KnowledgeBase> load_knowledge_base(const std::string& path,
                                                          std::optional<std::string> kb_id = std::nullopt);
std::shared_ptr<const KnowledgeBase> knowledge_base_from_text(std::string_view text, std::string kb_id = "kb",
                                                              std::string_view file = "<input>");

struct TaxonomyViolation {
  enum class Kind { empty_members, not_strict_subset, union_mismatch, foreign_superclass, stray_b_rule };
  std::string hypothesis;
  Kind kind;
  std::string message;
};

// Empty when every hypothesis of the frame satisfies the taxonomy invariants.
std::vector<TaxonomyViolation> validate_taxonomy(const KnowledgeBase& kb, std::string_view frame_id);

// Advisory warnings: a supportive or confirming role whose acting hypothesis
// is disjoint from every target of its clause, or an adversary or
// disconfirming role whose hypothesis every target contains. Never blocks
// loading.
std::vector<std::string> role_consistency_check(const KnowledgeBase& kb, const Rule& rule);

}  // namespace gertis
