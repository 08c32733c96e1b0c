#pragma once

// Abstract syntax of knowledge-base (.gkb) and evidence (.gev) files.
// Spans are carried for diagnostics but ignored by operator==.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gertis {

struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;

  std::string str() const;
  // Spans never take part in structural comparison.
  friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }
};

struct Diagnostic {
  SourceSpan span;
  std::string message;

  // "file:line:col: message"
  std::string str() const;
  friend bool operator==(const Diagnostic& a, const Diagnostic& b) {
    return a.span.file == b.span.file && a.span.line == b.span.line &&
           a.span.column == b.span.column && a.message == b.message;
  }
};

enum class RoleEffect { supportive, confirming, adversary, disconfirming };

std::string_view to_string(RoleEffect effect);
std::optional<RoleEffect> parse_role_effect(std::string_view word);

struct AntecedentExpr {
  enum class Kind { atom, all_of, any_of, negation, at_least, at_most };

  Kind kind = Kind::atom;
  std::string frame;              // atom
  std::string value = "present";  // atom
  int count = 0;                  // at_least / at_most
  std::vector<AntecedentExpr> operands;
  SourceSpan span;

  static AntecedentExpr atom(std::string frame, std::string value = "present");
  static AntecedentExpr compound(Kind kind, std::vector<AntecedentExpr> operands, int count = 0);

  friend bool operator==(const AntecedentExpr&, const AntecedentExpr&) = default;
};

// Set expression over a frame: hypothesis id or element name, union, complement.
struct SetExpr {
  enum class Kind { name, any_of, negation };

  Kind kind = Kind::name;
  std::string name;
  std::vector<SetExpr> operands;
  SourceSpan span;

  static SetExpr named(std::string name);
  static SetExpr union_of(std::vector<SetExpr> operands);
  static SetExpr negation(SetExpr operand);

  friend bool operator==(const SetExpr&, const SetExpr&) = default;
};

struct FrameDecl {
  std::string id;
  std::string name;
  std::vector<std::string> elements;
  std::optional<std::vector<double>> prior;  // nullopt: uniform
  SourceSpan span;

  friend bool operator==(const FrameDecl&, const FrameDecl&) = default;
};

struct HypothesisDecl {
  std::string id;
  std::string text;
  std::string frame;
  SetExpr members;
  std::optional<std::string> parent;
  SourceSpan span;

  friend bool operator==(const HypothesisDecl&, const HypothesisDecl&) = default;
};

struct ClauseDecl {
  SetExpr target;
  double prob = 1.0;
  SourceSpan span;

  friend bool operator==(const ClauseDecl&, const ClauseDecl&) = default;
};

struct RoleDecl {
  RoleEffect effect = RoleEffect::supportive;
  std::string hypothesis;
  SourceSpan span;

  friend bool operator==(const RoleDecl&, const RoleDecl&) = default;
};

struct RuleDecl {
  std::string id;
  std::string consequent;
  AntecedentExpr if_expr;
  std::optional<AntecedentExpr> except_expr;
  std::vector<ClauseDecl> then_clauses;
  std::vector<ClauseDecl> else_clauses;
  std::optional<RoleDecl> t_role;
  std::optional<RoleDecl> nil_role;
  SourceSpan span;

  friend bool operator==(const RuleDecl&, const RuleDecl&) = default;
};

using Declaration = std::variant<FrameDecl, HypothesisDecl, RuleDecl>;

struct Declarations {
  std::vector<Declaration> items;

  friend bool operator==(const Declarations&, const Declarations&) = default;
};

struct EvidenceEntry {
  std::string frame;
  std::string element;
  double degree = 1.0;
  SourceSpan span;

  friend bool operator==(const EvidenceEntry&, const EvidenceEntry&) = default;
};

struct EvidenceAssignment {
  std::vector<EvidenceEntry> entries;

  friend bool operator==(const EvidenceAssignment&, const EvidenceAssignment&) = default;
};

}  // namespace gertis
