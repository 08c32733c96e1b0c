#include "gertis/kb_ast.hpp"

namespace gertis {

std::string SourceSpan::str() const {
  return file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::string Diagnostic::str() const { return span.str() + ": " + message; }

std::string_view to_string(RoleEffect effect) {
  switch (effect) {
    case RoleEffect::supportive: return "supportive";
    case RoleEffect::confirming: return "confirming";
    case RoleEffect::adversary: return "adversary";
    case RoleEffect::disconfirming: return "disconfirming";
  }
  return "supportive";
}

std::optional<RoleEffect> parse_role_effect(std::string_view word) {
  if (word == "supportive") return RoleEffect::supportive;
  if (word == "confirming") return RoleEffect::confirming;
  if (word == "adversary") return RoleEffect::adversary;
  if (word == "disconfirming") return RoleEffect::disconfirming;
  return std::nullopt;
}

AntecedentExpr AntecedentExpr::atom(std::string frame, std::string value) {
  AntecedentExpr e;
  e.kind = Kind::atom;
  e.frame = std::move(frame);
  e.value = std::move(value);
  return e;
}

AntecedentExpr AntecedentExpr::compound(Kind kind, std::vector<AntecedentExpr> operands, int count) {
  AntecedentExpr e;
  e.kind = kind;
  e.value.clear();
  e.operands = std::move(operands);
  e.count = count;
  return e;
}

SetExpr SetExpr::named(std::string name) {
  SetExpr s;
  s.name = std::move(name);
  return s;
}

SetExpr SetExpr::union_of(std::vector<SetExpr> operands) {
  SetExpr s;
  s.kind = Kind::any_of;
  s.operands = std::move(operands);
  return s;
}

SetExpr SetExpr::negation(SetExpr operand) {
  SetExpr s;
  s.kind = Kind::negation;
  s.operands.push_back(std::move(operand));
  return s;
}

}  // namespace gertis
