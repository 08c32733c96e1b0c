#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gertis {

// Base of every error the engine throws. Parse problems are not thrown; they
// come back as Diagnostic lists from the kb_language functions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownElementError : public Error {
 public:
  UnknownElementError(std::string frame, std::string element)
      : Error("unknown element '" + element + "' in frame '" + frame + "'"),
        frame_(std::move(frame)),
        element_(std::move(element)) {}
  const std::string& frame() const noexcept { return frame_; }
  const std::string& element() const noexcept { return element_; }

 private:
  std::string frame_;
  std::string element_;
};

class FrameMismatchError : public Error {
 public:
  FrameMismatchError(const std::string& a, const std::string& b)
      : Error("focal sets belong to different frames: '" + a + "' vs '" + b + "'") {}
};

// A frame, hypothesis or rule id that does not resolve.
class DanglingReferenceError : public Error {
 public:
  DanglingReferenceError(std::string kind, std::string id, const std::string& where)
      : Error("dangling " + kind + " reference '" + id + "'" +
              (where.empty() ? std::string() : " in " + where)),
        kind_(std::move(kind)),
        id_(std::move(id)) {}
  const std::string& kind() const noexcept { return kind_; }
  const std::string& id() const noexcept { return id_; }

 private:
  std::string kind_;
  std::string id_;
};

// Semantically invalid knowledge base content found during wiring.
class InvalidKnowledgeBaseError : public Error {
 public:
  using Error::Error;
};

class InvalidRuleError : public Error {
 public:
  InvalidRuleError(std::string rule, const std::string& what)
      : Error("invalid rule '" + rule + "': " + what), rule_(std::move(rule)) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

class InvalidBpaError : public Error {
 public:
  using Error::Error;
};

class InvalidQueryError : public Error {
 public:
  using Error::Error;
};

class UndefinedEvidenceError : public Error {
 public:
  explicit UndefinedEvidenceError(std::string frame)
      : Error("frame '" + frame + "' has no belief state"), frame_(std::move(frame)) {}
  const std::string& frame() const noexcept { return frame_; }

 private:
  std::string frame_;
};

class DegeneratePriorError : public Error {
 public:
  DegeneratePriorError(const std::string& frame, const std::string& element)
      : Error("element '" + element + "' of frame '" + frame +
              "' has zero prior but lies in a focal set") {}
};

// Dempster combination with conflict K at (or numerically at) 1. The rule id
// is filled in by forward chaining; direct calls to combine leave it empty.
class TotalConflictError : public Error {
 public:
  TotalConflictError(std::string left, std::string right, std::string rule = {})
      : Error("total conflict combining " + left + " with " + right +
              (rule.empty() ? std::string() : " (rule '" + rule + "')")),
        left_(std::move(left)),
        right_(std::move(right)),
        rule_(std::move(rule)) {}
  const std::string& left() const noexcept { return left_; }
  const std::string& right() const noexcept { return right_; }
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string left_;
  std::string right_;
  std::string rule_;
};

class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> cycle)
      : Error("cyclic frame dependencies: " + join(cycle)), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  static std::string join(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
      if (!out.empty()) out += " -> ";
      out += id;
    }
    return out;
  }
  std::vector<std::string> cycle_;
};

class UnknownHypothesisError : public Error {
 public:
  explicit UnknownHypothesisError(std::string id)
      : Error("unknown hypothesis '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class NoParentError : public Error {
 public:
  explicit NoParentError(const std::string& id)
      : Error("hypothesis '" + id + "' has no superclass") {}
};

}  // namespace gertis
