#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gertis/focal_set.hpp"
#include "gertis/knowledge_model.hpp"

namespace gertis {

struct EngineSettings {
  // A clause side fires only when its degree exceeds the threshold.
  double threshold = 0.0;
  // combine() reports total conflict once K >= 1 - conflict_tolerance.
  double conflict_tolerance = 1e-12;
};

// Mass function over nonempty subsets of one frame, keyed by focal set.
class Bpa {
 public:
  using Masses = std::map<FocalSet, double>;

  // Accumulates duplicate keys and drops zero masses. Throws InvalidBpaError
  // when a key is empty, from another frame, a mass lies outside [0, 1], or
  // the total differs from 1 by more than 1e-9.
  static Bpa make(const FrameSignature& frame, std::vector<std::pair<FocalSet, double>> masses);
  static Bpa make(std::string frame_id, std::size_t width, std::vector<std::pair<FocalSet, double>> masses);
  static Bpa vacuous(const FrameSignature& frame);
  // Mass d on {element}, 1 - d on the whole frame.
  static Bpa simple_support(const FrameSignature& frame, const FocalSet& focus, double degree);

  const std::string& frame_id() const noexcept { return frame_id_; }
  std::size_t width() const noexcept { return width_; }
  const Masses& masses() const noexcept { return masses_; }
  double mass(const FocalSet& set) const;
  bool is_vacuous() const;

  // "{code: mass, ...}"
  std::string describe() const;

  friend bool operator==(const Bpa&, const Bpa&) = default;

 private:
  friend Bpa combine(const Bpa&, const Bpa&, double);
  std::string frame_id_;
  std::size_t width_ = 0;
  Masses masses_;
};

struct BeliefInterval {
  double bel = 0.0;
  double pl = 1.0;
  friend bool operator==(const BeliefInterval&, const BeliefInterval&) = default;
};

struct Bca {
  std::string frame_id;
  std::vector<double> certainty;  // indexed by element position
};

// Dempster's orthogonal sum. Throws FrameMismatchError or TotalConflictError.
Bpa combine(const Bpa& a, const Bpa& b, double conflict_tolerance = 1e-12);

// Throw InvalidQueryError for an empty query set.
double bel(const Bpa& m, const FocalSet& a);
double pl(const Bpa& m, const FocalSet& a);
BeliefInterval interval(const Bpa& m, const FocalSet& a);

// Redistributes each focal mass over its elements in proportion to the prior.
Bca bca(const Bpa& m, const FrameSignature& frame, const std::vector<double>& prior);

// Antecedent condition snapshot taken when a rule fires.
struct Observation {
  enum class Kind { condition, group };
  Kind kind = Kind::condition;
  std::string text;
  double degree = 0.0;
  std::vector<Observation> children;

  friend bool operator==(const Observation&, const Observation&) = default;
};

enum class ClauseSide { then_side, else_side, both };
std::string_view to_string(ClauseSide side);

struct TriggerRecord {
  std::string rule_id;
  double antecedent_degree = 0.0;
  double then_degree = 0.0;
  double else_degree = 0.0;
  Bpa contributed_bpa;
  ClauseSide clause = ClauseSide::then_side;
  std::vector<Observation> observations;

  friend bool operator==(const TriggerRecord&, const TriggerRecord&) = default;
};

// Entry of a hypothesis's triggered-b-rules slot.
struct TriggeredRule {
  std::string rule_id;
  RoleEffect effect = RoleEffect::supportive;
  ClauseSide clause = ClauseSide::then_side;
  std::vector<std::pair<FocalSet, double>> masses;  // clause masses only, no residual
  std::vector<Observation> observations;

  double total_mass() const;
  friend bool operator==(const TriggeredRule&, const TriggeredRule&) = default;
};

struct FrameState {
  Bpa bpa;
  bool defined = false;
  std::vector<TriggerRecord> history;

  friend bool operator==(const FrameState&, const FrameState&) = default;
};

// (frame id, element) -> degree
using EvidenceMap = std::map<std::pair<std::string, std::string>, double>;

EvidenceMap to_evidence_map(const EvidenceAssignment& evidence);

struct EvidenceChange {
  std::string frame;
  std::string element;
  std::optional<double> degree;  // nullopt removes the entry
};

// Per-session belief state over a shared, immutable KnowledgeBase.
class WorkingMemory {
 public:
  explicit WorkingMemory(std::shared_ptr<const KnowledgeBase> kb, EngineSettings settings = {});

  const KnowledgeBase& kb() const noexcept { return *kb_; }
  const std::shared_ptr<const KnowledgeBase>& kb_ptr() const noexcept { return kb_; }
  const EngineSettings& settings() const noexcept { return settings_; }
  const EvidenceMap& evidence() const noexcept { return evidence_; }

  const FrameState& frame_state(std::string_view frame_id) const;
  const Bpa& bpa(std::string_view frame_id) const { return frame_state(frame_id).bpa; }
  bool has_belief(std::string_view frame_id) const { return frame_state(frame_id).defined; }
  const std::vector<TriggeredRule>& triggered_b_rules(std::string_view hypothesis) const;

  // Installs a belief state directly; used by tests and embedders evaluating
  // antecedents outside of chaining.
  void set_belief(std::string_view frame_id, Bpa bpa);

  friend bool operator==(const WorkingMemory& a, const WorkingMemory& b) {
    return a.kb_ == b.kb_ && a.evidence_ == b.evidence_ && a.frames_ == b.frames_ && a.triggered_ == b.triggered_;
  }

 private:
  friend WorkingMemory forward_chain(std::shared_ptr<const KnowledgeBase>, const EvidenceMap&, EngineSettings);
  friend WorkingMemory update_evidence(const WorkingMemory&, const std::vector<EvidenceChange>&);
  friend void recompute_frame(WorkingMemory&, const Frame&);

  std::shared_ptr<const KnowledgeBase> kb_;
  EngineSettings settings_;
  EvidenceMap evidence_;
  std::vector<FrameState> frames_;                  // by frame index
  std::vector<std::vector<TriggeredRule>> triggered_;  // by hypothesis index
};

// Fuzzy degree of an antecedent. Throws UndefinedEvidenceError when an atom's
// frame has no belief state.
double eval_antecedent(const AntecedentExpr& expr, const WorkingMemory& wm);

struct ClauseDegrees {
  double then_degree = 0.0;
  double else_degree = 0.0;
};
ClauseDegrees effective_degree(const Rule& rule, const WorkingMemory& wm);

// Clause masses p_i * degree with the residual on the frame. nullopt when no
// clause carries mass. Throws InvalidRuleError if the masses exceed 1.
std::optional<Bpa> rule_bpa(const Rule& rule, double then_degree, double else_degree);

// Frame ids with antecedent frames before consequent frames; ties broken by
// declaration order. Throws CycleError.
std::vector<std::string> frame_order(const KnowledgeBase& kb);

// Throw DanglingReferenceError / UnknownElementError for evidence outside the
// KB, CycleError, or TotalConflictError naming the rule.
WorkingMemory forward_chain(std::shared_ptr<const KnowledgeBase> kb, const EvidenceMap& evidence,
                            EngineSettings settings = {});
WorkingMemory forward_chain(std::shared_ptr<const KnowledgeBase> kb, const EvidenceAssignment& evidence,
                            EngineSettings settings = {});

// Retracts and recomputes only the frames downstream of the changed evidence.
// The result equals forward_chain over the updated evidence.
WorkingMemory update_evidence(const WorkingMemory& wm, const std::vector<EvidenceChange>& changes);

// Human-readable problems with evidence entries, by position; empty when all
// entries reference known frames/elements with degrees in [0, 1].
std::vector<std::pair<std::size_t, std::string>> check_evidence(const KnowledgeBase& kb,
                                                                const std::vector<EvidenceChange>& changes);

struct HistoryChange {
  enum class Kind { added, retracted, changed };
  std::string frame;
  std::string rule_id;
  Kind kind;
};
// Trigger-history difference between two working memories over the same KB.
std::vector<HistoryChange> diff_histories(const WorkingMemory& before, const WorkingMemory& after);

struct RankedHypothesis {
  std::string id;
  std::string text;
  BeliefInterval interval;
};

// Declared hypotheses with bel > 0, by bel desc, pl desc, then id. The
// hypothesis covering the whole frame is omitted since its bel is always 1.
std::vector<RankedHypothesis> rank_diagnoses(const WorkingMemory& wm, std::string_view frame_id);

BeliefInterval hypothesis_interval(const WorkingMemory& wm, std::string_view hypothesis);

}  // namespace gertis
