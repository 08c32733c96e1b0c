#include "gertis/evidence_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "gertis/kb_language.hpp"

namespace gertis {

namespace {

constexpr double kMassTolerance = 1e-9;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void add_mass(std::vector<std::pair<FocalSet, double>>& acc, const FocalSet& target, double mass) {
  for (auto& [set, m] : acc) {
    if (set == target) {
      m += mass;
      return;
    }
  }
  acc.emplace_back(target, mass);
}

FocalSet whole_frame_like(const FocalSet& s) { return unite(s, complement(s)); }

std::vector<Observation> observe(const AntecedentExpr& expr, const WorkingMemory& wm) {
  using Kind = AntecedentExpr::Kind;
  auto children = [&](const AntecedentExpr& e) {
    std::vector<Observation> out;
    for (const auto& o : e.operands) {
      auto sub = observe(o, wm);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  };
  auto group = [&](std::string header) {
    return std::vector<Observation>{
        {Observation::Kind::group, std::move(header), eval_antecedent(expr, wm), children(expr)}};
  };
  switch (expr.kind) {
    case Kind::atom: {
      const Frame& f = wm.kb().frame(expr.frame);
      return {{Observation::Kind::condition, f.name + " is " + expr.value, eval_antecedent(expr, wm), {}}};
    }
    case Kind::all_of:
      return children(expr);
    case Kind::negation: {
      const AntecedentExpr& inner = expr.operands.at(0);
      if (inner.kind == Kind::atom) {
        const Frame& f = wm.kb().frame(inner.frame);
        return {{Observation::Kind::condition, f.name + " is not " + inner.value, eval_antecedent(expr, wm), {}}};
      }
      return group("It is not the case that:");
    }
    case Kind::any_of:
      return group("At least one of the following conditions holds:");
    case Kind::at_least:
      return group("At least " + std::to_string(expr.count) + " of the following symptoms are present:");
    case Kind::at_most:
      return group("At most " + std::to_string(expr.count) + " of the following symptoms are present:");
  }
  return {};
}

bool antecedents_defined(const Rule& rule, const WorkingMemory& wm) {
  return std::all_of(rule.antecedent_frames.begin(), rule.antecedent_frames.end(),
                     [&](const std::string& f) { return wm.has_belief(f); });
}

}  // namespace

// ---------------------------------------------------------------------------
// Bpa

Bpa Bpa::make(std::string frame_id, std::size_t width, std::vector<std::pair<FocalSet, double>> masses) {
  Bpa out;
  out.frame_id_ = std::move(frame_id);
  out.width_ = width;
  double total = 0;
  for (auto& [set, m] : masses) {
    if (set.frame_id() != out.frame_id_ || set.width() != width) throw FrameMismatchError(set.frame_id(), out.frame_id_);
    if (set.none()) throw InvalidBpaError("bpa over frame '" + out.frame_id_ + "' assigns mass to the empty set");
    if (!(m >= 0.0 && m <= 1.0 + kMassTolerance)) {
      throw InvalidBpaError("mass " + format_number(m) + " out of range in bpa over '" + out.frame_id_ + "'");
    }
    total += m;
    if (m > 0.0) out.masses_[set] += m;
  }
  if (std::fabs(total - 1.0) > kMassTolerance) {
    throw InvalidBpaError("bpa over frame '" + out.frame_id_ + "' sums to " + format_number(total));
  }
  return out;
}

Bpa Bpa::make(const FrameSignature& frame, std::vector<std::pair<FocalSet, double>> masses) {
  return make(frame.frame_id(), frame.size(), std::move(masses));
}

Bpa Bpa::vacuous(const FrameSignature& frame) {
  Bpa out;
  out.frame_id_ = frame.frame_id();
  out.width_ = frame.size();
  out.masses_.emplace(FocalSet::full(frame), 1.0);
  return out;
}

Bpa Bpa::simple_support(const FrameSignature& frame, const FocalSet& focus, double degree) {
  if (!(degree >= 0.0 && degree <= 1.0)) throw InvalidBpaError("support degree out of range [0, 1]");
  return make(frame, {{focus, degree}, {FocalSet::full(frame), 1.0 - degree}});
}

double Bpa::mass(const FocalSet& set) const {
  auto it = masses_.find(set);
  return it == masses_.end() ? 0.0 : it->second;
}

bool Bpa::is_vacuous() const { return masses_.size() == 1 && masses_.begin()->first.all(); }

std::string Bpa::describe() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [set, m] : masses_) {
    if (!first) out += ", ";
    first = false;
    out += set.code() + ": " + format_number(m);
  }
  return out + "}";
}

Bpa combine(const Bpa& a, const Bpa& b, double conflict_tolerance) {
  if (a.frame_id() != b.frame_id() || a.width() != b.width()) throw FrameMismatchError(a.frame_id(), b.frame_id());
  Bpa out;
  out.frame_id_ = a.frame_id_;
  out.width_ = a.width_;
  double conflict = 0.0;
  for (const auto& [sa, ma] : a.masses_) {
    for (const auto& [sb, mb] : b.masses_) {
      FocalSet c = intersect(sa, sb);
      double p = ma * mb;
      if (c.none()) {
        conflict += p;
      } else {
        out.masses_[std::move(c)] += p;
      }
    }
  }
  if (conflict >= 1.0 - conflict_tolerance) throw TotalConflictError(a.describe(), b.describe());
  double norm = 1.0 - conflict;
  for (auto it = out.masses_.begin(); it != out.masses_.end();) {
    it->second /= norm;
    if (it->second == 0.0) {
      it = out.masses_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

namespace {

double bel_unchecked(const Bpa& m, const FocalSet& a) {
  double sum = 0.0;
  for (const auto& [set, mass] : m.masses()) {
    if (is_subset(set, a)) sum += mass;
  }
  return sum;
}

void check_query(const Bpa& m, const FocalSet& a) {
  if (a.frame_id() != m.frame_id() || a.width() != m.width()) throw FrameMismatchError(a.frame_id(), m.frame_id());
  if (a.none()) throw InvalidQueryError("belief query on the empty set");
}

}  // namespace

double bel(const Bpa& m, const FocalSet& a) {
  check_query(m, a);
  return clamp01(bel_unchecked(m, a));
}

double pl(const Bpa& m, const FocalSet& a) {
  check_query(m, a);
  return clamp01(1.0 - bel_unchecked(m, complement(a)));
}

BeliefInterval interval(const Bpa& m, const FocalSet& a) { return {bel(m, a), pl(m, a)}; }

Bca bca(const Bpa& m, const FrameSignature& frame, const std::vector<double>& prior) {
  if (m.frame_id() != frame.frame_id() || m.width() != frame.size()) throw FrameMismatchError(m.frame_id(), frame.frame_id());
  if (prior.size() != frame.size()) throw InvalidQueryError("prior length does not match frame '" + frame.frame_id() + "'");
  Bca out{frame.frame_id(), std::vector<double>(frame.size(), 0.0)};
  for (const auto& [set, mass] : m.masses()) {
    double prior_sum = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      if (!set.test(i)) continue;
      if (!(prior[i] > 0.0)) throw DegeneratePriorError(frame.frame_id(), frame.elements()[i]);
      prior_sum += prior[i];
    }
    for (std::size_t i = 0; i < frame.size(); ++i) {
      if (set.test(i)) out.certainty[i] += mass * prior[i] / prior_sum;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Working memory

std::string_view to_string(ClauseSide side) {
  switch (side) {
    case ClauseSide::then_side: return "THEN";
    case ClauseSide::else_side: return "ELSE";
    case ClauseSide::both: return "BOTH";
  }
  return "THEN";
}

double TriggeredRule::total_mass() const {
  double sum = 0.0;
  for (const auto& [set, m] : masses) sum += m;
  return sum;
}

EvidenceMap to_evidence_map(const EvidenceAssignment& evidence) {
  EvidenceMap out;
  for (const auto& e : evidence.entries) out[{e.frame, e.element}] = e.degree;
  return out;
}

WorkingMemory::WorkingMemory(std::shared_ptr<const KnowledgeBase> kb, EngineSettings settings)
    : kb_(std::move(kb)), settings_(settings) {
  if (!kb_) throw Error("working memory needs a knowledge base");
  for (const auto& f : kb_->frames()) frames_.push_back({Bpa::vacuous(f.signature), false, {}});
  triggered_.resize(kb_->hypotheses().size());
}

const FrameState& WorkingMemory::frame_state(std::string_view frame_id) const {
  const Frame* f = kb_->find_frame(frame_id);
  if (!f) throw UndefinedEvidenceError(std::string(frame_id));
  return frames_[f->index];
}

const std::vector<TriggeredRule>& WorkingMemory::triggered_b_rules(std::string_view hypothesis) const {
  const Hypothesis* h = kb_->find_hypothesis(hypothesis);
  if (!h) throw UnknownHypothesisError(std::string(hypothesis));
  return triggered_[h->index];
}

void WorkingMemory::set_belief(std::string_view frame_id, Bpa bpa) {
  const Frame& f = kb_->frame(frame_id);
  if (bpa.frame_id() != f.id || bpa.width() != f.signature.size()) throw FrameMismatchError(bpa.frame_id(), f.id);
  frames_[f.index].bpa = std::move(bpa);
  frames_[f.index].defined = true;
}

// ---------------------------------------------------------------------------
// Rules

double eval_antecedent(const AntecedentExpr& expr, const WorkingMemory& wm) {
  using Kind = AntecedentExpr::Kind;
  if (expr.kind == Kind::atom) {
    const Frame* f = wm.kb().find_frame(expr.frame);
    if (!f || !wm.has_belief(expr.frame)) throw UndefinedEvidenceError(expr.frame);
    auto index = f->signature.index_of(expr.value);
    if (index == FrameSignature::npos) throw UnknownElementError(f->id, expr.value);
    return bel(wm.bpa(f->id), FocalSet::singleton(f->signature, index));
  }
  std::vector<double> degrees;
  degrees.reserve(expr.operands.size());
  for (const auto& o : expr.operands) degrees.push_back(eval_antecedent(o, wm));
  if (degrees.empty()) throw InvalidQueryError("antecedent operator without operands");
  switch (expr.kind) {
    case Kind::all_of: return *std::min_element(degrees.begin(), degrees.end());
    case Kind::any_of: return *std::max_element(degrees.begin(), degrees.end());
    case Kind::negation: return clamp01(1.0 - degrees.front());
    case Kind::at_least:
    case Kind::at_most: {
      auto n = static_cast<std::size_t>(expr.count);
      int lowest = expr.kind == Kind::at_most ? 0 : 1;
      if (expr.count < lowest || n > degrees.size()) throw InvalidQueryError("min/max count out of range");
      std::sort(degrees.begin(), degrees.end(), std::greater<>());
      if (expr.kind == Kind::at_least) return degrees[n - 1];
      return n < degrees.size() ? clamp01(1.0 - degrees[n]) : 1.0;
    }
    case Kind::atom: break;
  }
  return 0.0;
}

ClauseDegrees effective_degree(const Rule& rule, const WorkingMemory& wm) {
  double base = eval_antecedent(rule.if_expr, wm);
  double defeat = rule.except_expr ? eval_antecedent(*rule.except_expr, wm) : 0.0;
  return {std::min(base, 1.0 - defeat), 1.0 - base};
}

std::optional<Bpa> rule_bpa(const Rule& rule, double then_degree, double else_degree) {
  if (rule.then_clauses.empty()) throw InvalidRuleError(rule.id, "no THEN clause");
  if (!(then_degree >= 0.0 && then_degree <= 1.0 && else_degree >= 0.0 && else_degree <= 1.0)) {
    throw InvalidRuleError(rule.id, "clause degree out of range [0, 1]");
  }
  const FocalSet& sample = rule.then_clauses.front().target;
  std::vector<std::pair<FocalSet, double>> masses;
  double total = 0.0;
  auto add = [&](const std::vector<Clause>& clauses, double degree) {
    for (const auto& c : clauses) {
      double m = c.prob * degree;
      if (m <= 0.0) continue;
      add_mass(masses, c.target, m);
      total += m;
    }
  };
  add(rule.then_clauses, then_degree);
  add(rule.else_clauses, else_degree);
  if (masses.empty()) return std::nullopt;
  if (total > 1.0 + kMassTolerance) throw InvalidRuleError(rule.id, "clause masses sum to " + format_number(total));
  double residual = 1.0 - total;
  if (residual > 0.0) add_mass(masses, whole_frame_like(sample), residual);
  return Bpa::make(sample.frame_id(), sample.width(), std::move(masses));
}

// ---------------------------------------------------------------------------
// Chaining

std::vector<std::string> frame_order(const KnowledgeBase& kb) {
  const auto& frames = kb.frames();
  std::vector<std::vector<std::size_t>> out_edges(frames.size());
  std::vector<std::size_t> in_degree(frames.size(), 0);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& r : kb.rules()) {
    std::size_t to = kb.frame(r.consequent_frame).index;
    for (const auto& f : r.antecedent_frames) {
      std::size_t from = kb.frame(f).index;
      if (edges.emplace(from, to).second) {
        out_edges[from].push_back(to);
        ++in_degree[to];
      }
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (in_degree[i] == 0) ready.push(i);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(frames[i].id);
    for (std::size_t j : out_edges[i]) {
      if (--in_degree[j] == 0) ready.push(j);
    }
  }
  if (order.size() == frames.size()) return order;

  // Walk backwards along unresolved edges until a frame repeats.
  std::vector<std::vector<std::size_t>> in_edges(frames.size());
  for (const auto& [from, to] : edges) {
    if (in_degree[from] > 0 && in_degree[to] > 0) in_edges[to].push_back(from);
  }
  std::size_t start = 0;
  while (in_degree[start] == 0) ++start;
  std::vector<std::size_t> path{start};
  std::vector<int> seen_at(frames.size(), -1);
  seen_at[start] = 0;
  for (;;) {
    std::size_t prev = in_edges[path.back()].front();
    if (seen_at[prev] >= 0) {
      // path[i + 1] feeds path[i]; prev feeds path.back().
      auto s = static_cast<std::size_t>(seen_at[prev]);
      std::vector<std::string> cycle{frames[path[s]].id};
      for (std::size_t k = path.size() - 1; k > s; --k) cycle.push_back(frames[path[k]].id);
      cycle.push_back(frames[path[s]].id);
      throw CycleError(std::move(cycle));
    }
    seen_at[prev] = static_cast<int>(path.size());
    path.push_back(prev);
  }
}

void recompute_frame(WorkingMemory& wm, const Frame& frame) {
  const KnowledgeBase& kb = wm.kb();
  const double tol = wm.settings_.conflict_tolerance;
  const double tau = wm.settings_.threshold;
  FrameState state{Bpa::vacuous(frame.signature), false, {}};
  for (const auto& h : frame.hierarchy) wm.triggered_[kb.hypothesis(h).index].clear();

  for (auto it = wm.evidence_.lower_bound({frame.id, std::string()});
       it != wm.evidence_.end() && it->first.first == frame.id; ++it) {
    auto index = frame.signature.index_of(it->first.second);
    if (index == FrameSignature::npos) throw UnknownElementError(frame.id, it->first.second);
    state.defined = true;
    Bpa support = Bpa::simple_support(frame.signature, FocalSet::singleton(frame.signature, index), it->second);
    try {
      state.bpa = combine(state.bpa, support, tol);
    } catch (const TotalConflictError& e) {
      throw TotalConflictError(e.left(), e.right(), "evidence:" + frame.id);
    }
  }

  for (const auto& rule : kb.rules()) {
    if (rule.consequent_frame != frame.id || !antecedents_defined(rule, wm)) continue;
    ClauseDegrees d = effective_degree(rule, wm);
    double base = eval_antecedent(rule.if_expr, wm);
    double then_d = d.then_degree > tau ? d.then_degree : 0.0;
    double else_d = d.else_degree > tau ? d.else_degree : 0.0;
    auto contributed = rule_bpa(rule, then_d, else_d);
    if (!contributed) continue;
    try {
      state.bpa = combine(state.bpa, *contributed, tol);
    } catch (const TotalConflictError& e) {
      throw TotalConflictError(e.left(), e.right(), rule.id);
    }
    state.defined = true;

    std::vector<std::pair<FocalSet, double>> then_masses, else_masses;
    for (const auto& c : rule.then_clauses) {
      if (double m = c.prob * then_d; m > 0.0) add_mass(then_masses, c.target, m);
    }
    for (const auto& c : rule.else_clauses) {
      if (double m = c.prob * else_d; m > 0.0) add_mass(else_masses, c.target, m);
    }
    ClauseSide side = then_masses.empty() ? ClauseSide::else_side
                      : else_masses.empty() ? ClauseSide::then_side
                                            : ClauseSide::both;
    std::vector<Observation> observations = observe(rule.if_expr, wm);
    state.history.push_back({rule.id, base, then_d, else_d, *contributed, side, observations});

    TriggeredRule* then_entry = nullptr;
    if (rule.t_role && !then_masses.empty()) {
      auto& slot = wm.triggered_[kb.hypothesis(rule.t_role->acting_hypothesis).index];
      slot.push_back({rule.id, rule.t_role->effect, ClauseSide::then_side, then_masses, observations});
      then_entry = &slot.back();
    }
    if (rule.nil_role && !else_masses.empty()) {
      if (then_entry && rule.t_role->acting_hypothesis == rule.nil_role->acting_hypothesis) {
        then_entry->clause = ClauseSide::both;
        for (const auto& [set, m] : else_masses) add_mass(then_entry->masses, set, m);
      } else {
        auto& slot = wm.triggered_[kb.hypothesis(rule.nil_role->acting_hypothesis).index];
        slot.push_back({rule.id, rule.nil_role->effect, ClauseSide::else_side, else_masses, observations});
      }
    }
  }
  wm.frames_[frame.index] = std::move(state);
}

std::vector<std::pair<std::size_t, std::string>> check_evidence(const KnowledgeBase& kb,
                                                                const std::vector<EvidenceChange>& changes) {
  std::vector<std::pair<std::size_t, std::string>> out;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const auto& c = changes[i];
    const Frame* f = kb.find_frame(c.frame);
    if (!f) {
      out.emplace_back(i, "unknown frame '" + c.frame + "'");
    } else if (!f->signature.contains(c.element)) {
      out.emplace_back(i, "unknown element '" + c.element + "' in frame '" + c.frame + "'");
    } else if (c.degree && !(*c.degree >= 0.0 && *c.degree <= 1.0)) {
      out.emplace_back(i, "degree out of range [0, 1]");
    }
  }
  return out;
}

namespace {

void require_valid(const KnowledgeBase& kb, const EvidenceMap& evidence) {
  for (const auto& [key, degree] : evidence) {
    const Frame* f = kb.find_frame(key.first);
    if (!f) throw DanglingReferenceError("frame", key.first, "evidence");
    if (!f->signature.contains(key.second)) throw UnknownElementError(key.first, key.second);
    if (!(degree >= 0.0 && degree <= 1.0)) {
      throw InvalidBpaError("evidence degree out of range for " + key.first + " " + key.second);
    }
  }
}

}  // namespace

WorkingMemory forward_chain(std::shared_ptr<const KnowledgeBase> kb, const EvidenceMap& evidence,
                            EngineSettings settings) {
  WorkingMemory wm(std::move(kb), settings);
  require_valid(wm.kb(), evidence);
  wm.evidence_ = evidence;
  for (const auto& id : frame_order(wm.kb())) recompute_frame(wm, wm.kb().frame(id));
  return wm;
}

WorkingMemory forward_chain(std::shared_ptr<const KnowledgeBase> kb, const EvidenceAssignment& evidence,
                            EngineSettings settings) {
  return forward_chain(std::move(kb), to_evidence_map(evidence), settings);
}

WorkingMemory update_evidence(const WorkingMemory& wm, const std::vector<EvidenceChange>& changes) {
  const KnowledgeBase& kb = wm.kb();
  if (auto problems = check_evidence(kb, changes); !problems.empty()) {
    const auto& c = changes[problems.front().first];
    if (!kb.find_frame(c.frame)) throw DanglingReferenceError("frame", c.frame, "evidence change");
    if (!kb.frame(c.frame).signature.contains(c.element)) throw UnknownElementError(c.frame, c.element);
    throw InvalidBpaError(problems.front().second);
  }
  WorkingMemory out = wm;
  std::set<std::string> changed;
  for (const auto& c : changes) {
    auto key = std::make_pair(c.frame, c.element);
    auto it = out.evidence_.find(key);
    if (c.degree) {
      if (it == out.evidence_.end() || it->second != *c.degree) {
        out.evidence_[key] = *c.degree;
        changed.insert(c.frame);
      }
    } else if (it != out.evidence_.end()) {
      out.evidence_.erase(it);
      changed.insert(c.frame);
    }
  }
  // Frames whose belief can move: the changed ones and everything downstream.
  std::set<std::string> affected = changed;
  std::deque<std::string> queue(changed.begin(), changed.end());
  while (!queue.empty()) {
    std::string f = queue.front();
    queue.pop_front();
    for (const auto& rid : kb.frame(f).f_rules) {
      const std::string& next = kb.rule(rid).consequent_frame;
      if (affected.insert(next).second) queue.push_back(next);
    }
  }
  if (affected.empty()) return out;
  for (const auto& id : frame_order(kb)) {
    if (affected.contains(id)) recompute_frame(out, kb.frame(id));
  }
  return out;
}

std::vector<HistoryChange> diff_histories(const WorkingMemory& before, const WorkingMemory& after) {
  std::vector<HistoryChange> out;
  for (const auto& f : after.kb().frames()) {
    const auto& old_h = before.frame_state(f.id).history;
    const auto& new_h = after.frame_state(f.id).history;
    auto find = [](const std::vector<TriggerRecord>& h, const std::string& id) -> const TriggerRecord* {
      for (const auto& r : h) {
        if (r.rule_id == id) return &r;
      }
      return nullptr;
    };
    for (const auto& r : old_h) {
      if (!find(new_h, r.rule_id)) out.push_back({f.id, r.rule_id, HistoryChange::Kind::retracted});
    }
    for (const auto& r : new_h) {
      const TriggerRecord* prev = find(old_h, r.rule_id);
      if (!prev) {
        out.push_back({f.id, r.rule_id, HistoryChange::Kind::added});
      } else if (!(*prev == r)) {
        out.push_back({f.id, r.rule_id, HistoryChange::Kind::changed});
      }
    }
  }
  return out;
}

BeliefInterval hypothesis_interval(const WorkingMemory& wm, std::string_view hypothesis) {
  const Hypothesis* h = wm.kb().find_hypothesis(hypothesis);
  if (!h) throw UnknownHypothesisError(std::string(hypothesis));
  return interval(wm.bpa(h->frame_id), h->members);
}

std::vector<RankedHypothesis> rank_diagnoses(const WorkingMemory& wm, std::string_view frame_id) {
  const Frame& frame = wm.kb().frame(frame_id);
  const Bpa& m = wm.bpa(frame.id);
  std::vector<RankedHypothesis> out;
  for (const auto& name : frame.hierarchy) {
    const Hypothesis& h = wm.kb().hypothesis(name);
    if (h.members.all()) continue;
    BeliefInterval iv = interval(m, h.members);
    if (iv.bel > 0.0) out.push_back({h.name, h.text, iv});
  }
  std::sort(out.begin(), out.end(), [](const RankedHypothesis& a, const RankedHypothesis& b) {
    if (a.interval.bel != b.interval.bel) return a.interval.bel > b.interval.bel;
    if (a.interval.pl != b.interval.pl) return a.interval.pl > b.interval.pl;
    return a.id < b.id;
  });
  return out;
}

}  // namespace gertis
