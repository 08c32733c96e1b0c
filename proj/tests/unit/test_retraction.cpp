#include <doctest.h>

#include <cmath>
#include <random>

#include "gertis/evidence_engine.hpp"
#include "support/fixtures.hpp"

using namespace gertis;

TEST_CASE("update_evidence equals a fresh forward_chain") {
  auto kb = fixtures::sample_kb();
  std::vector<const Frame*> frames;
  for (const auto& f : kb->frames()) frames.push_back(&f);
  std::mt19937_64 rng(42);
  const double grid[] = {0.0, 0.25, 0.5, 0.7, 0.9, 1.0};
  auto random_change = [&]() {
    const Frame& f = *frames[rng() % frames.size()];
    EvidenceChange c{f.id, f.signature.elements()[rng() % f.signature.size()], std::nullopt};
    if (rng() % 4 != 0) c.degree = rng() % 2 ? grid[rng() % 6] : std::uniform_real_distribution<double>(0, 1)(rng);
    return c;
  };

  int conflicts = 0;
  for (int sequence = 0; sequence < 200; ++sequence) {
    WorkingMemory wm = forward_chain(kb, EvidenceMap{});
    for (int step = 0; step < 12; ++step) {
      std::vector<EvidenceChange> changes;
      for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) changes.push_back(random_change());
      EvidenceMap next = wm.evidence();
      for (const auto& c : changes) {
        if (c.degree) {
          next[{c.frame, c.element}] = *c.degree;
        } else {
          next.erase({c.frame, c.element});
        }
      }
      std::optional<WorkingMemory> fresh;
      try {
        fresh = forward_chain(kb, next);
      } catch (const TotalConflictError&) {
        ++conflicts;
        REQUIRE_THROWS_AS(update_evidence(wm, changes), TotalConflictError);
        continue;
      }
      WorkingMemory updated = update_evidence(wm, changes);
      std::string problem = fixtures::memory_difference(updated, *fresh);
      REQUIRE_MESSAGE(problem.empty(), "sequence " << sequence << " step " << step << ": " << problem);
      // Recomputation replays the same operations in the same order.
      REQUIRE(updated == *fresh);
      wm = std::move(updated);
    }
  }
  MESSAGE("sequences hitting total conflict: " << conflicts);
}

TEST_CASE("unchanged evidence leaves the memory identical") {
  auto kb = fixtures::sample_kb();
  WorkingMemory wm = forward_chain(kb, fixtures::evidence_file("data/E4"));
  std::vector<EvidenceChange> same;
  for (const auto& [key, degree] : wm.evidence()) same.push_back({key.first, key.second, degree});
  CHECK(update_evidence(wm, same) == wm);
  CHECK(diff_histories(wm, update_evidence(wm, same)).empty());
}

TEST_CASE("retracting evidence withdraws the rule's conclusion") {
  auto kb = fixtures::sample_kb();
  WorkingMemory wm = forward_chain(kb, fixtures::evidence_file("data/E4"));
  WorkingMemory after = update_evidence(wm, {{"RE000042", "negative", std::nullopt}});
  CHECK(after.triggered_b_rules("Ne").empty());
  CHECK(hypothesis_interval(after, "Ne").bel == 0.0);
  CHECK(hypothesis_interval(after, "Rh").bel == doctest::Approx(0.56));
  auto diff = diff_histories(wm, after);
  REQUIRE(diff.size() == 1);
  CHECK(diff[0].rule_id == "Rule1");
  CHECK(diff[0].kind == HistoryChange::Kind::retracted);
}
