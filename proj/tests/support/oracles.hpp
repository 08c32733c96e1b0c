#pragma once

// Reference implementations used only by tests. They work on plain name sets
// and dense subset masks, with no code shared with the library.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gertis/evidence_engine.hpp"

namespace oracle {

using NameSet = std::set<std::string>;

inline NameSet names_of(const gertis::FocalSet& s, const gertis::FrameSignature& sig) {
  NameSet out;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (s.test(i)) out.insert(sig.elements()[i]);
  }
  return out;
}

inline NameSet set_intersection(const NameSet& a, const NameSet& b) {
  NameSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

inline NameSet set_union(const NameSet& a, const NameSet& b) {
  NameSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

inline NameSet set_complement(const NameSet& a, const std::vector<std::string>& universe) {
  NameSet out;
  for (const auto& e : universe) {
    if (!a.contains(e)) out.insert(e);
  }
  return out;
}

inline bool set_includes(const NameSet& sub, const NameSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

// Sum of 2^i over the positions of the named elements, written in decimal by
// schoolbook doubling so it is independent of the library's word layout.
inline std::string decimal_code(const NameSet& names, const std::vector<std::string>& universe) {
  std::string digits = "0";
  for (std::size_t i = universe.size(); i-- > 0;) {
    int carry = names.contains(universe[i]) ? 1 : 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
      int d = (*it - '0') * 2 + carry;
      *it = static_cast<char>('0' + d % 10);
      carry = d / 10;
    }
    if (carry) digits.insert(digits.begin(), static_cast<char>('0' + carry));
  }
  return digits;
}

// Dense mass vector indexed by subset mask, frames of up to 16 elements.
struct DenseBpa {
  int n = 0;
  std::vector<double> m;
};

inline DenseBpa dense(const gertis::Bpa& b) {
  DenseBpa out{static_cast<int>(b.width()), std::vector<double>(std::size_t{1} << b.width(), 0.0)};
  for (const auto& [set, mass] : b.masses()) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < b.width(); ++i) {
      if (set.test(i)) mask |= 1u << i;
    }
    out.m[mask] += mass;
  }
  return out;
}

// Dempster's rule by enumerating every ordered pair of subsets.
inline DenseBpa dempster(const DenseBpa& a, const DenseBpa& b) {
  DenseBpa out{a.n, std::vector<double>(a.m.size(), 0.0)};
  double conflict = 0.0;
  for (std::size_t x = 0; x < a.m.size(); ++x) {
    for (std::size_t y = 0; y < b.m.size(); ++y) {
      double p = a.m[x] * b.m[y];
      if ((x & y) == 0) {
        conflict += p;
      } else {
        out.m[x & y] += p;
      }
    }
  }
  for (auto& v : out.m) v /= 1.0 - conflict;
  return out;
}

inline double dense_bel(const DenseBpa& b, std::uint32_t query) {
  double s = 0.0;
  for (std::uint32_t x = 1; x < b.m.size(); ++x) {
    if ((x & ~query) == 0) s += b.m[x];
  }
  return s;
}

inline double dense_pl(const DenseBpa& b, std::uint32_t query) {
  double s = 0.0;
  for (std::uint32_t x = 1; x < b.m.size(); ++x) {
    if (x & query) s += b.m[x];
  }
  return s;
}

inline gertis::FrameSignature frame_of_size(std::size_t n, const std::string& id = "F") {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i));
  return gertis::FrameSignature(id, names);
}

inline gertis::FocalSet random_set(std::mt19937_64& rng, const gertis::FrameSignature& sig, bool nonempty) {
  while (true) {
    gertis::FocalSet s = gertis::FocalSet::empty(sig);
    for (std::size_t i = 0; i < sig.size(); ++i) {
      if (rng() & 1) s.set(i);
    }
    if (!nonempty || !s.none()) return s;
  }
}

// Up to `max_focal` random focal sets with random masses summing to 1.
inline gertis::Bpa random_bpa(std::mt19937_64& rng, const gertis::FrameSignature& sig, int max_focal = 5) {
  std::uniform_int_distribution<int> count(1, max_focal);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  int k = count(rng);
  std::vector<std::pair<gertis::FocalSet, double>> pairs;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double w = weight(rng);
    pairs.emplace_back(random_set(rng, sig, true), w);
    total += w;
  }
  for (auto& p : pairs) p.second /= total;
  return gertis::Bpa::make(sig, std::move(pairs));
}

// "At least n of the degrees hold": best n-element selection, scored by its
// weakest member. Enumerates all selections.
inline double at_least_by_selection(const std::vector<double>& degrees, int n) {
  if (n <= 0) return 1.0;
  int k = static_cast<int>(degrees.size());
  if (n > k) return 0.0;
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    double weakest = 1.0;
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) weakest = std::min(weakest, degrees[i]);
    }
    best = std::max(best, weakest);
  }
  return best;
}

}  // namespace oracle
