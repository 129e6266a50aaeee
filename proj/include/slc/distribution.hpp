#pragma once

// Weighted term sets as plain values. Evaluation results and the
// approximation passes use this representation for outcome mass that is not
// (or not yet) interned as a Dist node — unlike Dist nodes, a Distribution
// may carry total mass below 1 (the remainder being unresolved).

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "slc/term.hpp"

namespace slc {

struct Distribution {
  std::vector<DistEntry> entries;

  double mass() const {
    double m = 0.0;
    for (const DistEntry& e : entries) m += e.prob;
    return m;
  }

  double mass_of(TermId t) const {
    for (const DistEntry& e : entries)
      if (e.term == t) return e.prob;
    return 0.0;
  }

  // Merge duplicate terms and order entries the way the store would.
  void canonicalize(const TermStore& store) {
    std::sort(entries.begin(), entries.end(),
              [](const DistEntry& x, const DistEntry& y) { return x.term < y.term; });
    std::vector<DistEntry> merged;
    merged.reserve(entries.size());
    for (const DistEntry& e : entries) {
      if (!merged.empty() && merged.back().term == e.term)
        merged.back().prob += e.prob;
      else
        merged.push_back(e);
    }
    std::vector<std::pair<std::string, DistEntry>> keyed;
    keyed.reserve(merged.size());
    for (const DistEntry& e : merged)
      keyed.emplace_back(store.text(e.term), e);
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    entries.clear();
    for (auto& [key, e] : keyed) entries.push_back(e);
  }
};

// Total variation-style L1 distance over the union of supports.
inline double l1_distance(const Distribution& a, const Distribution& b) {
  double d = 0.0;
  for (const DistEntry& e : a.entries) d += std::abs(e.prob - b.mass_of(e.term));
  for (const DistEntry& e : b.entries)
    if (a.mass_of(e.term) == 0.0) d += e.prob;
  return d;
}

}  // namespace slc
