#pragma once

// Approximate inference: low-probability pruning, the improper β mode, and
// Monte-Carlo sampling. Fuel-bounded evaluation — the fixed-recursion-depth
// approximation — lives in the evaluator's fuel mechanism; the wrappers here
// just pick the configuration.

#include <cstdint>
#include <optional>
#include <vector>

#include "slc/distribution.hpp"
#include "slc/errors.hpp"
#include "slc/evaluator.hpp"
#include "slc/reductions.hpp"
#include "slc/term.hpp"

namespace slc {

// Drop entries with probability < epsilon and renormalize the survivors.
// If everything falls below the threshold the largest entry is kept, so the
// result is never empty. Returns the renormalized distribution and the mass
// that was dropped (measured before renormalization).
inline std::pair<Distribution, double> prune(const Distribution& d, double epsilon) {
  if (d.entries.empty())
    throw Error(ErrorKind::EmptyDistribution, "prune needs a nonempty distribution");
  if (!(epsilon >= 0.0) || epsilon >= 1.0)
    throw Error(ErrorKind::InvalidProbability, "epsilon must lie in [0, 1)");

  Distribution kept;
  double dropped = 0.0;
  for (const DistEntry& e : d.entries) {
    if (e.prob < epsilon)
      dropped += e.prob;
    else
      kept.entries.push_back(e);
  }
  if (kept.entries.empty()) {
    const DistEntry* largest = &d.entries[0];
    for (const DistEntry& e : d.entries)
      if (e.prob > largest->prob) largest = &e;
    kept.entries.push_back(*largest);
    dropped -= largest->prob;
  }
  double mass = kept.mass();
  for (DistEntry& e : kept.entries) e.prob /= mass;
  return {std::move(kept), dropped};
}

// Evaluation with branch pruning: a branch is abandoned (its mass reported
// as unknown) once its cumulative probability falls below prune_epsilon.
inline EvalResult eval_pruned(TermStore& store, TermId t, EvalConfig cfg,
                              EvalCache* cache = nullptr) {
  return Evaluator(store, cfg, cache).run(t);
}

// Evaluation under the independence assumption: β substitutes distribution
// arguments even into bodies that use them more than once.
inline EvalResult eval_improper(TermStore& store, TermId t, EvalConfig cfg = {},
                                EvalCache* cache = nullptr) {
  cfg.improper_beta = true;
  return Evaluator(store, cfg, cache).run(t);
}

// The sampling RNG. SplitMix64 — the stream is part of the external
// contract: identical seeds reproduce identical samples across runs and
// versions.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 usable bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct SampleStats {
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  Distribution estimate;
  std::optional<double> l1_to_exact;
};

namespace detail {

struct Sampler {
  TermStore& s;
  SplitMix64& rng;
  std::uint64_t fuel_left;
  bool bounded;

  TermId draw(const std::vector<DistEntry>& entries) {
    double u = rng.uniform();
    double acc = 0.0;
    for (const DistEntry& e : entries) {
      acc += e.prob;
      if (u < acc) return e.term;
    }
    return entries.back().term;
  }

  void spend() {
    if (!bounded) return;
    if (fuel_left == 0)
      throw Error(ErrorKind::FuelExhausted, "sampling ran out of fuel");
    --fuel_left;
  }

  TermId sample(TermId t) {
    const TermNode& n = s.node(t);
    switch (n.tag) {
      case Tag::Lam:
        return t;
      case Tag::Var:
        throw Error(ErrorKind::FreeVariable, "free variable reached during sampling");
      case Tag::Dist:
        return sample(draw(n.entries));
      case Tag::App:
        return apply(sample(n.a), n.b);
    }
    throw Error(ErrorKind::FreeVariable, "corrupt term");
  }

  // Mirror of the evaluator's papply with every distribution expansion
  // replaced by a single weighted draw; fuel counts β steps.
  TermId apply(TermId f, TermId a) {
    if (s.node(f).tag != Tag::Lam)
      throw Error(ErrorKind::NotAFunction, "operator is not a function");
    const TermNode& an = s.node(a);
    switch (an.tag) {
      case Tag::Var:
        throw Error(ErrorKind::FreeVariable, "free variable reached during sampling");
      case Tag::Lam:
        spend();
        return sample(substitute(s, f, a));
      case Tag::Dist:
        return apply(f, draw(an.entries));
      case Tag::App: {
        const TermNode& fn = s.node(f);
        if (an.dist_free || count_occurrences(s, fn.a, 1) <= 1) {
          spend();
          return sample(substitute(s, f, a));
        }
        return apply(f, sample(a));
      }
    }
    throw Error(ErrorKind::NotAFunction, "corrupt term");
  }
};

inline std::uint64_t per_sample_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

}  // namespace detail

constexpr std::uint64_t kUnlimitedSampleFuel = ~std::uint64_t{0};

inline TermId mc_sample_one(TermStore& store, TermId t, SplitMix64& rng,
                            std::uint64_t fuel = kUnlimitedSampleFuel) {
  if (store.level(t) != 0)
    throw Error(ErrorKind::FreeVariable, "sampling is defined for closed terms only");
  detail::Sampler sampler{store, rng, fuel, fuel != kUnlimitedSampleFuel};
  return sampler.sample(t);
}

// n samples, each drawn from its own generator derived from (seed, index),
// so a parallel run would aggregate to the identical result.
inline SampleStats mc_estimate(TermStore& store, TermId t, std::uint64_t n,
                               std::uint64_t seed,
                               std::uint64_t fuel = kUnlimitedSampleFuel,
                               const Distribution* exact = nullptr) {
  if (n == 0) throw Error(ErrorKind::TooLarge, "sample count must be at least 1");
  SampleStats st;
  st.samples = n;
  st.seed = seed;
  std::unordered_map<TermId, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < n; ++i) {
    SplitMix64 rng(detail::per_sample_seed(seed, i));
    counts[mc_sample_one(store, t, rng, fuel)] += 1;
  }
  for (const auto& [term, count] : counts)
    st.estimate.entries.push_back({term, static_cast<double>(count) / static_cast<double>(n)});
  st.estimate.canonicalize(store);
  if (exact) st.l1_to_exact = l1_distance(st.estimate, *exact);
  return st;
}

}  // namespace slc
