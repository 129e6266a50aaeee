#pragma once

// Weak-head evaluation of closed stochastic λ-terms.
//
// peval evaluates left-outermost first: the operator of an application is
// reduced to weak head normal form, then papply dispatches on the operand —
// a λ is β-substituted, a distribution triggers γ_R, and an application is
// evaluated eagerly in Eager mode, or β-substituted unevaluated in Lazy mode
// when the guard admits it. Distributions evaluate entrywise into one
// weighted sum.
// A result is a sub-distribution over Lam nodes plus the mass whose
// evaluation ran out of fuel or was pruned away (unknown_mass).
//
// Fuel counts β/γ_L/γ_R applications. When a branch exhausts its fuel, its
// mass moves to unknown_mass and the sibling branches continue; strict_fuel
// upgrades exhaustion to an error. Pruning compares the cumulative mass of a
// branch (path probability times entry probability) against prune_epsilon at
// every point where a distribution expands — γ reductions and weighted sums
// alike — which is what lets probabilistically-terminating recursions like
// the geometric coin come back with a bounded unknown mass instead of
// looping. Pruned evaluation never caches.
//
// Every γ branch is interned as a real application term and re-enters
// evaluation through the cache, so repeated subproblems (the variable-
// elimination pattern in compiled network chains) are evaluated once. Trace
// steps are recorded with materialized before/after terms whenever the
// participating sets are fully resolved; branches with unknown mass keep
// counting steps but skip the trace record, since their distributions cannot
// be written down as normalized terms.

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "slc/distribution.hpp"
#include "slc/errors.hpp"
#include "slc/reductions.hpp"
#include "slc/term.hpp"

namespace slc {

// How application operands are handled: Eager always evaluates the operand
// to a distribution first; Lazy substitutes it unevaluated whenever that
// cannot change the outcome (the operand cannot produce a distribution, or
// the bound variable occurs at most once).
enum class Laziness { Eager, Lazy };

struct EvalConfig {
  static constexpr std::uint64_t kUnlimited = ~std::uint64_t{0};

  std::uint64_t fuel = kUnlimited;  // number of β/γ steps permitted
  Laziness laziness = Laziness::Lazy;
  bool improper_beta = false;
  double prune_epsilon = 0.0;  // 0 disables pruning
  bool cache = true;
  bool trace = false;
  bool strict_fuel = false;  // exhaustion throws instead of reporting unknown mass
};

struct TraceStep {
  RedexKind kind;
  TermId before;
  TermId after;
};

struct EvalResult {
  Distribution outcome;  // over Lam nodes; mass 1 - unknown_mass
  double unknown_mass = 0.0;
  std::uint64_t steps_used = 0;
  std::uint64_t cache_hits = 0;
  std::vector<TraceStep> trace;
};

// Complete results keyed by (term, laziness, improper_beta). Only exact,
// fully resolved outcomes are stored: partial results depend on how much
// fuel was left and would poison later lookups. Insertion is idempotent —
// identical keys always carry identical outcomes — so concurrent races are
// benign.
class EvalCache {
 public:
  std::optional<std::vector<DistEntry>> lookup(TermId t, Laziness laziness,
                                               bool improper) const {
    std::lock_guard lock(mutex_);
    auto it = map_.find(key(t, laziness, improper));
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  void store_result(TermId t, Laziness laziness, bool improper,
                    const std::vector<DistEntry>& entries) {
    std::lock_guard lock(mutex_);
    map_.emplace(key(t, laziness, improper), entries);
  }

  void clear() {
    std::lock_guard lock(mutex_);
    map_.clear();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return map_.size();
  }

 private:
  static std::uint64_t key(TermId t, Laziness laziness, bool improper) {
    return std::uint64_t{t.value()} |
           (std::uint64_t{laziness == Laziness::Lazy} << 32) |
           (std::uint64_t{improper} << 33);
  }

  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::vector<DistEntry>> map_;
};

class Evaluator {
 public:
  Evaluator(TermStore& store, EvalConfig cfg, EvalCache* cache = nullptr)
      : store_(store), cfg_(cfg), cache_(cache ? cache : &own_cache_) {
    if (!(cfg_.prune_epsilon >= 0.0) || cfg_.prune_epsilon >= 1.0)
      throw Error(ErrorKind::InvalidProbability, "prune_epsilon must lie in [0, 1)");
    if (cfg_.fuel == 0)
      throw Error(ErrorKind::FuelExhausted, "bounded fuel must be at least 1");
    bounded_ = cfg_.fuel != EvalConfig::kUnlimited;
    fuel_left_ = cfg_.fuel;
    caching_ = cfg_.cache && cfg_.prune_epsilon == 0.0;
  }

  EvalResult run(TermId t) {
    if (store_.level(t) != 0)
      throw Error(ErrorKind::FreeVariable, "evaluation is defined for closed terms only");
    Outcome o = eval_term(t, 1.0);
    EvalResult r;
    r.outcome.entries = std::move(o.entries);
    r.outcome.canonicalize(store_);
    r.unknown_mass = o.unknown;
    r.steps_used = steps_;
    r.cache_hits = hits_;
    r.trace = std::move(trace_);
    return r;
  }

 private:
  struct Outcome {
    std::vector<DistEntry> entries;
    double unknown = 0.0;

    double mass() const {
      double m = 0.0;
      for (const DistEntry& e : entries) m += e.prob;
      return m;
    }
  };

  Outcome eval_term(TermId t, double path) {
    const TermNode& n = store_.node(t);
    switch (n.tag) {
      case Tag::Lam:
        return Outcome{{{t, 1.0}}, 0.0};
      case Tag::Var:
        throw Error(ErrorKind::FreeVariable, "free variable reached during evaluation");
      case Tag::Dist: {
        if (auto hit = cache_lookup(t)) return std::move(*hit);
        Outcome acc;
        for (const DistEntry& e : n.entries) {
          if (below_threshold(path, e.prob)) {
            acc.unknown += e.prob;
            continue;
          }
          accumulate(acc, eval_term(e.term, path * e.prob), e.prob);
        }
        settle(acc);
        cache_store(t, acc);
        return acc;
      }
      case Tag::App: {
        if (auto hit = cache_lookup(t)) return std::move(*hit);
        Outcome f = eval_term(n.a, path);
        Outcome acc = apply_outcome(f, n.b, path);
        settle(acc);
        cache_store(t, acc);
        return acc;
      }
    }
    throw Error(ErrorKind::FreeVariable, "corrupt term");
  }

  // Apply an evaluated operator to a (possibly unevaluated) operand.
  Outcome apply_outcome(const Outcome& f, TermId a, double path) {
    Outcome acc;
    acc.unknown = f.unknown;
    if (f.entries.empty()) return acc;

    if (f.entries.size() == 1) {
      const DistEntry& only = f.entries[0];
      accumulate(acc, apply_one(only.term, a, path * only.prob), only.prob);
      return acc;
    }

    // γ_L: the operator resolved to a proper distribution over functions.
    if (!fuel_available()) {
      exhaust(acc, f.mass());
      return acc;
    }
    if (cfg_.trace && f.unknown == 0.0) {
      TermId before = store_.mk_app(store_.mk_dist(f.entries), a);
      std::vector<DistEntry> branches;
      branches.reserve(f.entries.size());
      for (const DistEntry& e : f.entries) branches.push_back({store_.mk_app(e.term, a), e.prob});
      note_step(RedexKind::GammaL, before, store_.mk_dist(std::move(branches)));
    } else {
      note_step(RedexKind::GammaL);
    }
    for (const DistEntry& e : f.entries) {
      if (below_threshold(path, e.prob)) {
        acc.unknown += e.prob;
        continue;
      }
      TermId branch = store_.mk_app(e.term, a);
      accumulate(acc, eval_term(branch, path * e.prob), e.prob);
    }
    return acc;
  }

  // f is weak-head normal; dispatch on the operand.
  Outcome apply_one(TermId f, TermId a, double path) {
    const TermNode& fn = store_.node(f);
    if (fn.tag != Tag::Lam)
      throw Error(ErrorKind::NotAFunction, "operator is not a function");
    const TermNode& an = store_.node(a);
    switch (an.tag) {
      case Tag::Var:
        throw Error(ErrorKind::FreeVariable, "free variable reached during evaluation");
      case Tag::Lam:
        return beta_step(f, a, path);
      case Tag::Dist:
        if (cfg_.improper_beta) return beta_step(f, a, path);
        return gamma_r_branches(f, an.entries, /*resolved=*/true, path);
      case Tag::App: {
        if (cfg_.laziness == Laziness::Lazy &&
            (cfg_.improper_beta || lazy_beta_admissible(fn.a, a)))
          return beta_step(f, a, path);
        Outcome av = eval_term(a, path);
        return apply_evaluated(f, av, path);
      }
    }
    throw Error(ErrorKind::NotAFunction, "corrupt term");
  }

  // The lazy-mode β guard: substitute an operand application without
  // evaluating it when it cannot carry correlation into the body.
  bool lazy_beta_admissible(TermId body, TermId arg) {
    if (store_.node(arg).dist_free) return true;
    return count_occurrences(store_, body, 1) <= 1;
  }

  // The operand was evaluated eagerly; feed its outcome back into the
  // application.
  Outcome apply_evaluated(TermId f, const Outcome& av, double path) {
    Outcome acc;
    acc.unknown = av.unknown;
    if (av.entries.empty()) return acc;

    if (av.entries.size() == 1) {
      const DistEntry& only = av.entries[0];
      accumulate(acc, apply_one(f, only.term, path * only.prob), only.prob);
      return acc;
    }

    if (cfg_.improper_beta) {
      // Substitute the evaluated distribution wholesale; its instances in
      // the body become independent draws.
      double mass = av.mass();
      std::vector<DistEntry> scaled = av.entries;
      for (DistEntry& e : scaled) e.prob /= mass;
      TermId d = store_.mk_dist(std::move(scaled));
      accumulate(acc, beta_step(f, d, path * mass), mass);
      return acc;
    }

    Outcome sub = gamma_r_branches(f, av.entries, av.unknown == 0.0, path);
    acc.entries = std::move(sub.entries);
    acc.unknown += sub.unknown;
    return acc;
  }

  Outcome gamma_r_branches(TermId f, const std::vector<DistEntry>& entries,
                           bool resolved, double path) {
    Outcome acc;
    if (!fuel_available()) {
      double m = 0.0;
      for (const DistEntry& e : entries) m += e.prob;
      exhaust(acc, m);
      return acc;
    }
    if (cfg_.trace && resolved) {
      TermId before = store_.mk_app(f, store_.mk_dist(entries));
      std::vector<DistEntry> branches;
      branches.reserve(entries.size());
      for (const DistEntry& e : entries) branches.push_back({store_.mk_app(f, e.term), e.prob});
      note_step(RedexKind::GammaR, before, store_.mk_dist(std::move(branches)));
    } else {
      note_step(RedexKind::GammaR);
    }
    for (const DistEntry& e : entries) {
      if (below_threshold(path, e.prob)) {
        acc.unknown += e.prob;
        continue;
      }
      TermId branch = store_.mk_app(f, e.term);
      accumulate(acc, eval_term(branch, path * e.prob), e.prob);
    }
    return acc;
  }

  Outcome beta_step(TermId f, TermId a, double path) {
    Outcome acc;
    if (!fuel_available()) {
      exhaust(acc, 1.0);
      return acc;
    }
    TermId result = substitute(store_, f, a);
    if (cfg_.trace)
      note_step(RedexKind::Beta, store_.mk_app(f, a), result);
    else
      note_step(RedexKind::Beta);
    return eval_term(result, path);
  }

  // --- bookkeeping -------------------------------------------------------

  bool below_threshold(double path, double prob) const {
    return cfg_.prune_epsilon > 0.0 && path * prob < cfg_.prune_epsilon;
  }

  bool fuel_available() const { return !bounded_ || fuel_left_ > 0; }

  void exhaust(Outcome& acc, double mass) {
    if (cfg_.strict_fuel)
      throw Error(ErrorKind::FuelExhausted, "evaluation ran out of fuel");
    acc.unknown += mass;
  }

  void note_step(RedexKind kind) {
    ++steps_;
    if (bounded_) --fuel_left_;
    (void)kind;
  }

  void note_step(RedexKind kind, TermId before, TermId after) {
    ++steps_;
    if (bounded_) --fuel_left_;
    trace_.push_back({kind, before, after});
  }

  static void accumulate(Outcome& acc, const Outcome& sub, double weight) {
    for (const DistEntry& e : sub.entries) acc.entries.push_back({e.term, e.prob * weight});
    acc.unknown += sub.unknown * weight;
  }

  // Merge duplicate outcome terms; keep a deterministic internal order.
  static void settle(Outcome& acc) {
    if (acc.entries.size() < 2) return;
    std::sort(acc.entries.begin(), acc.entries.end(),
              [](const DistEntry& x, const DistEntry& y) { return x.term < y.term; });
    std::vector<DistEntry> merged;
    merged.reserve(acc.entries.size());
    for (const DistEntry& e : acc.entries) {
      if (!merged.empty() && merged.back().term == e.term)
        merged.back().prob += e.prob;
      else
        merged.push_back(e);
    }
    acc.entries = std::move(merged);
  }

  std::optional<Outcome> cache_lookup(TermId t) {
    if (!caching_) return std::nullopt;
    auto hit = cache_->lookup(t, cfg_.laziness, cfg_.improper_beta);
    if (!hit) return std::nullopt;
    ++hits_;
    return Outcome{std::move(*hit), 0.0};
  }

  void cache_store(TermId t, const Outcome& o) {
    if (!caching_ || o.unknown != 0.0) return;
    cache_->store_result(t, cfg_.laziness, cfg_.improper_beta, o.entries);
  }

  TermStore& store_;
  EvalConfig cfg_;
  EvalCache own_cache_;  // used when the caller shares none
  EvalCache* cache_;
  bool bounded_ = false;
  bool caching_ = true;
  std::uint64_t fuel_left_ = 0;
  std::uint64_t steps_ = 0;
  std::uint64_t hits_ = 0;
  std::vector<TraceStep> trace_;
};

inline EvalResult peval(TermStore& store, TermId t, EvalConfig cfg = {}) {
  return Evaluator(store, cfg).run(t);
}

inline EvalResult eval_cached(TermStore& store, TermId t, EvalConfig cfg, EvalCache& cache) {
  return Evaluator(store, cfg, &cache).run(t);
}

// Apply an already-evaluated operator term to an operand under cfg. Purely a
// convenience: the application is interned and evaluated as usual.
inline EvalResult papply(TermStore& store, TermId f, TermId a, EvalConfig cfg = {}) {
  return peval(store, store.mk_app(f, a), cfg);
}

// One bottom-up pass collapsing every η-redex whose guards hold. The
// default evaluator never η-reduces; this is the explicit normalization
// entry point (CLI --eta).
inline TermId normalize_eta(TermStore& s, TermId t) {
  const TermNode& n = s.node(t);
  switch (n.tag) {
    case Tag::Var:
      return t;
    case Tag::Lam: {
      TermId body = normalize_eta(s, n.a);
      const TermNode& bn = s.node(body);
      if (bn.tag == Tag::App) {
        const TermNode& operand = s.node(bn.b);
        if (operand.tag == Tag::Var && operand.index == 1 &&
            count_occurrences(s, bn.a, 1) == 0 && s.distribution_free(bn.a))
          return shift(s, bn.a, -1, 1);
      }
      return s.mk_lam(body);
    }
    case Tag::App:
      return s.mk_app(normalize_eta(s, n.a), normalize_eta(s, n.b));
    case Tag::Dist: {
      std::vector<DistEntry> es;
      es.reserve(n.entries.size());
      for (const DistEntry& e : n.entries) es.push_back({normalize_eta(s, e.term), e.prob});
      return s.mk_dist(std::move(es));
    }
  }
  return t;
}

}  // namespace slc
