#pragma once

// Shared fixtures for the test suite: tiny constructors, slow-but-obvious
// reference implementations to test the fast paths against, and random
// generators for terms and networks.

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "slc/slc.hpp"

namespace ts {

using namespace slc;

inline TermId T(TermStore& s) { return mk_true(s); }
inline TermId F(TermStore& s) { return mk_false(s); }

// {T: p, F: 1-p}
inline TermId coin(TermStore& s, double p) {
  return s.mk_dist({{mk_true(s), p}, {mk_false(s), 1.0 - p}});
}

inline std::string samples_dir() {
  if (const char* env = std::getenv("SLC_SAMPLES_DIR")) return env;
  return "samples";
}

// The three-node diamond query ((λ (C 1 (B 1))) A) built from its compiled
// node functions: A a fair coin, B deterministic-true under A, C true unless
// both parents are false. Exact marginal: {T: 0.6, F: 0.4}.
inline TermId diamond_query(TermStore& s) {
  TermId t = mk_true(s);
  TermId f = mk_false(s);
  TermId a = s.mk_dist({{t, 0.5}, {f, 0.5}});
  TermId row_b = s.mk_dist({{t, 0.2}, {f, 0.8}});
  TermId b = s.mk_lam(s.mk_app(s.mk_app(s.mk_var(1), t), row_b));
  TermId c = s.mk_lam(s.mk_lam(s.mk_app(s.mk_app(s.mk_var(2), t), s.mk_var(1))));
  TermId body = s.mk_app(s.mk_app(c, s.mk_var(1)), s.mk_app(b, s.mk_var(1)));
  return s.mk_app(s.mk_lam(body), a);
}

// --- reference implementations (no sharing shortcuts, no level checks) ----

inline TermId naive_shift(TermStore& s, TermId t, int delta, std::uint32_t cutoff) {
  const TermNode& n = s.node(t);
  switch (n.tag) {
    case Tag::Var:
      if (n.index < cutoff) return t;
      return s.mk_var(static_cast<std::uint32_t>(static_cast<long long>(n.index) + delta));
    case Tag::Lam:
      return s.mk_lam(naive_shift(s, n.a, delta, cutoff + 1));
    case Tag::App:
      return s.mk_app(naive_shift(s, n.a, delta, cutoff), naive_shift(s, n.b, delta, cutoff));
    case Tag::Dist: {
      std::vector<DistEntry> es;
      for (const DistEntry& e : n.entries) es.push_back({naive_shift(s, e.term, delta, cutoff), e.prob});
      return s.mk_dist(std::move(es));
    }
  }
  return t;
}

inline TermId naive_subst_body(TermStore& s, TermId t, TermId arg, std::uint32_t target) {
  const TermNode& n = s.node(t);
  switch (n.tag) {
    case Tag::Var:
      if (n.index == target) return arg;  // arg is closed, no shift needed
      if (n.index > target) return s.mk_var(n.index - 1);
      return t;
    case Tag::Lam:
      return s.mk_lam(naive_subst_body(s, n.a, arg, target + 1));
    case Tag::App:
      return s.mk_app(naive_subst_body(s, n.a, arg, target),
                      naive_subst_body(s, n.b, arg, target));
    case Tag::Dist: {
      std::vector<DistEntry> es;
      for (const DistEntry& e : n.entries)
        es.push_back({naive_subst_body(s, e.term, arg, target), e.prob});
      return s.mk_dist(std::move(es));
    }
  }
  return t;
}

// β-substitute a closed argument into an abstraction, by plain recursion.
inline TermId naive_substitute(TermStore& s, TermId abstraction, TermId argument) {
  return naive_subst_body(s, s.node(abstraction).a, argument, 1);
}

inline std::uint64_t naive_count(TermStore& s, TermId t, std::uint32_t index) {
  const TermNode& n = s.node(t);
  switch (n.tag) {
    case Tag::Var:
      return n.index == index ? 1 : 0;
    case Tag::Lam:
      return naive_count(s, n.a, index + 1);
    case Tag::App:
      return naive_count(s, n.a, index) + naive_count(s, n.b, index);
    case Tag::Dist: {
      std::uint64_t c = 0;
      for (const DistEntry& e : n.entries) c += naive_count(s, e.term, index);
      return c;
    }
  }
  return 0;
}

// How many times `needle` occurs as a subterm of `haystack` (sharing ignored:
// counts tree positions).
inline std::uint64_t count_subterm(TermStore& s, TermId haystack, TermId needle) {
  if (haystack == needle) return 1;
  const TermNode& n = s.node(haystack);
  switch (n.tag) {
    case Tag::Var:
      return 0;
    case Tag::Lam:
      return count_subterm(s, n.a, needle);
    case Tag::App:
      return count_subterm(s, n.a, needle) + count_subterm(s, n.b, needle);
    case Tag::Dist: {
      std::uint64_t c = 0;
      for (const DistEntry& e : n.entries) c += count_subterm(s, e.term, needle);
      return c;
    }
  }
  return 0;
}

// --- random generators ----------------------------------------------------

// probability in [0.001, 0.999] with three decimals, so store quantization
// is exact
inline double rnd_prob(SplitMix64& rng) {
  return static_cast<double>(1 + rng.next() % 999) / 1000.0;
}

// Arbitrary term with free variables up to max_free; used for round-trip,
// fingerprint, and substitution tests. Not meant to terminate under
// evaluation.
inline TermId gen_term(TermStore& s, SplitMix64& rng, int depth, std::uint32_t max_free) {
  if (depth <= 0) {
    if (max_free > 0 && rng.next() % 2 == 0)
      return s.mk_var(1 + static_cast<std::uint32_t>(rng.next() % max_free));
    return rng.next() % 2 == 0 ? mk_true(s) : mk_false(s);
  }
  switch (rng.next() % 4) {
    case 0:
      if (max_free > 0) return s.mk_var(1 + static_cast<std::uint32_t>(rng.next() % max_free));
      [[fallthrough]];
    case 1:
      return s.mk_lam(gen_term(s, rng, depth - 1, max_free + 1));
    case 2:
      return s.mk_app(gen_term(s, rng, depth - 1, max_free),
                      gen_term(s, rng, depth - 1, max_free));
    default: {
      double p = rnd_prob(rng);
      TermId a = gen_term(s, rng, depth - 1, max_free);
      TermId b = gen_term(s, rng, depth - 1, max_free);
      if (a == b) return a;
      return s.mk_dist({{a, p}, {b, 1.0 - p}});
    }
  }
}

// Closed boolean-valued term that terminates under both laziness modes:
// built only from T, F, coins, selections, negation, conjunction, and
// let-bindings of boolean values. No recursion, so evaluation is finite.
inline TermId gen_bool_term(TermStore& s, SplitMix64& rng, int depth) {
  if (depth <= 0) {
    switch (rng.next() % 3) {
      case 0: return mk_true(s);
      case 1: return mk_false(s);
      default: return coin(s, rnd_prob(rng));
    }
  }
  switch (rng.next() % 6) {
    case 0:
      return coin(s, rnd_prob(rng));
    case 1: {  // selection (c t e)
      TermId c = gen_bool_term(s, rng, depth - 1);
      TermId t = gen_bool_term(s, rng, depth - 1);
      TermId e = gen_bool_term(s, rng, depth - 1);
      return s.mk_app(s.mk_app(c, t), e);
    }
    case 2: {  // negation (c F T)
      TermId c = gen_bool_term(s, rng, depth - 1);
      return s.mk_app(s.mk_app(c, mk_false(s)), mk_true(s));
    }
    case 3: {  // conjunction (a b F)
      TermId a = gen_bool_term(s, rng, depth - 1);
      TermId b = gen_bool_term(s, rng, depth - 1);
      return s.mk_app(s.mk_app(a, b), mk_false(s));
    }
    case 4: {  // shared binding ((λ (1 x 1)) c): both uses see one draw
      TermId x = gen_bool_term(s, rng, depth - 1);
      TermId c = gen_bool_term(s, rng, depth - 1);
      TermId body = s.mk_app(s.mk_app(s.mk_var(1), x), s.mk_var(1));
      return s.mk_app(s.mk_lam(body), c);
    }
    default: {  // single-use binding ((λ (1 x y)) c)
      TermId x = gen_bool_term(s, rng, depth - 1);
      TermId y = gen_bool_term(s, rng, depth - 1);
      TermId c = gen_bool_term(s, rng, depth - 1);
      TermId body = s.mk_app(s.mk_app(s.mk_var(1), x), y);
      return s.mk_app(s.mk_lam(body), c);
    }
  }
}

// The Y-combinator geometric coin: flip fair, stop with T on heads, recurse
// on tails.
inline TermId geometric_coin(TermStore& s) {
  TermId w = s.mk_lam(s.mk_app(s.mk_var(2), s.mk_app(s.mk_var(1), s.mk_var(1))));
  TermId y = s.mk_lam(s.mk_app(w, w));
  TermId g = s.mk_lam(s.mk_dist({{mk_true(s), 0.5}, {s.mk_var(1), 0.5}}));
  return s.mk_app(y, g);
}

// --- network generators -----------------------------------------------------

// The three-node example used throughout: A a fair root, B true whenever A
// is (and 0.2 otherwise), C the OR of A and B.
inline Network diamond_network() {
  Network net;
  net.nodes.push_back({"A", {}, {{"", 0.5}}});
  net.nodes.push_back({"B", {"A"}, {{"T", 1.0}, {"F", 0.2}}});
  net.nodes.push_back({"C", {"A", "B"}, {{"TT", 1.0}, {"TF", 1.0}, {"FT", 1.0}, {"FF", 0.0}}});
  return net;
}

inline Network random_network(SplitMix64& rng, int n) {
  Network net;
  for (int i = 0; i < n; ++i) {
    NodeDef nd;
    nd.name = "N" + std::to_string(i);
    for (int j = 0; j < i && nd.parents.size() < 3; ++j)
      if (rng.next() % 100 < 45) nd.parents.push_back("N" + std::to_string(j));
    std::size_t rows = std::size_t{1} << nd.parents.size();
    for (std::size_t r = 0; r < rows; ++r) {
      std::string key;
      for (std::size_t b = 0; b < nd.parents.size(); ++b)
        key.push_back((r >> b) & 1 ? 'T' : 'F');
      nd.cpt[key] = static_cast<double>(rng.next() % 1001) / 1000.0;
    }
    net.nodes.push_back(std::move(nd));
  }
  return net;
}

// Random query with 0-2 evidence observations; may have zero evidence
// probability — callers retry on AllMassConditioned.
inline QuerySpec random_spec(SplitMix64& rng, const Network& net) {
  QuerySpec spec;
  spec.query = net.nodes[rng.next() % net.nodes.size()].name;
  std::uint64_t n_ev = rng.next() % 3;
  for (std::uint64_t i = 0; i < n_ev; ++i) {
    const std::string& name = net.nodes[rng.next() % net.nodes.size()].name;
    if (name == spec.query) continue;
    spec.evidence[name] = rng.next() % 2 == 0;
  }
  return spec;
}

// A homogeneous Markov chain X0 -> X1 -> ... -> X{n-1}; every level shares
// the same CPT rows, so the cache sees the same branch redexes at each step.
inline Network chain_network(int n) {
  Network net;
  net.nodes.push_back({"X0", {}, {{"", 0.7}}});
  for (int i = 1; i < n; ++i)
    net.nodes.push_back({"X" + std::to_string(i),
                         {"X" + std::to_string(i - 1)},
                         {{"T", 0.7}, {"F", 0.3}}});
  return net;
}

// Exact P(X{n-1} = T) for chain_network by the scalar recurrence.
inline double chain_marginal(int n) {
  double p = 0.7;
  for (int i = 1; i < n; ++i) p = 0.7 * p + 0.3 * (1.0 - p);
  return p;
}

}  // namespace ts
