#pragma once

// The rewrite rules, driven everywhere by the cached level values:
//
//   β    ((lam e1) e2)      -> e1[1 := e2]          guarded, see beta()
//   γ_L  ({f_i: p_i} e)     -> {(f_i e): p_i}
//   γ_R  (f {e_i: p_i})     -> {(f e_i): p_i}
//   η    (lam (e 1))        -> e                     1 not free in e, e dist-free
//
// substitute() is the level-guided recursion: any subterm whose level sits
// below the index being replaced contains no occurrence of it and is
// returned as-is, so unchanged subtrees keep their TermId (and with it every
// cache entry keyed on them).

#include <cstdint>
#include <vector>

#include "slc/errors.hpp"
#include "slc/term.hpp"

namespace slc {

enum class RedexKind { Beta, GammaL, GammaR, Eta };

inline const char* to_string(RedexKind k) {
  switch (k) {
    case RedexKind::Beta: return "beta";
    case RedexKind::GammaL: return "gamma_L";
    case RedexKind::GammaR: return "gamma_R";
    case RedexKind::Eta: return "eta";
  }
  return "?";
}

// Number of free occurrences of `index` in t.
inline std::uint64_t count_occurrences(const TermStore& s, TermId t, std::uint32_t index) {
  const TermNode& n = s.node(t);
  if (n.level < index) return 0;  // nothing that deep occurs free
  switch (n.tag) {
    case Tag::Var:
      return n.index == index ? 1 : 0;
    case Tag::Lam:
      return count_occurrences(s, n.a, index + 1);
    case Tag::App:
      return count_occurrences(s, n.a, index) + count_occurrences(s, n.b, index);
    case Tag::Dist: {
      std::uint64_t c = 0;
      for (const DistEntry& e : n.entries) c += count_occurrences(s, e.term, index);
      return c;
    }
  }
  return 0;
}

inline bool distribution_free(const TermStore& s, TermId t) {
  return s.distribution_free(t);
}

// Add delta to every free variable with index >= cutoff.
inline TermId shift(TermStore& s, TermId t, std::int64_t delta, std::uint32_t cutoff) {
  const TermNode& n = s.node(t);
  if (n.level < cutoff) return t;
  switch (n.tag) {
    case Tag::Var: {
      std::int64_t moved = static_cast<std::int64_t>(n.index) + delta;
      if (moved < 1)
        throw Error(ErrorKind::IndexUnderflow, "shift drives a free variable below index 1");
      return s.mk_var(static_cast<std::uint32_t>(moved));
    }
    case Tag::Lam:
      return s.mk_lam(shift(s, n.a, delta, cutoff + 1));
    case Tag::App:
      return s.mk_app(shift(s, n.a, delta, cutoff), shift(s, n.b, delta, cutoff));
    case Tag::Dist: {
      std::vector<DistEntry> es;
      es.reserve(n.entries.size());
      for (const DistEntry& e : n.entries) es.push_back({shift(s, e.term, delta, cutoff), e.prob});
      return s.mk_dist(std::move(es));
    }
  }
  return t;
}

namespace detail {

inline TermId subst(TermStore& s, TermId t, TermId arg, std::uint32_t target) {
  const TermNode& n = s.node(t);
  if (n.level < target) return t;  // the fast path: reuse the whole subtree
  switch (n.tag) {
    case Tag::Var:
      if (n.index == target) return arg;  // arg is closed; no shift needed
      return s.mk_var(n.index - 1);       // one binder below it disappeared
    case Tag::Lam:
      return s.mk_lam(subst(s, n.a, arg, target + 1));
    case Tag::App:
      return s.mk_app(subst(s, n.a, arg, target), subst(s, n.b, arg, target));
    case Tag::Dist: {
      std::vector<DistEntry> es;
      es.reserve(n.entries.size());
      for (const DistEntry& e : n.entries) es.push_back({subst(s, e.term, arg, target), e.prob});
      return s.mk_dist(std::move(es));  // re-merges if branches collapsed together
    }
  }
  return t;
}

}  // namespace detail

inline TermId substitute(TermStore& s, TermId abstraction, TermId argument) {
  const TermNode& n = s.node(abstraction);
  if (n.tag != Tag::Lam)
    throw Error(ErrorKind::NotAnAbstraction, "substitute expects a lam node");
  if (s.level(argument) != 0)
    throw Error(ErrorKind::NonClosedArgument, "substitution argument must be closed");
  return detail::subst(s, n.a, argument, 1);
}

// β with the decidable stand-in for "the argument cannot reduce to a
// distribution": allowed when the argument is already weak-head normal, or
// contains no distribution at all, or the bound variable occurs at most once
// (a single instance cannot be correlated with anything). `improper` waives
// the guard and accepts the independence assumption that comes with it.
inline TermId beta(TermStore& s, TermId app, bool improper = false) {
  const TermNode& n = s.node(app);
  if (n.tag != Tag::App)
    throw Error(ErrorKind::NotBetaRedex, "beta expects an application");
  const TermNode& f = s.node(n.a);
  if (f.tag != Tag::Lam)
    throw Error(ErrorKind::NotBetaRedex, "beta expects a lam in operator position");
  if (!improper) {
    const TermNode& arg = s.node(n.b);
    bool ok = arg.tag == Tag::Lam || arg.dist_free ||
              count_occurrences(s, f.a, 1) <= 1;
    if (!ok)
      throw Error(ErrorKind::GuardViolation,
                  "argument may reduce to a distribution and is used more than once");
  }
  return substitute(s, n.a, n.b);
}

inline TermId gamma_l(TermStore& s, TermId app) {
  const TermNode& n = s.node(app);
  if (n.tag != Tag::App)
    throw Error(ErrorKind::NotGammaLRedex, "gamma_L expects an application");
  const TermNode& d = s.node(n.a);
  if (d.tag != Tag::Dist)
    throw Error(ErrorKind::NotGammaLRedex, "gamma_L expects a distribution in operator position");
  std::vector<DistEntry> es;
  es.reserve(d.entries.size());
  for (const DistEntry& e : d.entries) es.push_back({s.mk_app(e.term, n.b), e.prob});
  return s.mk_dist(std::move(es));
}

inline TermId gamma_r(TermStore& s, TermId app) {
  const TermNode& n = s.node(app);
  if (n.tag != Tag::App)
    throw Error(ErrorKind::NotGammaRRedex, "gamma_R expects an application");
  const TermNode& d = s.node(n.b);
  if (d.tag != Tag::Dist)
    throw Error(ErrorKind::NotGammaRRedex, "gamma_R expects a distribution in operand position");
  std::vector<DistEntry> es;
  es.reserve(d.entries.size());
  for (const DistEntry& e : d.entries) es.push_back({s.mk_app(n.a, e.term), e.prob});
  return s.mk_dist(std::move(es));
}

inline TermId eta(TermStore& s, TermId lam) {
  const TermNode& n = s.node(lam);
  if (n.tag != Tag::Lam)
    throw Error(ErrorKind::NotEtaRedex, "eta expects a lam node");
  const TermNode& body = s.node(n.a);
  if (body.tag != Tag::App)
    throw Error(ErrorKind::NotEtaRedex, "eta expects an application body");
  const TermNode& operand = s.node(body.b);
  if (operand.tag != Tag::Var || operand.index != 1)
    throw Error(ErrorKind::NotEtaRedex, "eta expects variable 1 in operand position");
  if (count_occurrences(s, body.a, 1) != 0)
    throw Error(ErrorKind::NotEtaRedex, "variable 1 occurs free in the operator");
  if (!s.distribution_free(body.a))
    throw Error(ErrorKind::GuardViolation, "operator may reduce to a distribution");
  return shift(s, body.a, -1, 1);
}

}  // namespace slc
