#pragma once

// Hash-consed store for stochastic λ-terms in deBruijn form.
//
// Every term is built through the mk_* constructors, which canonicalize on
// the way in (distributions are flattened, merged, sorted and may collapse
// to a bare term). Interning makes TermId equality coincide with structural
// equality, so reduction code compares and caches by id alone. Each node
// carries its level (deBruijn depth of the deepest free variable), its
// 128-bit fingerprint, and whether any distribution occurs inside it.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slc/errors.hpp"
#include "slc/fingerprint.hpp"

namespace slc {

class TermStore;

class TermId {
 public:
  constexpr TermId() = default;
  constexpr explicit TermId(std::uint32_t value) : value_(value) {}

  constexpr std::uint32_t value() const noexcept { return value_; }
  constexpr bool valid() const noexcept { return value_ != kInvalid; }

  friend constexpr bool operator==(TermId, TermId) = default;
  friend constexpr auto operator<=>(TermId, TermId) = default;

 private:
  static constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;
  std::uint32_t value_ = kInvalid;
};

enum class Tag : unsigned char { Var, Lam, App, Dist };

struct DistEntry {
  TermId term;
  double prob = 0.0;
};

struct TermNode {
  Tag tag = Tag::Var;
  std::uint32_t index = 0;         // Var: deBruijn index, >= 1
  TermId a;                        // Lam: body; App: operator
  TermId b;                        // App: operand
  std::vector<DistEntry> entries;  // Dist: canonical entry sequence
  std::uint32_t level = 0;
  bool dist_free = true;
  Fingerprint fp;
};

// Probabilities are carried at 12 significant decimal digits, the printing
// precision, so that parse(print(t)) lands on the identical node.
inline void format_probability(double p, std::string& out) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", p);
  out += buf;
}

inline double quantize_probability(double p) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", p);
  return std::strtod(buf, nullptr);
}

class TermStore {
 public:
  explicit TermStore(std::uint64_t fingerprint_seed = kDefaultFingerprintSeed)
      : seed_(fingerprint_seed) {}
  TermStore(const TermStore&) = delete;
  TermStore& operator=(const TermStore&) = delete;

  TermId mk_var(std::uint32_t index) {
    if (index == 0) throw Error(ErrorKind::InvalidIndex, "variable indices start at 1");
    std::unique_lock lock(mutex_);
    TermNode n;
    n.tag = Tag::Var;
    n.index = index;
    n.level = index;
    n.dist_free = true;
    n.fp = fp_var(seed_, index);
    return intern(std::move(n));
  }

  TermId mk_lam(TermId body) {
    std::unique_lock lock(mutex_);
    const TermNode& bn = at(body);
    TermNode n;
    n.tag = Tag::Lam;
    n.a = body;
    n.level = bn.level > 0 ? bn.level - 1 : 0;
    n.dist_free = bn.dist_free;
    n.fp = fp_lam(seed_, bn.fp);
    return intern(std::move(n));
  }

  TermId mk_app(TermId fn, TermId arg) {
    std::unique_lock lock(mutex_);
    const TermNode& fnode = at(fn);
    const TermNode& anode = at(arg);
    TermNode n;
    n.tag = Tag::App;
    n.a = fn;
    n.b = arg;
    n.level = std::max(fnode.level, anode.level);
    n.dist_free = fnode.dist_free && anode.dist_free;
    n.fp = fp_app(seed_, fnode.fp, anode.fp);
    return intern(std::move(n));
  }

  // Canonicalizing constructor for distributions: flattens nested Dist
  // entries outward, merges duplicate terms, quantizes probabilities to
  // printing precision, sorts entries by printed form, and collapses a
  // singleton back to the bare term.
  TermId mk_dist(std::vector<DistEntry> in) {
    std::unique_lock lock(mutex_);
    if (in.empty())
      throw Error(ErrorKind::EmptyDistribution, "distribution needs at least one entry");

    std::vector<DistEntry> flat;
    flat.reserve(in.size());
    for (const DistEntry& e : in) {
      if (!std::isfinite(e.prob) || !(e.prob > 0.0) || e.prob > 1.0)
        throw Error(ErrorKind::InvalidProbability,
                    "entry probability must lie in (0, 1]");
      const TermNode& n = at(e.term);
      if (n.tag == Tag::Dist) {
        // Child entries are already flat, so one level of expansion suffices.
        for (const DistEntry& s : n.entries)
          flat.push_back({s.term, e.prob * s.prob});
      } else {
        flat.push_back(e);
      }
    }

    std::sort(flat.begin(), flat.end(),
              [](const DistEntry& x, const DistEntry& y) { return x.term < y.term; });
    std::vector<DistEntry> merged;
    merged.reserve(flat.size());
    for (const DistEntry& e : flat) {
      if (!merged.empty() && merged.back().term == e.term)
        merged.back().prob += e.prob;
      else
        merged.push_back(e);
    }

    double total = 0.0;
    for (DistEntry& e : merged) {
      e.prob = quantize_probability(e.prob);
      total += e.prob;
    }

    if (merged.size() == 1) {
      if (std::abs(merged[0].prob - 1.0) > 1e-9)
        throw Error(ErrorKind::InvalidProbability,
                    "singleton distribution must carry probability 1");
      return merged[0].term;  // {t: 1} is just t
    }

    if (std::abs(total - 1.0) > 1e-9)
      throw Error(ErrorKind::InvalidProbability,
                  "distribution probabilities must sum to 1");
    for (const DistEntry& e : merged)
      if (e.prob > 1.0)
        throw Error(ErrorKind::InvalidProbability,
                    "entry probability must lie in (0, 1]");

    // Canonical entry order is the lexicographic order of the printed terms.
    std::vector<std::pair<std::string, DistEntry>> keyed;
    keyed.reserve(merged.size());
    for (const DistEntry& e : merged) {
      std::string key;
      print_to(e.term, key);
      keyed.emplace_back(std::move(key), e);
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    TermNode n;
    n.tag = Tag::Dist;
    n.dist_free = false;
    n.level = 0;
    Fingerprint fp{};
    n.entries.reserve(keyed.size());
    for (const auto& [key, e] : keyed) {
      const TermNode& en = at(e.term);
      n.level = std::max(n.level, en.level);
      fp ^= fp_dist_entry(seed_, en.fp, e.prob);
      n.entries.push_back(e);
    }
    n.fp = fp;
    return intern(std::move(n));
  }

  // The reference stays valid for the lifetime of the store; nodes are
  // immutable once interned.
  const TermNode& node(TermId t) const {
    std::shared_lock lock(mutex_);
    return at(t);
  }

  std::uint32_t level(TermId t) const {
    std::shared_lock lock(mutex_);
    return at(t).level;
  }

  Fingerprint fingerprint(TermId t) const {
    std::shared_lock lock(mutex_);
    return at(t).fp;
  }

  bool distribution_free(TermId t) const {
    std::shared_lock lock(mutex_);
    return at(t).dist_free;
  }

  // Canonical printed form; also the sort key for distribution entries.
  std::string text(TermId t) const {
    std::shared_lock lock(mutex_);
    std::string out;
    print_to(t, out);
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return nodes_.size();
  }

  std::uint64_t fingerprint_seed() const noexcept { return seed_; }

 private:
  const TermNode& at(TermId t) const {
    if (!t.valid() || t.value() >= nodes_.size())
      throw Error(ErrorKind::InvalidIndex, "TermId does not belong to this store");
    return nodes_[t.value()];
  }

  static bool same_node(const TermNode& x, const TermNode& y) {
    if (x.tag != y.tag) return false;
    switch (x.tag) {
      case Tag::Var: return x.index == y.index;
      case Tag::Lam: return x.a == y.a;
      case Tag::App: return x.a == y.a && x.b == y.b;
      case Tag::Dist:
        if (x.entries.size() != y.entries.size()) return false;
        for (std::size_t i = 0; i < x.entries.size(); ++i)
          if (x.entries[i].term != y.entries[i].term ||
              x.entries[i].prob != y.entries[i].prob)
            return false;
        return true;
    }
    return false;
  }

  TermId intern(TermNode&& n) {
    auto [lo, hi] = index_.equal_range(n.fp);
    for (auto it = lo; it != hi; ++it)
      if (same_node(nodes_[it->second.value()], n)) return it->second;
    TermId id(static_cast<std::uint32_t>(nodes_.size()));
    nodes_.push_back(std::move(n));
    index_.emplace(nodes_.back().fp, id);
    return id;
  }

  void print_to(TermId t, std::string& out) const {
    const TermNode& n = at(t);
    switch (n.tag) {
      case Tag::Var:
        out += std::to_string(n.index);
        return;
      case Tag::Lam:
        out += "(lam ";
        print_to(n.a, out);
        out += ')';
        return;
      case Tag::App: {
        // Flatten the left spine: ((f a) b) prints as (f a b).
        std::vector<TermId> spine;
        TermId head = t;
        while (at(head).tag == Tag::App) {
          spine.push_back(at(head).b);
          head = at(head).a;
        }
        out += '(';
        print_to(head, out);
        for (auto it = spine.rbegin(); it != spine.rend(); ++it) {
          out += ' ';
          print_to(*it, out);
        }
        out += ')';
        return;
      }
      case Tag::Dist: {
        out += '{';
        bool first = true;
        for (const DistEntry& e : n.entries) {
          if (!first) out += ", ";
          first = false;
          print_to(e.term, out);
          out += ": ";
          format_probability(e.prob, out);
        }
        out += '}';
        return;
      }
    }
  }

  std::uint64_t seed_;
  std::deque<TermNode> nodes_;
  std::unordered_multimap<Fingerprint, TermId> index_;
  mutable std::shared_mutex mutex_;
};

// The Church booleans the whole library leans on: T selects its first
// argument, F its second.
inline TermId mk_true(TermStore& s) { return s.mk_lam(s.mk_lam(s.mk_var(2))); }
inline TermId mk_false(TermStore& s) { return s.mk_lam(s.mk_lam(s.mk_var(1))); }

}  // namespace slc

template <>
struct std::hash<slc::TermId> {
  std::size_t operator()(const slc::TermId& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value());
  }
};
