#pragma once

// Boolean Bayesian networks compiled to stochastic λ-terms.
//
// Each node becomes a function of its parents: a nested boolean selection
// over the parent variables choosing the two-point distribution of the
// matching CPT row (deterministic rows emit bare T/F; roots are bare
// distributions). A query term is assembled bottom-up in topological order.
// Any node whose value feeds more than one place — several children, or a
// child plus the query or evidence — is λ-bound once so every use shares a
// single sample; single-use nodes are inlined. Evidence is folded into one
// conjunction guarding a three-state gate: the term yields the query value
// when all evidence holds and the distinguished term N otherwise, and
// marginalize_n removes N afterwards, renormalizing to the conditional.
//
// brute_force_query enumerates the joint by exhaustion; it is the oracle the
// compiler is tested against, deliberately sharing no code with it.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "slc/distribution.hpp"
#include "slc/errors.hpp"
#include "slc/term.hpp"

namespace slc {

struct NodeDef {
  std::string name;
  std::vector<std::string> parents;
  std::map<std::string, double> cpt;  // parent assignment string -> P(node = T)
};

struct Network {
  std::vector<NodeDef> nodes;

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

struct QuerySpec {
  std::string query;
  std::map<std::string, bool> evidence;
};

struct BnDocument {
  Network network;
  std::optional<std::string> query;
  std::map<std::string, bool> evidence;
};

// The three-state gate's "conditioned away" marker: closed, normal, and
// distinct from both booleans.
inline TermId mk_conditioned_away(TermStore& s) {
  return s.mk_lam(s.mk_lam(s.mk_lam(s.mk_var(1))));
}

namespace detail {

inline void validate_network(const Network& net) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const NodeDef& nd = net.nodes[i];
    if (nd.name.empty())
      throw Error(ErrorKind::BadDocument, "node names must be nonempty");
    if (!seen.insert(nd.name).second)
      throw Error(ErrorKind::DuplicateName, "duplicate node name: " + nd.name);
    for (const std::string& p : nd.parents) {
      if (p == nd.name)
        throw Error(ErrorKind::CycleDetected, "node is its own parent: " + nd.name);
      int j = net.index_of(p);
      if (j < 0 || static_cast<std::size_t>(j) >= i)
        throw Error(ErrorKind::UnknownParent,
                    "parent of " + nd.name + " must be declared earlier: " + p);
    }
    std::size_t rows = std::size_t{1} << nd.parents.size();
    if (nd.cpt.size() != rows)
      throw Error(ErrorKind::BadCptShape,
                  "cpt of " + nd.name + " needs one row per parent assignment");
    for (const auto& [key, p] : nd.cpt) {
      if (key.size() != nd.parents.size())
        throw Error(ErrorKind::BadCptShape, "cpt key of wrong length in " + nd.name);
      for (char c : key)
        if (c != 'T' && c != 'F')
          throw Error(ErrorKind::BadCptShape, "cpt keys are strings over {T, F}");
      if (!(p >= 0.0) || p > 1.0)
        throw Error(ErrorKind::BadProbability, "cpt probability outside [0, 1] in " + nd.name);
    }
  }
}

inline void validate_spec(const Network& net, const QuerySpec& spec) {
  if (net.index_of(spec.query) < 0)
    throw Error(ErrorKind::UnknownNode, "query names no node: " + spec.query);
  for (const auto& [name, value] : spec.evidence)
    if (net.index_of(name) < 0)
      throw Error(ErrorKind::UnknownNode, "evidence names no node: " + name);
}

}  // namespace detail

inline BnDocument parse_network_document(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::BadDocument, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw Error(ErrorKind::BadDocument, "expected a top-level object with a nodes array");

  BnDocument out;
  for (const auto& jn : doc["nodes"]) {
    if (!jn.is_object() || !jn.contains("name") || !jn["name"].is_string())
      throw Error(ErrorKind::BadDocument, "every node needs a string name");
    NodeDef nd;
    nd.name = jn["name"].get<std::string>();
    if (jn.contains("parents")) {
      if (!jn["parents"].is_array())
        throw Error(ErrorKind::BadDocument, "parents must be an array of names");
      for (const auto& jp : jn["parents"]) {
        if (!jp.is_string())
          throw Error(ErrorKind::BadDocument, "parents must be an array of names");
        nd.parents.push_back(jp.get<std::string>());
      }
    }
    if (!jn.contains("cpt") || !jn["cpt"].is_object())
      throw Error(ErrorKind::BadCptShape, "node " + nd.name + " needs a cpt object");
    for (const auto& [key, value] : jn["cpt"].items()) {
      if (!value.is_number())
        throw Error(ErrorKind::BadProbability, "cpt values must be numbers in " + nd.name);
      nd.cpt[key] = value.get<double>();
    }
    out.network.nodes.push_back(std::move(nd));
  }
  detail::validate_network(out.network);

  if (doc.contains("query")) {
    if (!doc["query"].is_string())
      throw Error(ErrorKind::BadDocument, "query must be a node name");
    out.query = doc["query"].get<std::string>();
  }
  if (doc.contains("evidence")) {
    if (!doc["evidence"].is_object())
      throw Error(ErrorKind::BadDocument, "evidence must map names to booleans");
    for (const auto& [key, value] : doc["evidence"].items()) {
      if (!value.is_boolean())
        throw Error(ErrorKind::BadDocument, "evidence must map names to booleans");
      out.evidence[key] = value.get<bool>();
    }
  }
  return out;
}

inline Network parse_network(const std::string& text) {
  return parse_network_document(text).network;
}

namespace detail {

inline TermId cpt_row_term(TermStore& s, double p) {
  if (p >= 1.0) return mk_true(s);
  if (p <= 0.0) return mk_false(s);
  return s.mk_dist({{mk_true(s), p}, {mk_false(s), 1.0 - p}});
}

// Selection tree over parents i..k-1; parent i is bound at index k-i.
// Collapses branches that agree and the (v T F) identity.
inline TermId cpt_select(TermStore& s, const NodeDef& nd, std::uint32_t i,
                         std::string& prefix) {
  std::uint32_t k = static_cast<std::uint32_t>(nd.parents.size());
  if (i == k) return cpt_row_term(s, nd.cpt.at(prefix));
  prefix.push_back('T');
  TermId on_true = cpt_select(s, nd, i + 1, prefix);
  prefix.pop_back();
  prefix.push_back('F');
  TermId on_false = cpt_select(s, nd, i + 1, prefix);
  prefix.pop_back();
  if (on_true == on_false) return on_true;
  TermId v = s.mk_var(k - i);
  if (on_true == mk_true(s) && on_false == mk_false(s)) return v;
  return s.mk_app(s.mk_app(v, on_true), on_false);
}

}  // namespace detail

// A node's stochastic function of its parents; parents bind outermost-first,
// roots compile to the bare row term.
inline TermId compile_node(TermStore& s, const NodeDef& nd) {
  std::string prefix;
  TermId body = detail::cpt_select(s, nd, 0, prefix);
  for (std::size_t i = 0; i < nd.parents.size(); ++i) body = s.mk_lam(body);
  return body;
}

namespace detail {

struct QueryBuilder {
  TermStore& s;
  const Network& net;
  const QuerySpec& spec;

  std::vector<int> bound;                 // topo-ordered indices of λ-bound nodes
  std::unordered_map<int, int> bound_pos; // node index -> position in `bound`

  // Expression for the node's value with `depth` binders in scope.
  TermId value(int node, std::uint32_t depth) {
    auto it = bound_pos.find(node);
    if (it != bound_pos.end())
      return s.mk_var(depth - static_cast<std::uint32_t>(it->second));
    return inline_expr(node, depth);
  }

  TermId inline_expr(int node, std::uint32_t depth) {
    const NodeDef& nd = net.nodes[node];
    TermId t = compile_node(s, nd);
    for (const std::string& p : nd.parents)
      t = s.mk_app(t, value(net.index_of(p), depth));
    return t;
  }

  TermId build() {
    // Restrict to the ancestral closure of query and evidence.
    std::vector<bool> relevant(net.nodes.size(), false);
    std::vector<int> stack;
    auto mark = [&](int i) {
      if (!relevant[i]) {
        relevant[i] = true;
        stack.push_back(i);
      }
    };
    mark(net.index_of(spec.query));
    for (const auto& [name, value] : spec.evidence) mark(net.index_of(name));
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (const std::string& p : net.nodes[i].parents) mark(net.index_of(p));
    }

    // A node used from two or more places must be bound so its uses share
    // one sample.
    std::vector<int> uses(net.nodes.size(), 0);
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
      if (!relevant[i]) continue;
      for (const std::string& p : net.nodes[i].parents)
        uses[net.index_of(p)] += 1;
    }
    uses[net.index_of(spec.query)] += 1;
    for (const auto& [name, value] : spec.evidence) uses[net.index_of(name)] += 1;

    for (std::size_t i = 0; i < net.nodes.size(); ++i)
      if (relevant[i] && uses[i] >= 2) {
        bound_pos[static_cast<int>(i)] = static_cast<int>(bound.size());
        bound.push_back(static_cast<int>(i));
      }

    std::uint32_t depth = static_cast<std::uint32_t>(bound.size());
    TermId core = value(net.index_of(spec.query), depth);

    if (!spec.evidence.empty()) {
      // Conjunction of evidence literals, then the three-state gate:
      // (conj query N).
      TermId t_true = mk_true(s);
      TermId t_false = mk_false(s);
      // Fold right-associatively so the term reads in evidence order.
      std::vector<TermId> lits;
      for (const auto& [name, val] : spec.evidence) {
        TermId lit = value(net.index_of(name), depth);
        if (!val) lit = s.mk_app(s.mk_app(lit, t_false), t_true);  // negate
        lits.push_back(lit);
      }
      TermId conj = lits.back();
      for (std::size_t i = lits.size() - 1; i-- > 0;)
        conj = s.mk_app(s.mk_app(lits[i], conj), t_false);
      core = s.mk_app(s.mk_app(conj, core), mk_conditioned_away(s));
    }

    // Wrap binders inside-out; binder j's defining expression sees j binders.
    TermId t = core;
    for (std::size_t j = bound.size(); j-- > 0;) {
      TermId arg = inline_expr(bound[j], static_cast<std::uint32_t>(j));
      t = s.mk_app(s.mk_lam(t), arg);
    }
    return t;
  }
};

}  // namespace detail

inline TermId compile_query(TermStore& s, const Network& net, const QuerySpec& spec) {
  detail::validate_network(net);
  detail::validate_spec(net, spec);
  detail::QueryBuilder builder{s, net, spec};
  return builder.build();
}

// Exhaustive joint enumeration; the oracle for everything above.
inline Distribution brute_force_query(TermStore& s, const Network& net,
                                      const QuerySpec& spec) {
  detail::validate_network(net);
  detail::validate_spec(net, spec);
  std::size_t n = net.nodes.size();
  if (n > 20) throw Error(ErrorKind::TooLarge, "brute force enumerates up to 20 nodes");

  int query = net.index_of(spec.query);
  double query_true = 0.0;
  double evidence_mass = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 1.0;
    for (std::size_t i = 0; i < n && w > 0.0; ++i) {
      const NodeDef& nd = net.nodes[i];
      std::string key;
      key.reserve(nd.parents.size());
      for (const std::string& p : nd.parents)
        key.push_back((mask >> net.index_of(p)) & 1 ? 'T' : 'F');
      double p = nd.cpt.at(key);
      w *= (mask >> i) & 1 ? p : 1.0 - p;
    }
    if (w <= 0.0) continue;
    bool consistent = true;
    for (const auto& [name, val] : spec.evidence)
      if ((((mask >> net.index_of(name)) & 1) != 0) != val) {
        consistent = false;
        break;
      }
    if (!consistent) continue;
    evidence_mass += w;
    if ((mask >> query) & 1) query_true += w;
  }

  if (evidence_mass <= 0.0)
    throw Error(ErrorKind::AllMassConditioned, "evidence has probability 0");
  Distribution out;
  double p = query_true / evidence_mass;
  if (p > 0.0) out.entries.push_back({mk_true(s), p});
  if (p < 1.0) out.entries.push_back({mk_false(s), 1.0 - p});
  out.canonicalize(s);
  return out;
}

// Drop the N state and renormalize to the conditional distribution.
inline Distribution marginalize_n(TermStore& s, const Distribution& d) {
  TermId n = mk_conditioned_away(s);
  Distribution out;
  double kept = 0.0;
  for (const DistEntry& e : d.entries) {
    if (e.term == n) continue;
    out.entries.push_back(e);
    kept += e.prob;
  }
  if (kept <= 1e-12)
    throw Error(ErrorKind::AllMassConditioned, "evidence has probability 0");
  for (DistEntry& e : out.entries) e.prob /= kept;
  out.canonicalize(s);
  return out;
}

}  // namespace slc
