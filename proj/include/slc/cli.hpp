#pragma once

// Command-line front end. `run` is the whole program — main() just forwards
// argv — so tests can drive every subcommand in-process against string
// streams and assert on exit codes and exact output bytes.
//
// Exit codes: 0 success, 1 evaluation failure (free variables, exhausted
// fuel, zero-probability evidence, a failed oracle check), 2 for anything
// wrong with the invocation or its inputs (unknown flags, unreadable files,
// syntax errors, malformed network documents, bad flag values).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slc/approximation.hpp"
#include "slc/bn.hpp"
#include "slc/errors.hpp"
#include "slc/evaluator.hpp"
#include "slc/syntax.hpp"
#include "slc/term.hpp"

namespace slc::cli {

namespace detail {

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidIndex:
    case ErrorKind::InvalidProbability:
    case ErrorKind::EmptyDistribution:
    case ErrorKind::UnknownParent:
    case ErrorKind::UnknownNode:
    case ErrorKind::CycleDetected:
    case ErrorKind::BadCptShape:
    case ErrorKind::BadProbability:
    case ErrorKind::DuplicateName:
    case ErrorKind::BadDocument:
    case ErrorKind::TooLarge:
      return 2;  // the input was malformed
    default:
      return 1;  // the input was fine but evaluation failed
  }
}

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string fmt_prob(double p, bool full_precision) {
  std::string out;
  if (full_precision) {
    format_probability(p, out);
    return out;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", p);
  return buf;
}

inline std::string fmt_deviation(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", d);
  return buf;
}

inline std::string render_distribution(const TermStore& s, const Distribution& d,
                                       bool full_precision) {
  std::string out = "{";
  bool first = true;
  for (const DistEntry& e : d.entries) {
    if (!first) out += ", ";
    first = false;
    out += s.text(e.term);
    out += ": ";
    out += fmt_prob(e.prob, full_precision);
  }
  out += "}";
  return out;
}

struct Options {
  std::string path;
  std::uint64_t fuel = EvalConfig::kUnlimited;
  double prune_epsilon = 0.0;
  bool improper_beta = false;
  bool no_cache = false;
  bool eager = false;
  bool eta = false;
  bool trace = false;
  bool full_precision = false;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string query;
  std::vector<std::string> evidence;

  EvalConfig eval_config() const {
    EvalConfig cfg;
    cfg.fuel = fuel;
    cfg.prune_epsilon = prune_epsilon;
    cfg.improper_beta = improper_beta;
    cfg.cache = !no_cache;
    cfg.laziness = eager ? Laziness::Eager : Laziness::Lazy;
    cfg.trace = trace;
    return cfg;
  }
};

inline void add_eval_flags(CLI::App* sub, Options& o) {
  sub->add_option("--fuel", o.fuel, "stop after this many reduction steps");
  sub->add_option("--prune-epsilon", o.prune_epsilon,
                  "drop branches whose cumulative probability falls below this");
  sub->add_flag("--improper-beta", o.improper_beta,
                "substitute distribution arguments directly (occurrences resample)");
  sub->add_flag("--no-cache", o.no_cache, "disable the evaluation cache");
  sub->add_flag("--eager", o.eager, "evaluate operands before substituting them");
  sub->add_flag("--eta", o.eta, "apply eta normalization before evaluating");
  sub->add_flag("--full-precision", o.full_precision,
                "print probabilities at full precision instead of 6 decimals");
}

inline void print_trace(std::ostream& out, const TermStore& s, const EvalResult& r) {
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const TraceStep& step = r.trace[i];
    out << (i + 1) << ' ' << to_string(step.kind) << ' ' << s.text(step.before)
        << " => " << s.text(step.after) << '\n';
  }
}

inline void print_outcome(std::ostream& out, const TermStore& s, const EvalResult& r,
                          bool full_precision) {
  out << render_distribution(s, r.outcome, full_precision) << '\n';
  if (r.unknown_mass > 0.0) out << "unknown: " << fmt_prob(r.unknown_mass, full_precision) << '\n';
}

inline std::uint64_t parse_u64(const std::string& text, const char* what) {
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno != 0 || end == text.c_str() || *end != '\0')
    throw Error(ErrorKind::BadDocument, std::string(what) + " is not an unsigned integer: " + text);
  return v;
}

inline std::uint64_t default_seed(const Options& o) {
  if (o.seed_given) return o.seed;
  if (const char* env = std::getenv("SLC_SEED")) return parse_u64(env, "SLC_SEED");
  return 0;
}

inline int run_eval(TermStore& s, const Options& o, std::ostream& out) {
  auto text = read_file(o.path);
  if (!text) throw Error(ErrorKind::BadDocument, "cannot read " + o.path);
  TermId t = parse(s, *text);
  if (o.eta) t = normalize_eta(s, t);
  EvalResult r = peval(s, t, o.eval_config());
  if (o.trace) print_trace(out, s, r);
  print_outcome(out, s, r, o.full_precision);
  return 0;
}

inline int run_sample(TermStore& s, const Options& o, std::ostream& out) {
  auto text = read_file(o.path);
  if (!text) throw Error(ErrorKind::BadDocument, "cannot read " + o.path);
  TermId t = parse(s, *text);
  if (o.eta) t = normalize_eta(s, t);
  std::uint64_t fuel = o.fuel == EvalConfig::kUnlimited ? kUnlimitedSampleFuel : o.fuel;
  SampleStats stats = mc_estimate(s, t, o.samples, default_seed(o), fuel);
  out << render_distribution(s, stats.estimate, o.full_precision) << '\n';
  return 0;
}

inline QuerySpec resolve_query(const BnDocument& doc, const Options& o) {
  QuerySpec spec;
  if (!o.query.empty())
    spec.query = o.query;
  else if (doc.query)
    spec.query = *doc.query;
  else
    throw Error(ErrorKind::BadDocument, "no query: pass --query or put one in the document");
  spec.evidence = doc.evidence;
  for (const std::string& item : o.evidence) {
    std::size_t eq = item.find('=');
    std::string value = eq == std::string::npos ? "" : item.substr(eq + 1);
    if (eq == std::string::npos || (value != "T" && value != "F"))
      throw Error(ErrorKind::BadDocument, "evidence must look like NAME=T or NAME=F: " + item);
    spec.evidence[item.substr(0, eq)] = value == "T";
  }
  return spec;
}

inline int run_bn(TermStore& s, const Options& o, std::ostream& out) {
  auto text = read_file(o.path);
  if (!text) throw Error(ErrorKind::BadDocument, "cannot read " + o.path);
  BnDocument doc = parse_network_document(*text);
  QuerySpec spec = resolve_query(doc, o);
  TermId t = compile_query(s, doc.network, spec);
  if (o.eta) t = normalize_eta(s, t);
  EvalResult r = peval(s, t, o.eval_config());
  if (o.trace) print_trace(out, s, r);
  Distribution d = spec.evidence.empty() ? r.outcome : marginalize_n(s, r.outcome);
  out << "P(" << spec.query << "=T";
  if (!spec.evidence.empty()) {
    out << " | ";
    bool first = true;
    for (const auto& [name, value] : spec.evidence) {
      if (!first) out << ", ";
      first = false;
      out << name << '=' << (value ? 'T' : 'F');
    }
  }
  out << ") = " << fmt_prob(d.mass_of(mk_true(s)), o.full_precision) << '\n';
  if (r.unknown_mass > 0.0)
    out << "unknown: " << fmt_prob(r.unknown_mass, o.full_precision) << '\n';
  return 0;
}

inline int run_check(TermStore& s, const Options& o, std::ostream& out) {
  auto text = read_file(o.path);
  if (!text) throw Error(ErrorKind::BadDocument, "cannot read " + o.path);
  BnDocument doc = parse_network_document(*text);

  std::vector<QuerySpec> specs;
  if (doc.query) {
    specs.push_back({*doc.query, doc.evidence});
  } else {
    // No query in the document: cross-check the marginal of every node.
    for (const NodeDef& nd : doc.network.nodes) specs.push_back({nd.name, {}});
  }

  double max_deviation = 0.0;
  for (const QuerySpec& spec : specs) {
    TermId t = compile_query(s, doc.network, spec);
    EvalResult r = peval(s, t, EvalConfig{});
    Distribution got = spec.evidence.empty() ? r.outcome : marginalize_n(s, r.outcome);
    Distribution want = brute_force_query(s, doc.network, spec);
    for (TermId b : {mk_true(s), mk_false(s)}) {
      double dev = std::abs(got.mass_of(b) - want.mass_of(b));
      if (dev > max_deviation) max_deviation = dev;
    }
  }

  bool pass = max_deviation <= 1e-9;
  out << (pass ? "PASS" : "FAIL") << " (max deviation " << fmt_deviation(max_deviation)
      << ")\n";
  return pass ? 0 : 1;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"evaluator for a probabilistic lambda calculus"};
  app.name("slc");
  app.require_subcommand(1);
  detail::Options o;

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a term file to a distribution");
  eval_cmd->add_option("path", o.path, "term file")->required();
  eval_cmd->add_flag("--trace", o.trace, "print each reduction step");
  detail::add_eval_flags(eval_cmd, o);

  CLI::App* trace_cmd = app.add_subcommand("trace", "evaluate and print each reduction step");
  trace_cmd->add_option("path", o.path, "term file")->required();
  detail::add_eval_flags(trace_cmd, o);

  CLI::App* bn_cmd = app.add_subcommand("bn", "compile a network document and query it");
  bn_cmd->add_option("path", o.path, "network document")->required();
  bn_cmd->add_option("--query", o.query, "node to query (overrides the document)");
  bn_cmd->add_option("--evidence", o.evidence,
                     "NAME=T or NAME=F observation (repeatable, overrides the document)");
  bn_cmd->add_flag("--trace", o.trace, "print each reduction step");
  detail::add_eval_flags(bn_cmd, o);

  CLI::App* sample_cmd = app.add_subcommand("sample", "estimate a term's outcome by sampling");
  sample_cmd->add_option("path", o.path, "term file")->required();
  sample_cmd->add_option("--samples", o.samples, "number of samples to draw");
  CLI::Option* seed_opt = sample_cmd->add_option("--seed", o.seed, "random seed");
  sample_cmd->add_option("--fuel", o.fuel, "per-sample reduction budget");
  sample_cmd->add_flag("--eta", o.eta, "apply eta normalization before sampling");
  sample_cmd->add_flag("--full-precision", o.full_precision,
                       "print probabilities at full precision instead of 6 decimals");

  CLI::App* check_cmd =
      app.add_subcommand("check", "cross-check a network against exhaustive enumeration");
  check_cmd->add_option("path", o.path, "network document")->required();

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("slc");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  o.seed_given = seed_opt->count() > 0;
  if (o.fuel == 0) {
    err << "error: fuel must be at least 1\n";
    return 2;
  }

  try {
    TermStore store;
    if (eval_cmd->parsed()) return detail::run_eval(store, o, out);
    if (trace_cmd->parsed()) {
      o.trace = true;
      return detail::run_eval(store, o, out);
    }
    if (bn_cmd->parsed()) return detail::run_bn(store, o, out);
    if (sample_cmd->parsed()) return detail::run_sample(store, o, out);
    if (check_cmd->parsed()) return detail::run_check(store, o, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return detail::exit_code_for(e.kind());
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace slc::cli
