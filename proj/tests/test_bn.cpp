#include <fstream>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "support.hpp"

using namespace slc;

namespace {

auto kind_is(ErrorKind k) {
  return Catch::Matchers::Predicate<Error>([k](const Error& e) { return e.kind() == k; });
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// compiled building blocks of the diamond network
TermId diamond_a(TermStore& s) { return ts::coin(s, 0.5); }
TermId diamond_b(TermStore& s) {
  return s.mk_lam(s.mk_app(s.mk_app(s.mk_var(1), mk_true(s)), ts::coin(s, 0.2)));
}
TermId diamond_c(TermStore& s) {
  return s.mk_lam(s.mk_lam(s.mk_app(s.mk_app(s.mk_var(2), mk_true(s)), s.mk_var(1))));
}

void check_close(const Distribution& got, const Distribution& want, double tol) {
  REQUIRE(got.entries.size() == want.entries.size());
  for (std::size_t i = 0; i < want.entries.size(); ++i) {
    CHECK(got.entries[i].term == want.entries[i].term);
    CHECK_THAT(got.entries[i].prob, Catch::Matchers::WithinAbs(want.entries[i].prob, tol));
  }
}

}  // namespace

TEST_CASE("network documents parse into validated networks") {
  BnDocument doc = parse_network_document(R"({
    "nodes": [
      {"name": "A", "cpt": {"": 0.5}},
      {"name": "B", "parents": ["A"], "cpt": {"T": 1.0, "F": 0.2}},
      {"name": "C", "parents": ["A", "B"],
       "cpt": {"TT": 1.0, "TF": 1.0, "FT": 1.0, "FF": 0.0}}
    ],
    "query": "A",
    "evidence": {"C": true}
  })");
  REQUIRE(doc.network.nodes.size() == 3);
  CHECK(doc.network.nodes[0].name == "A");
  CHECK(doc.network.nodes[1].parents == std::vector<std::string>{"A"});
  CHECK(doc.network.nodes[2].cpt.at("FF") == 0.0);
  REQUIRE(doc.query.has_value());
  CHECK(*doc.query == "A");
  CHECK(doc.evidence.at("C") == true);

  // both optional fields may be absent
  BnDocument bare = parse_network_document(R"({"nodes": [{"name": "X", "cpt": {"": 0.3}}]})");
  CHECK_FALSE(bare.query.has_value());
  CHECK(bare.evidence.empty());
}

TEST_CASE("malformed network documents are rejected with specific errors") {
  auto reject = [](const std::string& text, ErrorKind kind) {
    CHECK_THROWS_MATCHES(parse_network_document(text), Error, kind_is(kind));
  };

  reject("{not json", ErrorKind::BadDocument);
  reject(R"({"query": "A"})", ErrorKind::BadDocument);
  reject(R"({"nodes": [{"cpt": {"": 0.5}}]})", ErrorKind::BadDocument);
  reject(R"({"nodes": [{"name": "", "cpt": {"": 0.5}}]})", ErrorKind::BadDocument);
  reject(R"({"nodes": [{"name": "A", "cpt": {"": 0.5}}], "query": 7})", ErrorKind::BadDocument);
  reject(R"({"nodes": [{"name": "A", "cpt": {"": 0.5}}], "evidence": {"A": "T"}})",
         ErrorKind::BadDocument);

  // structural network faults
  reject(R"({"nodes": [
      {"name": "B", "parents": ["A"], "cpt": {"T": 0.1, "F": 0.2}},
      {"name": "A", "cpt": {"": 0.5}}]})",
         ErrorKind::UnknownParent);
  reject(R"({"nodes": [{"name": "A", "parents": ["Z"], "cpt": {"T": 0.1, "F": 0.2}}]})",
         ErrorKind::UnknownParent);
  reject(R"({"nodes": [{"name": "A", "parents": ["A"], "cpt": {"T": 0.1, "F": 0.2}}]})",
         ErrorKind::CycleDetected);
  reject(R"({"nodes": [{"name": "A", "cpt": {"": 0.5}}, {"name": "A", "cpt": {"": 0.5}}]})",
         ErrorKind::DuplicateName);

  // CPT shape faults
  reject(R"({"nodes": [{"name": "A", "cpt": {}}]})", ErrorKind::BadCptShape);
  reject(R"({"nodes": [{"name": "A", "parents": [], "cpt": {"T": 0.5}}]})",
         ErrorKind::BadCptShape);
  reject(R"({"nodes": [
      {"name": "A", "cpt": {"": 0.5}},
      {"name": "B", "parents": ["A"], "cpt": {"T": 0.1}}]})",
         ErrorKind::BadCptShape);
  reject(R"({"nodes": [
      {"name": "A", "cpt": {"": 0.5}},
      {"name": "B", "parents": ["A"], "cpt": {"T": 0.1, "F": 0.2, "X": 0.3}}]})",
         ErrorKind::BadCptShape);
  reject(R"({"nodes": [{"name": "A", "cpt": {"missing": 0.5}}]})", ErrorKind::BadCptShape);

  // probability faults
  reject(R"({"nodes": [{"name": "A", "cpt": {"": 1.5}}]})", ErrorKind::BadProbability);
  reject(R"({"nodes": [{"name": "A", "cpt": {"": -0.1}}]})", ErrorKind::BadProbability);
  reject(R"({"nodes": [{"name": "A", "cpt": {"": "half"}}]})", ErrorKind::BadProbability);
}

TEST_CASE("nodes compile to selection functions over their parents") {
  TermStore s;
  Network net = ts::diamond_network();

  CHECK(compile_node(s, net.nodes[0]) == diamond_a(s));
  CHECK(compile_node(s, net.nodes[1]) == diamond_b(s));
  // rows that agree collapse, and a (v T F) selection is just v
  CHECK(compile_node(s, net.nodes[2]) == diamond_c(s));

  // a node that copies its parent is the identity function
  NodeDef copy{"Y", {"X"}, {{"T", 1.0}, {"F", 0.0}}};
  CHECK(compile_node(s, copy) == s.mk_lam(s.mk_var(1)));

  // a node independent of its parent drops the selection entirely
  NodeDef constant{"Y", {"X"}, {{"T", 0.3}, {"F", 0.3}}};
  CHECK(compile_node(s, constant) == s.mk_lam(ts::coin(s, 0.3)));

  // two informative parents produce the full nested selection
  NodeDef full{"Z", {"X", "Y"}, {{"TT", 0.9}, {"TF", 0.8}, {"FT", 0.7}, {"FF", 0.6}}};
  TermId on_t = s.mk_app(s.mk_app(s.mk_var(1), ts::coin(s, 0.9)), ts::coin(s, 0.8));
  TermId on_f = s.mk_app(s.mk_app(s.mk_var(1), ts::coin(s, 0.7)), ts::coin(s, 0.6));
  TermId want = s.mk_lam(s.mk_lam(s.mk_app(s.mk_app(s.mk_var(2), on_t), on_f)));
  CHECK(compile_node(s, full) == want);
}

TEST_CASE("queries compile to shared-ancestor application chains") {
  TermStore s;
  Network net = ts::diamond_network();

  // marginal of the sink: ((λ ((C 1) (B 1))) A)
  TermId a = diamond_a(s);
  TermId b = diamond_b(s);
  TermId c = diamond_c(s);
  TermId body = s.mk_app(s.mk_app(c, s.mk_var(1)), s.mk_app(b, s.mk_var(1)));
  TermId want_marginal = s.mk_app(s.mk_lam(body), a);
  CHECK(compile_query(s, net, {"C", {}}) == want_marginal);

  // conditioning gates the query value on the evidence literal:
  // ((λ ((((C 1) (B 1)) 1) N)) A)
  TermId gated = s.mk_app(s.mk_app(body, s.mk_var(1)), mk_conditioned_away(s));
  TermId want_cond = s.mk_app(s.mk_lam(gated), a);
  CHECK(compile_query(s, net, {"A", {{"C", true}}}) == want_cond);

  // negative evidence wraps the literal in a boolean complement
  TermId negated = s.mk_app(s.mk_app(body, mk_false(s)), mk_true(s));
  TermId gated_f = s.mk_app(s.mk_app(negated, s.mk_var(1)), mk_conditioned_away(s));
  CHECK(compile_query(s, net, {"A", {{"C", false}}}) == s.mk_app(s.mk_lam(gated_f), a));

  // the shared ancestor appears exactly once in the compiled term
  CHECK(ts::count_subterm(s, want_marginal, a) == 1);
  CHECK(ts::count_subterm(s, want_cond, a) == 1);

  // unknown names are rejected up front
  CHECK_THROWS_MATCHES(compile_query(s, net, {"Z", {}}), Error, kind_is(ErrorKind::UnknownNode));
  CHECK_THROWS_MATCHES(compile_query(s, net, {"A", {{"Z", true}}}), Error,
                       kind_is(ErrorKind::UnknownNode));
}

TEST_CASE("marginalizing the conditioned-away state renormalizes the rest") {
  TermStore s;
  TermId t = mk_true(s);
  TermId f = mk_false(s);
  TermId n = mk_conditioned_away(s);

  Distribution d;
  d.entries = {{t, 0.5}, {f, 0.1}, {n, 0.4}};
  Distribution out = marginalize_n(s, d);
  REQUIRE(out.entries.size() == 2);
  CHECK_THAT(out.mass_of(t), Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-12));
  CHECK_THAT(out.mass_of(f), Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-12));
  CHECK_THAT(out.mass(), Catch::Matchers::WithinAbs(1.0, 1e-12));

  // nothing to remove: unchanged
  Distribution clean;
  clean.entries = {{t, 0.6}, {f, 0.4}};
  Distribution same = marginalize_n(s, clean);
  CHECK_THAT(same.mass_of(t), Catch::Matchers::WithinAbs(0.6, 1e-12));

  Distribution all_n;
  all_n.entries = {{n, 1.0}};
  CHECK_THROWS_MATCHES(marginalize_n(s, all_n), Error, kind_is(ErrorKind::AllMassConditioned));
}

TEST_CASE("brute force enumeration answers small queries exactly") {
  TermStore s;
  Network net = ts::diamond_network();

  Distribution pc = brute_force_query(s, net, {"C", {}});
  CHECK_THAT(pc.mass_of(mk_true(s)), Catch::Matchers::WithinAbs(0.6, 1e-15));
  CHECK_THAT(pc.mass_of(mk_false(s)), Catch::Matchers::WithinAbs(0.4, 1e-15));

  Distribution pa = brute_force_query(s, net, {"A", {{"C", true}}});
  CHECK_THAT(pa.mass_of(mk_true(s)), Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-12));

  // deterministic networks produce one-point distributions
  Network det;
  det.nodes.push_back({"A", {}, {{"", 1.0}}});
  det.nodes.push_back({"B", {"A"}, {{"T", 1.0}, {"F", 0.0}}});
  Distribution pb = brute_force_query(s, det, {"B", {}});
  REQUIRE(pb.entries.size() == 1);
  CHECK(pb.entries[0].term == mk_true(s));
  CHECK(pb.entries[0].prob == 1.0);

  CHECK_THROWS_MATCHES(brute_force_query(s, ts::chain_network(21), {"X0", {}}), Error,
                       kind_is(ErrorKind::TooLarge));
  CHECK_THROWS_MATCHES(brute_force_query(s, det, {"B", {{"A", false}}}), Error,
                       kind_is(ErrorKind::AllMassConditioned));
}

TEST_CASE("evidence on the query node itself is certainty") {
  TermStore s;
  Network net = ts::diamond_network();
  QuerySpec spec{"A", {{"A", true}}};

  Distribution brute = brute_force_query(s, net, spec);
  REQUIRE(brute.entries.size() == 1);
  CHECK(brute.entries[0].term == mk_true(s));

  TermId term = compile_query(s, net, spec);
  Distribution got = marginalize_n(s, peval(s, term).outcome);
  REQUIRE(got.entries.size() == 1);
  CHECK(got.entries[0].term == mk_true(s));
  CHECK_THAT(got.entries[0].prob, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("the sample network document round-trips through inference") {
  TermStore s;
  BnDocument doc = parse_network_document(slurp(ts::samples_dir() + "/sprinkler.json"));
  const Network& net = doc.network;

  for (const NodeDef& nd : net.nodes) {
    QuerySpec spec{nd.name, {}};
    Distribution want = brute_force_query(s, net, spec);
    Distribution got = marginalize_n(s, peval(s, compile_query(s, net, spec)).outcome);
    check_close(got, want, 1e-9);
  }

  QuerySpec cond{"A", {{"C", true}}};
  Distribution want = brute_force_query(s, net, cond);
  Distribution got = marginalize_n(s, peval(s, compile_query(s, net, cond)).outcome);
  check_close(got, want, 1e-9);
}

TEST_CASE("compiled queries agree with enumeration on random networks") {
  TermStore s;
  SplitMix64 rng{55};
  int conditioned_out = 0;
  for (int round = 0; round < 60; ++round) {
    Network net = ts::random_network(rng, 3 + static_cast<int>(rng.next() % 6));
    QuerySpec spec = ts::random_spec(rng, net);

    Distribution want;
    try {
      want = brute_force_query(s, net, spec);
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::AllMassConditioned);
      // the compiled term must reach the same verdict
      EvalResult r = peval(s, compile_query(s, net, spec));
      CHECK_THROWS_MATCHES(marginalize_n(s, r.outcome), Error,
                           kind_is(ErrorKind::AllMassConditioned));
      ++conditioned_out;
      continue;
    }

    TermId term = compile_query(s, net, spec);
    Distribution got = marginalize_n(s, peval(s, term).outcome);
    check_close(got, want, 1e-9);
  }
  CHECK(conditioned_out < 30);  // the corpus mostly exercises the main path
}

TEST_CASE("chain marginals match the scalar recurrence") {
  TermStore s;
  for (int n : {2, 5, 8}) {
    Network net = ts::chain_network(n);
    QuerySpec spec{"X" + std::to_string(n - 1), {}};
    Distribution got = peval(s, compile_query(s, net, spec)).outcome;
    CHECK_THAT(got.mass_of(mk_true(s)),
               Catch::Matchers::WithinAbs(ts::chain_marginal(n), 1e-12));
    Distribution want = brute_force_query(s, net, spec);
    check_close(got, want, 1e-9);
  }
}
