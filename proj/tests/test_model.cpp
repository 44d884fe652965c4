#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "llps/errors.hpp"
#include "llps/experiments.hpp"
#include "llps/model.hpp"
#include "llps/oracle.hpp"

using namespace llps;

namespace {

ProblemInstance single_node_instance(double e, double f, double ep, double fp, double r0,
                                     double r1) {
  return ProblemInstance{DirectedTree::line(1),
                         {TransitionParams{e, f, e, f, ep, fp, ep, fp}},
                         {RewardVector{r0, r1}}};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("local policies: four distinct state-action maps") {
  std::set<std::pair<int, int>> maps;
  for (int code = 0; code < LocalPolicy::kCount; ++code) {
    const LocalPolicy z(code);
    maps.insert({z.action(0), z.action(1)});
    CHECK(z.code() == z.action(0) + 2 * z.action(1));
  }
  CHECK(maps.size() == 4);
}

TEST_CASE("induced transition selects rows by the policy's per-state action") {
  const TransitionParams p{0.11, 0.22, 0.33, 0.44, 0.55, 0.66, 0.77, 0.88};

  SUBCASE("always-0 keeps the unprimed parameters") {
    const InducedRows r = induced_transition(p, LocalPolicy(0));
    CHECK(r.alpha == p.e);
    CHECK(r.beta == p.f);
    CHECK(r.gamma == p.g);
    CHECK(r.omega == p.h);
  }
  SUBCASE("identity map primes only the state-1 rows") {
    const InducedRows r = induced_transition(p, LocalPolicy(2));
    CHECK(r.alpha == p.e);
    CHECK(r.beta == p.fp);
    CHECK(r.gamma == p.g);
    CHECK(r.omega == p.hp);
  }
  SUBCASE("always-1 primes everything") {
    const InducedRows r = induced_transition(p, LocalPolicy(3));
    CHECK(r.alpha == p.ep);
    CHECK(r.beta == p.fp);
    CHECK(r.gamma == p.gp);
    CHECK(r.omega == p.hp);
  }
  SUBCASE("the four policies produce exactly the four row combinations") {
    // alpha and gamma switch together on action(0), beta and omega on
    // action(1).
    std::set<std::tuple<double, double, double, double>> seen;
    for (int code = 0; code < 4; ++code) {
      const InducedRows r = induced_transition(p, LocalPolicy(code));
      const LocalPolicy z(code);
      CHECK(r.alpha == (z.action(0) ? p.ep : p.e));
      CHECK(r.gamma == (z.action(0) ? p.gp : p.g));
      CHECK(r.beta == (z.action(1) ? p.fp : p.f));
      CHECK(r.omega == (z.action(1) ? p.hp : p.h));
      CHECK(r.alpha >= 0.0);
      CHECK(r.omega <= 1.0);
      seen.insert({r.alpha, r.beta, r.gamma, r.omega});
    }
    CHECK(seen.size() == 4);
  }
}

TEST_CASE("tree construction and parent paths") {
  SUBCASE("line paths") {
    const DirectedTree line = DirectedTree::line(10);
    CHECK(line.k_hop_path(9, 3) == std::vector<int>{9, 8, 7, 6});
    CHECK(line.k_hop_path(0, 5) == std::vector<int>{0});
    CHECK(line.depth(9) == 9);
    CHECK(line.max_degree() == 1);
  }
  SUBCASE("path stops at the root when the node is shallow") {
    const DirectedTree t = DirectedTree::from_parents({std::nullopt, 0, 1, 1});
    CHECK(t.k_hop_path(2, 5) == std::vector<int>{2, 1, 0});
    CHECK(t.depth(2) == 2);
  }
  SUBCASE("bfs order puts parents first") {
    const DirectedTree t = llps::harness::case_study_tree();
    CHECK(t.size() == 9);
    CHECK(t.max_depth() == 3);
    const auto& order = t.bfs_order();
    CHECK(order.front() == t.root());
    std::vector<int> seen_at(static_cast<std::size_t>(t.size()));
    for (std::size_t pos = 0; pos < order.size(); ++pos)
      seen_at[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);
    for (int i = 0; i < t.size(); ++i)
      if (t.parent(i)) CHECK(seen_at[static_cast<std::size_t>(*t.parent(i))] < seen_at[static_cast<std::size_t>(i)]);
  }
  SUBCASE("malformed parent arrays are rejected") {
    CHECK_THROWS_AS(DirectedTree::from_parents({1, 0}), ParseError);                 // 2-cycle
    CHECK_THROWS_AS(DirectedTree::from_parents({std::nullopt, std::nullopt}), ParseError);
    CHECK_THROWS_AS(DirectedTree::from_parents({std::nullopt, 7}), ParseError);      // range
    CHECK_THROWS_AS(DirectedTree::from_parents({std::nullopt, 1}), ParseError);      // self
    CHECK_THROWS_AS(DirectedTree::from_parents({std::nullopt, 2, 1}), ParseError);   // loop off root
  }
}

TEST_CASE("parsing instance documents") {
  SUBCASE("minimal single-node document") {
    const ProblemInstance inst = parse_instance(
        R"({"nodes":1,"parent":[null],"params":[[0.5,0.5,0.5,0.5]],"rewards":[[0,1]]})");
    CHECK(inst.size() == 1);
    CHECK(inst.reward_bound() == 1.0);
    CHECK(inst.params[0].e == 0.5);
    CHECK(inst.params[0].g == 0.5);  // mirrored
  }
  SUBCASE("nine-node case-study topology") {
    const ProblemInstance inst = random_instance(llps::harness::case_study_tree(), 3);
    const ProblemInstance again = parse_instance(serialize_instance(inst));
    CHECK(again.size() == 9);
    CHECK(again.tree.max_depth() == 3);
  }
  SUBCASE("cyclic parent array") {
    CHECK_THROWS_WITH_AS(
        parse_instance(
            R"({"nodes":3,"parent":[null,2,1],"params":[[0.5,0.5,0.5,0.5],[0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5],[0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5]],"rewards":[[0,1],[0,1],[0,1]]})"),
        doctest::Contains("cyclic"), ParseError);
  }
  SUBCASE("probability out of range") {
    CHECK_THROWS_AS(parse_instance(
                        R"({"nodes":1,"parent":[null],"params":[[1.5,0.5,0.5,0.5]],"rewards":[[0,1]]})"),
                    ParseError);
  }
  SUBCASE("inconsistent 8-parameter root") {
    CHECK_THROWS_AS(
        parse_instance(
            R"({"nodes":1,"parent":[null],"params":[[0.5,0.5,0.6,0.5,0.5,0.5,0.5,0.5]],"rewards":[[0,1]]})"),
        ParseError);
  }
  SUBCASE("consistent 8-parameter root is accepted") {
    const ProblemInstance inst = parse_instance(
        R"({"nodes":1,"parent":[null],"params":[[0.1,0.2,0.1,0.2,0.3,0.4,0.3,0.4]],"rewards":[[0,1]]})");
    CHECK(inst.params[0].ep == 0.3);
  }
  SUBCASE("non-root nodes must give 8 parameters") {
    CHECK_THROWS_AS(
        parse_instance(
            R"({"nodes":2,"parent":[null,0],"params":[[0.5,0.5,0.5,0.5],[0.5,0.5,0.5,0.5]],"rewards":[[0,1],[0,1]]})"),
        ParseError);
  }
  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS(parse_instance("{nodes:"), ParseError);
  }
}

TEST_CASE("serialization round-trips bit-exactly") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    Xoshiro256StarStar gen(seed);
    const DirectedTree tree = testutil::random_tree(2 + static_cast<int>(seed), 3, gen);
    const ProblemInstance inst = random_instance(tree, gen);
    const ProblemInstance back = parse_instance(serialize_instance(inst));
    REQUIRE(back.size() == inst.size());
    for (int i = 0; i < inst.size(); ++i) {
      const auto& a = inst.params[static_cast<std::size_t>(i)];
      const auto& b = back.params[static_cast<std::size_t>(i)];
      CHECK(a.e == b.e);
      CHECK(a.f == b.f);
      CHECK(a.g == b.g);
      CHECK(a.h == b.h);
      CHECK(a.ep == b.ep);
      CHECK(a.fp == b.fp);
      CHECK(a.gp == b.gp);
      CHECK(a.hp == b.hp);
      CHECK(inst.rewards[static_cast<std::size_t>(i)].r0 == back.rewards[static_cast<std::size_t>(i)].r0);
      CHECK(inst.rewards[static_cast<std::size_t>(i)].r1 == back.rewards[static_cast<std::size_t>(i)].r1);
      CHECK(inst.tree.parent(i) == back.tree.parent(i));
    }
  }
}

TEST_CASE("policy documents") {
  const PolicyProfile profile{LocalPolicy(0), LocalPolicy(3), LocalPolicy(1)};
  const PolicyProfile back = parse_policy(serialize_policy(profile));
  CHECK(back == profile);
  CHECK_THROWS_AS(parse_policy(R"({"policy":[4]})"), ParseError);
  CHECK_THROWS_AS(parse_policy(R"({"wrong":[]})"), ParseError);
}

TEST_CASE("validation flags non-ergodic induced chains") {
  SUBCASE("uniform parameters validate") {
    const ProblemInstance inst = single_node_instance(0.5, 0.5, 0.5, 0.5, 0, 1);
    CHECK(validate_instance(inst).ok());
  }
  SUBCASE("absorbing two-state chain is reported") {
    // e=1, f=0 makes the always-0 policy induce |alpha-beta| = 1.
    ProblemInstance inst{DirectedTree::line(2),
                         {TransitionParams{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
                          TransitionParams{1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}},
                         {RewardVector{0, 1}, RewardVector{0, 1}}};
    const ValidationReport report = validate_instance(inst);
    REQUIRE_FALSE(report.ok());
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].node == 1);
    CHECK(report.violations[0].parent_state == 0);
    CHECK(report.violations[0].policy.code() == 0);
    CHECK(report.violations[0].row_gap == 1.0);
    CHECK_THROWS_AS(require_valid(inst), ValidationError);
  }
  SUBCASE("interior parameters always validate") {
    // Band [0.05, 0.95] keeps every induced row difference at most 0.9.
    Xoshiro256StarStar gen(99);
    for (int trial = 0; trial < 50; ++trial) {
      const DirectedTree tree = testutil::random_tree(5, 4, gen);
      ProblemInstance inst = random_instance(tree, gen);
      for (auto& p : inst.params)
        for (double* v : {&p.e, &p.f, &p.g, &p.h, &p.ep, &p.fp, &p.gp, &p.hp})
          *v = 0.05 + 0.9 * *v;
      CHECK(validate_instance(inst).ok());
      // independent route: check all 8 row differences directly
      for (const auto& p : inst.params) {
        for (double d : {p.e - p.f, p.e - p.fp, p.ep - p.f, p.ep - p.fp, p.g - p.h, p.g - p.hp,
                         p.gp - p.h, p.gp - p.hp})
          CHECK(std::abs(d) <= 0.9 + 1e-15);
      }
    }
  }
}

TEST_CASE("random instances are deterministic in the seed") {
  const DirectedTree tree = DirectedTree::line(6);
  CHECK(serialize_instance(random_instance(tree, 1)) ==
        serialize_instance(random_instance(tree, 1)));
  CHECK(serialize_instance(random_instance(tree, 1)) !=
        serialize_instance(random_instance(tree, 2)));
}

TEST_CASE("generator draws look uniform") {
  Xoshiro256StarStar gen(1234);
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double u = gen.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  const double mean = sum / 1000.0;
  CHECK(mean >= 0.45);
  CHECK(mean <= 0.55);
}

TEST_CASE("sampled instance parameters look uniform") {
  Xoshiro256StarStar gen(4321);
  double sum = 0.0;
  int count = 0;
  while (count < 1000) {
    const ProblemInstance inst = random_instance(DirectedTree::line(20), gen);
    for (std::size_t i = 0; i < inst.params.size(); ++i) {
      const auto& p = inst.params[i];
      const bool root = static_cast<int>(i) == inst.tree.root();
      for (double v : {p.e, p.f, p.ep, p.fp}) {
        sum += v;
        ++count;
      }
      if (!root)
        for (double v : {p.g, p.h, p.gp, p.hp}) {
          sum += v;
          ++count;
        }
    }
  }
  const double mean = sum / count;
  CHECK(mean >= 0.45);
  CHECK(mean <= 0.55);
}

TEST_CASE("certificate-feasible random instances") {
  SUBCASE("equality constraints hold to 1e-12 and the certificate accepts") {
    for (std::uint64_t seed : {10, 11, 12}) {
      const CertifiedInstance ci = random_certified_instance(DirectedTree::line(6), seed);
      CHECK(ci.rho >= 0.0);
      CHECK(ci.rho < 1.0);
      CHECK(validate_instance(ci.instance).ok());
      for (const auto& p : ci.instance.params) {
        CHECK(std::abs((p.e - p.f) - (p.g - p.h)) <= 1e-12);
        CHECK(std::abs((p.e - p.fp) - (p.g - p.hp)) <= 1e-12);
        CHECK(std::abs((p.ep - p.f) - (p.gp - p.h)) <= 1e-12);
        CHECK(std::abs((p.ep - p.fp) - (p.gp - p.hp)) <= 1e-12);
      }
      const DecayCertificate cert = decay_certificate(ci.instance);
      CHECK(cert.satisfied);
      CHECK(cert.rho == doctest::Approx(ci.rho).epsilon(1e-15));
    }
  }
  SUBCASE("zero coupling gives rho = 0") {
    // e = g and e' = g' at every node: all four ratio numerators vanish.
    ProblemInstance inst{DirectedTree::line(3),
                         {TransitionParams{0.6, 0.4, 0.6, 0.4, 0.3, 0.2, 0.3, 0.2},
                          TransitionParams{0.7, 0.5, 0.7, 0.5, 0.4, 0.1, 0.4, 0.1},
                          TransitionParams{0.5, 0.5, 0.5, 0.5, 0.9, 0.8, 0.9, 0.8}},
                         {RewardVector{0, 1}, RewardVector{0, 1}, RewardVector{0, 1}}};
    const DecayCertificate cert = decay_certificate(inst);
    CHECK(cert.satisfied);
    CHECK(cert.rho == 0.0);
  }
}

}  // TEST_SUITE
