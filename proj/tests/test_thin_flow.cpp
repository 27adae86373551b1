#include <catch2/catch_amalgamated.hpp>

#include "nashflow/thin_flow.hpp"
#include "test_instances.hpp"

using namespace nashflow;

TEST_CASE("congestion case split") {
  CHECK(congestion(Rat(1, 3), Rat(1, 2), Rat(1), true) == Rat(1, 2));
  CHECK(congestion(Rat(1, 3), Rat(1, 2), Rat(1), false) == Rat(1, 2));
  CHECK(congestion(Rat(2), Rat(0), Rat(1), false) == Rat(2));
  CHECK(congestion(Rat(2), Rat(0), Rat(1), true) == Rat(0));
}

TEST_CASE("check_thin_flow accepts the I1 phase-0 flow") {
  auto p = tf_problem_i1();
  ThinFlow tf{{Rat(1)}, {Rat(1)}, {Rat(1), Rat(1)}};
  CHECK(check_thin_flow(p, tf).pass());
}

TEST_CASE("check_thin_flow accepts the I2 flow and rejects a wrong label") {
  auto p = tf_problem_i2();
  ThinFlow good{{Rat(1)}, {Rat(1)}, {Rat(1, 2), Rat(1)}};
  CHECK(check_thin_flow(p, good).pass());

  ThinFlow bad{{Rat(1)}, {Rat(1)}, {Rat(1, 2), Rat(1, 2)}};
  auto cert = check_thin_flow(p, bad);
  REQUIRE(!cert.pass());
  bool tf3_at_t = false;
  for (const auto& v : cert.violations)
    if (v.condition == ThinFlowCondition::MinimumAttained && v.subject == "t") tf3_at_t = true;
  // l'_t = 1/2 breaks tightness on the arc and the minimum attainment at t
  CHECK(tf3_at_t);
}

TEST_CASE("check_thin_flow reports conservation and split-sum violations") {
  auto p = tf_problem_i1();
  ThinFlow bad{{Rat(1, 2)}, {Rat(1)}, {Rat(1), Rat(1)}};
  auto cert = check_thin_flow(p, bad);
  REQUIRE(!cert.pass());
  bool conservation = false, split_sum = false, tf1 = false;
  for (const auto& v : cert.violations) {
    conservation |= v.condition == ThinFlowCondition::Conservation;
    split_sum |= v.condition == ThinFlowCondition::SplitSum;
    tf1 |= v.condition == ThinFlowCondition::SourceLabel;
  }
  CHECK(conservation);
  CHECK(split_sum);
  CHECK(tf1);
}

TEST_CASE("solve_thin_flow golden cases") {
  SECTION("I1: unique unit flow") {
    ThinFlow tf = solve_thin_flow(tf_problem_i1());
    CHECK(tf.arc_flow[0] == Rat(1));
    CHECK(tf.labels[0] == Rat(1));
    CHECK(tf.labels[1] == Rat(1));
  }
  SECTION("I2: label 1/2 at the source") {
    ThinFlow tf = solve_thin_flow(tf_problem_i2());
    CHECK(tf.arc_flow[0] == Rat(1));
    CHECK(tf.labels[0] == Rat(1, 2));
    CHECK(tf.labels[1] == Rat(1));
  }
  SECTION("I3 phase 2: resetting arc halves the flow") {
    auto p = tf_problem_i3_phase2();
    ThinFlow tf = solve_thin_flow(p);
    REQUIRE(p.arcs[0].id == "e1");
    CHECK(tf.arc_flow[0] == Rat(1, 2));
    CHECK(tf.arc_flow[1] == Rat(1, 2));
    CHECK(tf.labels[0] == Rat(1, 3));
    CHECK(tf.labels[1] == Rat(1, 2));
  }
}

TEST_CASE("degenerate source with zero split") {
  ThinFlowProblem p;
  p.nodes = {"s1", "s2", "t"};
  p.arcs = {{"a", 0, 2, Rat(1), false}};  // s2 has no active outgoing arc
  p.sources = {{0, Rat(1)}, {1, Rat(1)}};
  p.sink = 2;
  p.finalize();
  ThinFlow tf = solve_thin_flow(p);
  CHECK(tf.splits[0] == Rat(1));
  CHECK(tf.splits[1] == Rat(0));
  CHECK(tf.labels[1] == Rat(0));  // source label with x'_i = 0
  CHECK(check_thin_flow(p, tf).pass());
}

TEST_CASE("oracle_enumerate golden cases") {
  SECTION("I1 has exactly one thin flow") {
    auto sols = oracle_enumerate(tf_problem_i1());
    REQUIRE(sols.size() == 1);
    CHECK(sols[0].arc_flow[0] == Rat(1));
    CHECK(sols[0].labels[0] == Rat(1));
  }
  SECTION("I2 has one label vector (1/2, 1)") {
    auto sols = oracle_enumerate(tf_problem_i2());
    REQUIRE(!sols.empty());
    for (const auto& s : sols) {
      CHECK(s.labels[0] == Rat(1, 2));
      CHECK(s.labels[1] == Rat(1));
    }
  }
  SECTION("I3 phase 2: labels (1/3, 1/2) in every solution") {
    auto sols = oracle_enumerate(tf_problem_i3_phase2());
    REQUIRE(!sols.empty());
    for (const auto& s : sols) {
      CHECK(s.labels[0] == Rat(1, 3));
      CHECK(s.labels[1] == Rat(1, 2));
    }
  }
}

TEST_CASE("oracle bound") {
  ThinFlowProblem p;
  p.nodes = {"a", "b"};
  for (int i = 0; i < 17; ++i)
    p.arcs.push_back({"e" + std::to_string(i), 0, 1, Rat(1), false});
  p.sources = {{0, Rat(1)}};
  p.sink = 1;
  p.finalize();
  CHECK_THROWS_AS(oracle_enumerate(p), OracleBoundExceeded);
}

TEST_CASE("solver is validated against the oracle on random problems") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    ThinFlowProblem p = random_tf_problem(seed);
    CAPTURE(seed, p.debug_dump());
    ThinFlow tf = solve_thin_flow(p);
    REQUIRE(check_thin_flow(p, tf).pass());
    auto sols = oracle_enumerate(p);
    REQUIRE(!sols.empty());
    for (const auto& s : sols)
      for (std::size_t v = 0; v < p.nodes.size(); ++v) CHECK(s.labels[v] == tf.labels[v]);
  }
}
