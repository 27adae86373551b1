#include <catch2/catch_amalgamated.hpp>

#include "nashflow/engine.hpp"
#include "test_instances.hpp"

using namespace nashflow;

namespace {

ExtendedInstance ext_of(const Instance& inst) { return build_extended_graph(validated(inst)); }

std::size_t arc_idx(const ExtendedInstance& ext, const std::string& id) {
  return static_cast<std::size_t>(ext.graph.arc_index(id));
}

std::size_t node_idx(const ExtendedInstance& ext, const std::string& id) {
  return static_cast<std::size_t>(ext.graph.node_index(id));
}

}  // namespace

TEST_CASE("initial labels are shortest transit distances") {
  ExtendedInstance i1 = ext_of(make_i1());
  auto l1 = initial_labels(i1);
  CHECK(l1[node_idx(i1, "s")] == Rat(0));
  CHECK(l1[node_idx(i1, "t")] == Rat(0));
  CHECK(l1[node_idx(i1, i1.super_sink)] == Rat(0));

  ExtendedInstance i3 = ext_of(make_i3());
  auto l3 = initial_labels(i3);
  CHECK(l3[node_idx(i3, "t")] == Rat(0));  // via e1, not e2

  // different sink distances: the super sink starts at delta_max
  Instance two;
  two.nodes = {"s", "t1", "t2"};
  two.arcs = {{"e1", "s", "t1", Rat(3), Rat(1)}, {"e2", "s", "t2", Rat(1), Rat(1)}};
  two.sources = {{"s", Rat(1)}};
  two.sinks = {{"t1", Rat(1, 2)}, {"t2", Rat(1, 2)}};
  ExtendedInstance ext = ext_of(two);
  auto labels = initial_labels(ext);
  CHECK(labels[node_idx(ext, ext.super_sink)] == Rat(3));  // delta_max
}

TEST_CASE("active and resetting sets from labels") {
  ExtendedInstance i3 = ext_of(make_i3());

  SECTION("at phi = 0 only the short arc is active") {
    auto sets = active_and_resetting_sets(i3.graph, initial_labels(i3));
    CHECK(sets.active[arc_idx(i3, "e1")]);
    CHECK(!sets.active[arc_idx(i3, "e2")]);
    CHECK(!sets.resetting[arc_idx(i3, "e1")]);
    CHECK(sets.active[static_cast<std::size_t>(i3.sink_arc_index[0])]);
  }

  SECTION("at phi = 3/2 both arcs are active, e1 resetting") {
    std::vector<Rat> labels(i3.graph.node_count());
    labels[node_idx(i3, "s")] = Rat(1, 2);
    labels[node_idx(i3, "t")] = Rat(3, 2);
    labels[node_idx(i3, i3.super_sink)] = Rat(3);
    auto sets = active_and_resetting_sets(i3.graph, labels);
    CHECK(sets.active[arc_idx(i3, "e1")]);
    CHECK(sets.active[arc_idx(i3, "e2")]);
    CHECK(sets.resetting[arc_idx(i3, "e1")]);
    CHECK(!sets.resetting[arc_idx(i3, "e2")]);
  }

  SECTION("infeasible labels are rejected") {
    std::vector<Rat> labels(i3.graph.node_count(), Rat(0));
    labels[node_idx(i3, "t")] = Rat(-1);  // t loses all incoming active arcs
    CHECK_THROWS_AS(active_and_resetting_sets(i3.graph, labels), InfeasibleLabels);
  }
}

TEST_CASE("compute_alpha") {
  ExtendedInstance i3 = ext_of(make_i3());
  const auto& g = i3.graph;

  SECTION("I3 phase 1: e2 activates at alpha = 3/2") {
    auto labels = initial_labels(i3);
    auto sets = active_and_resetting_sets(g, labels);
    std::vector<Rat> slope(g.node_count());
    slope[node_idx(i3, "s")] = Rat(1, 3);
    slope[node_idx(i3, "t")] = Rat(1);
    slope[node_idx(i3, i3.super_sink)] = Rat(2);
    auto ar = compute_alpha(g, labels, slope, sets);
    REQUIRE(ar.alpha.is_finite());
    CHECK(ar.alpha.value() == Rat(3, 2));
    REQUIRE(ar.events.size() == 1);
    CHECK(ar.events[0].type == PhaseEvent::Type::ArcBecameActive);
    CHECK(ar.events[0].arc == "e2");
  }

  SECTION("no binding constraint means steady state") {
    ExtendedInstance i1 = ext_of(make_i1());
    auto labels = initial_labels(i1);
    auto sets = active_and_resetting_sets(i1.graph, labels);
    std::vector<Rat> slope = {Rat(1), Rat(1), Rat(2)};
    auto ar = compute_alpha(i1.graph, labels, slope, sets);
    CHECK(!ar.alpha.is_finite());
    CHECK(ar.events.empty());
  }

  SECTION("queue depletion: slack 1, slope difference -1/2 gives alpha 2") {
    Instance micro;
    micro.nodes = {"u", "v"};
    micro.arcs = {{"e", "u", "v", Rat(0), Rat(1)}};
    micro.sources = {{"u", Rat(1)}};
    micro.sinks = {{"v", Rat(1)}};
    auto vi = validated(micro);
    std::vector<Rat> labels = {Rat(0), Rat(1)};  // slack 1 on e
    ActiveSets sets{{1}, {1}};
    std::vector<Rat> slope = {Rat(1), Rat(1, 2)};  // l'_v - l'_u = -1/2
    auto ar = compute_alpha(vi, labels, slope, sets);
    REQUIRE(ar.alpha.is_finite());
    CHECK(ar.alpha.value() == Rat(2));
    REQUIRE(ar.events.size() == 1);
    CHECK(ar.events[0].type == PhaseEvent::Type::QueueDepleted);
  }
}

TEST_CASE("extend appends phases and extends labels linearly") {
  ExtendedInstance i3 = ext_of(make_i3());
  BuildResult run = construct_nash_flow(i3, ExtRat::infinity(), 100);
  const NashFlowProfile& p = run.profile;

  // after phase 1: l_s(3/2) = 1/2, l_t(3/2) = 3/2
  CHECK(p.labels[node_idx(i3, "s")].eval(Rat(3, 2)) == Rat(1, 2));
  CHECK(p.labels[node_idx(i3, "t")].eval(Rat(3, 2)) == Rat(3, 2));
  // sampled inside phase 2: l_t(3) = 3/2 + (3/2)(1/2) = 9/4
  CHECK(p.labels[node_idx(i3, "t")].eval(Rat(3)) == Rat(9, 4));

  // zero-length extensions are rejected
  NashFlowProfile scratch = p;
  CHECK_THROWS_AS(extend(scratch, p.phases[0].labels_start,
                         ActiveSets{p.phases[0].active, p.phases[0].resetting},
                         p.phases[0].splits, p.phases[0].flow, p.phases[0].label_slope,
                         ExtRat(Rat(0)), {}),
                  std::logic_error);
}

TEST_CASE("golden trace I1: one steady phase, l_t = phi") {
  ExtendedInstance i1 = ext_of(make_i1());
  BuildResult run = construct_nash_flow(i1, ExtRat::infinity(), 100);
  CHECK(run.status == BuildStatus::SteadyState);
  REQUIRE(run.profile.phases.size() == 1);
  CHECK(run.profile.steady_state);
  const PiecewiseLinear& lt = run.profile.labels[node_idx(i1, "t")];
  CHECK(lt.eval(Rat(0)) == Rat(0));
  CHECK(lt.eval(Rat(7)) == Rat(7));
  const PiecewiseLinear& ls = run.profile.labels[node_idx(i1, "s")];
  CHECK(ls.eval(Rat(7)) == Rat(7));
}

TEST_CASE("golden trace I2: permanent queue, l_s = phi/2") {
  ExtendedInstance i2 = ext_of(make_i2());
  BuildResult run = construct_nash_flow(i2, ExtRat::infinity(), 100);
  CHECK(run.status == BuildStatus::SteadyState);
  REQUIRE(run.profile.phases.size() == 1);
  CHECK(run.profile.labels[node_idx(i2, "s")].eval(Rat(10)) == Rat(5));
  CHECK(run.profile.labels[node_idx(i2, "t")].eval(Rat(10)) == Rat(10));
}

TEST_CASE("golden trace I3: two phases with breakpoint 3/2") {
  ExtendedInstance i3 = ext_of(make_i3());
  BuildResult run = construct_nash_flow(i3, ExtRat::infinity(), 100);
  CHECK(run.status == BuildStatus::SteadyState);
  REQUIRE(run.profile.phases.size() == 2);

  const Phase& ph1 = run.profile.phases[0];
  CHECK(ph1.phi_end == ExtRat(Rat(3, 2)));
  REQUIRE(ph1.events.size() == 1);
  CHECK(ph1.events[0].type == PhaseEvent::Type::ArcBecameActive);
  CHECK(ph1.events[0].arc == "e2");
  CHECK(ph1.flow[arc_idx(i3, "e1")] == Rat(1));
  CHECK(ph1.flow[arc_idx(i3, "e2")] == Rat(0));
  CHECK(ph1.label_slope[node_idx(i3, "s")] == Rat(1, 3));
  CHECK(ph1.label_slope[node_idx(i3, "t")] == Rat(1));

  const Phase& ph2 = run.profile.phases[1];
  CHECK(!ph2.phi_end.is_finite());
  CHECK(ph2.flow[arc_idx(i3, "e1")] == Rat(1, 2));
  CHECK(ph2.flow[arc_idx(i3, "e2")] == Rat(1, 2));
  CHECK(ph2.label_slope[node_idx(i3, "s")] == Rat(1, 3));
  CHECK(ph2.label_slope[node_idx(i3, "t")] == Rat(1, 2));
  CHECK(ph2.resetting[arc_idx(i3, "e1")]);
  CHECK(!ph2.resetting[arc_idx(i3, "e2")]);
}

TEST_CASE("symmetric crossing: equal-demand sinks are served equally") {
  ExtendedInstance i4 = ext_of(make_i4());
  BuildResult run = construct_nash_flow(i4, ExtRat::infinity(), 100);
  CHECK(pl_equal(run.profile.labels[node_idx(i4, "t1")],
                 run.profile.labels[node_idx(i4, "t2")]));
}

TEST_CASE("emitted inflow and outflow rates") {
  SECTION("I2: inflow 2 and outflow 1 on (0, inf)") {
    ExtendedInstance i2 = ext_of(make_i2());
    NashFlowProfile p = construct_nash_flow(i2, ExtRat::infinity(), 100).profile;
    EmittedRates rates = inflow_functions(p);
    const StepFunction& f = rates.arc_inflow[arc_idx(i2, "e")];
    CHECK(f.eval(Rat(5)) == Rat(2));
    CHECK(f.eval(Rat(0)) == Rat(0));
    auto outs = outflow_functions(p);
    CHECK(outs[arc_idx(i2, "e")].eval(Rat(5)) == Rat(1));
    // source distribution: all of particle space enters at s
    CHECK(rates.source_dist[0].eval(Rat(3)) == Rat(1));
  }
  SECTION("I3 phase 2: f_e1 = 3/2 from time 1/2 on, outflow at capacity") {
    ExtendedInstance i3 = ext_of(make_i3());
    NashFlowProfile p = construct_nash_flow(i3, ExtRat::infinity(), 100).profile;
    EmittedRates rates = inflow_functions(p);
    const StepFunction& f1 = rates.arc_inflow[arc_idx(i3, "e1")];
    CHECK(f1.eval(Rat(1, 4)) == Rat(3));   // phase 1: 1 / (1/3)
    CHECK(f1.eval(Rat(1)) == Rat(3, 2));   // phase 2: (1/2) / (1/3)
    CHECK(f1.eval(Rat(100)) == Rat(3, 2));
    auto outs = outflow_functions(p);
    CHECK(outs[arc_idx(i3, "e1")].eval(Rat(2)) == Rat(1));  // = nu_e1
    // zero-flow arc in phase 1: rate 0 on the phase-1 image
    const StepFunction& f2 = rates.arc_inflow[arc_idx(i3, "e2")];
    CHECK(f2.eval(Rat(1, 4)) == Rat(0));
    CHECK(f2.eval(Rat(1)) == Rat(3, 2));
  }
}

TEST_CASE("horizon truncation") {
  ExtendedInstance i3 = ext_of(make_i3());
  BuildResult run = construct_nash_flow(i3, ExtRat(Rat(1)), 100);
  CHECK(run.status == BuildStatus::HorizonReached);
  REQUIRE(run.profile.phases.size() == 1);
  CHECK(run.profile.horizon == ExtRat(Rat(1)));
  REQUIRE(run.profile.phases[0].events.size() == 1);
  CHECK(run.profile.phases[0].events[0].type == PhaseEvent::Type::Horizon);
}

TEST_CASE("phase cap reports a partial profile") {
  ExtendedInstance i3 = ext_of(make_i3());
  BuildResult run = construct_nash_flow(i3, ExtRat::infinity(), 1, false);
  CHECK(run.status == BuildStatus::PhaseCapExceeded);
  CHECK(run.profile.phases.size() == 1);
}

TEST_CASE("event correctness: reported constraints tight, others strict") {
  ExtendedInstance i3 = ext_of(make_i3());
  NashFlowProfile p = construct_nash_flow(i3, ExtRat::infinity(), 100).profile;
  const auto& g = i3.graph;
  for (std::size_t k = 0; k + 1 < p.phases.size(); ++k) {
    const Phase& ph = p.phases[k];
    REQUIRE(ph.phi_end.is_finite());
    const Rat end = ph.phi_end.value();
    for (std::size_t e = 0; e < g.arc_count(); ++e) {
      std::size_t u = static_cast<std::size_t>(g.arc_tail(e));
      std::size_t v = static_cast<std::size_t>(g.arc_head(e));
      Rat slack = p.labels[v].eval(end) - p.labels[u].eval(end) - g.arc(e).transit;
      bool reported = false;
      for (const PhaseEvent& ev : ph.events) reported |= ev.arc == g.arc(e).id;
      if (ph.resetting[e] || !ph.active[e]) {
        CHECK((slack.sign() == 0) == reported);
      }
    }
  }
}

TEST_CASE("labels nondecreasing; steady state moves every label") {
  for (auto maker : {make_i1, make_i2, make_i3, make_i4, make_i5}) {
    ExtendedInstance ext = ext_of(maker());
    NashFlowProfile p = construct_nash_flow(ext, ExtRat::infinity(), 200).profile;
    for (const auto& l : p.labels) CHECK(l.nondecreasing());
    if (p.steady_state)
      for (const auto& l : p.labels) CHECK(l.final_slope.sign() > 0);
  }
}

TEST_CASE("per-phase invariants: sink arcs carry their demand, label bound holds") {
  ExtendedInstance i4 = ext_of(make_i4());
  NashFlowProfile p = construct_nash_flow(i4, ExtRat::infinity(), 100).profile;
  Rat bound = Rat(1) / i4.sigma_value;
  for (const Phase& ph : p.phases) {
    for (std::size_t j = 0; j < i4.sink_arc_index.size(); ++j) {
      CHECK(ph.active[static_cast<std::size_t>(i4.sink_arc_index[j])]);
      CHECK(ph.flow[static_cast<std::size_t>(i4.sink_arc_index[j])] ==
            i4.base.raw().sinks[j].demand);
    }
    for (std::size_t v = 0; v < i4.base.raw().nodes.size(); ++v)
      CHECK(ph.label_slope[v] <= bound);
  }
}
