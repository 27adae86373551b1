#include <catch2/catch_amalgamated.hpp>

#include "nashflow/decomposition.hpp"
#include "nashflow/engine.hpp"
#include "test_instances.hpp"

using namespace nashflow;

namespace {

ExtendedInstance ext_of(const Instance& inst) { return build_extended_graph(validated(inst)); }

NashFlowProfile solve(const Instance& inst) {
  return construct_nash_flow(ext_of(inst), ExtRat::infinity(), 200).profile;
}

std::size_t arc_idx(const NashFlowProfile& p, const std::string& id) {
  return static_cast<std::size_t>(p.ext.graph.arc_index(id));
}

}  // namespace

TEST_CASE("single sink: the decomposition is the restriction itself") {
  NashFlowProfile p = solve(make_i1());
  for (const Phase& ph : p.phases) {
    auto parts = decompose_thin_flow(p.ext, ph.flow, ph.splits);
    REQUIRE(parts.size() == 1);
    Rat value(0);
    for (std::size_t e = 0; e < p.ext.original_arc_count(); ++e) {
      CHECK(parts[0][e] == ph.flow[e]);
      // value = net inflow into the (single) sink over original arcs
    }
    value = parts[0][arc_idx(p, "e")];
    CHECK(value == Rat(1));
  }
}

TEST_CASE("I4 phase 1: per-sink values are the demands and the flows cross") {
  NashFlowProfile p = solve(make_i4());
  REQUIRE(p.phases.size() == 1);
  auto parts = decompose_thin_flow(p.ext, p.phases[0].flow, p.phases[0].splits);
  REQUIRE(parts.size() == 2);
  // sink t1 is served via s2 -> t1, sink t2 via s1 -> t2
  CHECK(parts[0][arc_idx(p, "a21")] == Rat(1, 2));
  CHECK(parts[0][arc_idx(p, "a12")] == Rat(0));
  CHECK(parts[1][arc_idx(p, "a12")] == Rat(1, 2));
  CHECK(parts[1][arc_idx(p, "a21")] == Rat(0));
}

TEST_CASE("injected demand mismatch is rejected") {
  NashFlowProfile p = solve(make_i4());
  Phase ph = p.phases[0];
  std::size_t ej = static_cast<std::size_t>(p.ext.sink_arc_index[0]);
  ph.flow[ej] = Rat(1, 3);  // demand is 1/2
  CHECK_THROWS_AS(decompose_thin_flow(p.ext, ph.flow, ph.splits), DemandMismatch);
  try {
    decompose_thin_flow(p.ext, ph.flow, ph.splits);
  } catch (const DemandMismatch& e) {
    CHECK(e.sink_index == 0);
    CHECK(e.value == Rat(1, 3));
  }
}

TEST_CASE("path decomposition reproduces the flow and uses one sink arc per path") {
  NashFlowProfile p = solve(make_i4());
  const Phase& ph = p.phases[0];
  auto paths = decompose_paths(p.ext, ph.flow, ph.splits);
  std::vector<Rat> rebuilt(p.ext.graph.arc_count(), Rat(0));
  for (const auto& entry : paths) {
    std::size_t sink_arcs = 0;
    for (std::size_t e : entry.arcs)
      if (!p.ext.is_original_arc(e)) ++sink_arcs;
    CHECK(sink_arcs == 1);
    CHECK(entry.weight.sign() > 0);
    for (std::size_t e : entry.arcs) rebuilt[e] += entry.weight;
  }
  for (std::size_t e = 0; e < rebuilt.size(); ++e) CHECK(rebuilt[e] == ph.flow[e]);
}

TEST_CASE("per-phase superposition of the static decomposition is exact") {
  NashFlowProfile p = solve(make_i4());
  for (const Phase& ph : p.phases) {
    auto parts = decompose_thin_flow(p.ext, ph.flow, ph.splits);
    for (std::size_t e = 0; e < p.ext.original_arc_count(); ++e) {
      Rat sum(0);
      for (const auto& part : parts) sum += part[e];
      CHECK(sum == ph.flow[e]);
    }
    // each part alone conserves flow off the sources and its own sink
    for (std::size_t j = 0; j < parts.size(); ++j) {
      const auto& g = p.ext.graph;
      int tj = g.node_index(p.ext.base.raw().sinks[j].node);
      for (std::size_t v = 0; v < p.ext.base.raw().nodes.size(); ++v) {
        if (g.is_source(static_cast<int>(v)) || static_cast<int>(v) == tj) continue;
        Rat net(0);
        for (int e : g.out_arcs(static_cast<int>(v)))
          if (p.ext.is_original_arc(static_cast<std::size_t>(e)))
            net += parts[j][static_cast<std::size_t>(e)];
        for (int e : g.in_arcs(static_cast<int>(v)))
          if (p.ext.is_original_arc(static_cast<std::size_t>(e)))
            net -= parts[j][static_cast<std::size_t>(e)];
        CHECK(net == Rat(0));
      }
    }
  }
}

TEST_CASE("m = 1: sub-flow rate functions equal the flow itself") {
  NashFlowProfile p = solve(make_i2());
  auto subs = subflow_functions(p);
  REQUIRE(subs.size() == 1);
  EmittedRates rates = inflow_functions(p);
  for (std::size_t e = 0; e < p.ext.original_arc_count(); ++e)
    CHECK(step_equal(subs[0].rate[e], rates.arc_inflow[e]));
  CHECK(check_subflow_decomposition(p, subs).pass());
}

TEST_CASE("I4 sub-flows: crossing rates and exact certification") {
  NashFlowProfile p = solve(make_i4());
  auto subs = subflow_functions(p);
  REQUIRE(subs.size() == 2);
  // g^1 on s2 -> t1: (1/2) / (1/2) = 1 from time 0 on
  CHECK(subs[0].rate[arc_idx(p, "a21")].eval(Rat(3)) == Rat(1));
  CHECK(subs[0].rate[arc_idx(p, "a12")].eval(Rat(3)) == Rat(0));
  CHECK(subs[1].rate[arc_idx(p, "a12")].eval(Rat(3)) == Rat(1));
  // source distributions: sink t1's flow enters at s2
  CHECK(subs[0].source_dist[1].eval(Rat(5)) == Rat(1, 2));
  CHECK(subs[0].source_dist[0].eval(Rat(5)) == Rat(0));

  SubflowCertificate cert = check_subflow_decomposition(p, subs);
  CAPTURE(cert.to_string());
  CHECK(cert.pass());
}

TEST_CASE("multi-phase instances certify, including truncated runs") {
  for (auto maker : {make_i1, make_i3, make_i5}) {
    NashFlowProfile p = solve(maker());
    auto subs = subflow_functions(p);
    SubflowCertificate cert = check_subflow_decomposition(p, subs);
    CAPTURE(cert.to_string());
    CHECK(cert.pass());
  }
  NashFlowProfile p = construct_nash_flow(ext_of(make_i3()), ExtRat(Rat(1)), 200).profile;
  CHECK(check_subflow_decomposition(p, subflow_functions(p)).pass());
}

TEST_CASE("perturbed sub-flow rate breaks superposition") {
  NashFlowProfile p = solve(make_i4());
  auto subs = subflow_functions(p);
  StepFunction& r = subs[0].rate[arc_idx(p, "a21")];
  for (Rat& v : r.vals) v += Rat(1, 100);
  r.tail += Rat(1, 100);
  SubflowCertificate cert = check_subflow_decomposition(p, subs);
  REQUIRE(!cert.pass());
  bool superposition = false;
  for (const auto& i : cert.issues) superposition |= i.check == "superposition";
  CHECK(superposition);
}

TEST_CASE("sub-outflow timing: shares propagate along exit times") {
  NashFlowProfile p = solve(make_i4());
  auto subs = subflow_functions(p);
  EmittedRates rates = inflow_functions(p);
  std::size_t e = arc_idx(p, "a21");
  ArcTrajectory tr = simulate_queues(rates.arc_inflow[e], p.ext.graph.arc(e).capacity,
                                     p.ext.graph.arc(e).transit);
  StepFunction gout = nashflow::detail::subflow_outflow(tr, subs[0].rate[e]);
  // on this arc the whole flow belongs to sink t1: outflow share is 1
  std::vector<Rat> grid = merge_points(tr.outflow.cuts, gout.cuts);
  for (const Rat& mid : step_sample_points(grid))
    CHECK(gout.eval(mid) == tr.outflow.eval(mid));
}
