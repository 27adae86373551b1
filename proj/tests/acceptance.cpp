// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Everything is exact rational arithmetic; the runtime bounds are
// part of the criteria and measured here.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "nashflow/nashflow.hpp"
#include "test_instances.hpp"

using namespace nashflow;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

struct SolvedInstance {
  ExtendedInstance ext;
  NashFlowProfile profile;
};

// ---------------------------------------------------------------------------
// criterion 1: thin-flow solver certified against the enumeration oracle
// ---------------------------------------------------------------------------
void criterion_1() {
  auto start = Clock::now();
  const int total = 500;
  int bad = 0;
  std::string witness;
  for (int i = 1; i <= total; ++i) {
    ThinFlowProblem p = random_tf_problem(static_cast<std::uint64_t>(i));
    ThinFlow tf = solve_thin_flow(p);
    if (!check_thin_flow(p, tf).pass()) {
      ++bad;
      witness = "solver output failed certification at seed " + std::to_string(i);
      continue;
    }
    auto sols = oracle_enumerate(p);
    if (sols.empty()) {
      ++bad;
      witness = "oracle found no thin flow at seed " + std::to_string(i);
      continue;
    }
    for (const auto& s : sols)
      for (std::size_t v = 0; v < p.nodes.size(); ++v)
        if (s.labels[v] != tf.labels[v]) {
          ++bad;
          witness = "label mismatch vs oracle at seed " + std::to_string(i);
          v = p.nodes.size();
          break;
        }
  }
  double secs = seconds_since(start);
  bool pass = bad == 0 && secs < 60.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d problems, %d failures, %.1fs (budget 60s)%s%s", total, bad,
                secs, witness.empty() ? "" : "; ", witness.c_str());
  report(1, "thin-flow certification against the oracle", pass, buf);
}

// ---------------------------------------------------------------------------
// criterion 3: golden trace I3
// ---------------------------------------------------------------------------
SolvedInstance criterion_3() {
  ExtendedInstance ext = build_extended_graph(validated(make_i3()));
  BuildResult run = construct_nash_flow(ext, ExtRat::infinity(), 100);
  const NashFlowProfile& p = run.profile;
  bool pass = p.phases.size() == 2;
  std::string detail = "phases=" + std::to_string(p.phases.size());
  if (pass) {
    std::size_t e1 = static_cast<std::size_t>(ext.graph.arc_index("e1"));
    std::size_t e2 = static_cast<std::size_t>(ext.graph.arc_index("e2"));
    std::size_t s = static_cast<std::size_t>(ext.graph.node_index("s"));
    std::size_t t = static_cast<std::size_t>(ext.graph.node_index("t"));
    const Phase& ph2 = p.phases[1];
    pass = p.phases[0].phi_end == ExtRat(Rat(3, 2)) && ph2.flow[e1] == Rat(1, 2) &&
           ph2.flow[e2] == Rat(1, 2) && ph2.label_slope[s] == Rat(1, 3) &&
           ph2.label_slope[t] == Rat(1, 2);
    detail += ", boundary=" + p.phases[0].phi_end.str() + ", phase-2 thin flow (" +
              ph2.flow[e1].str() + ", " + ph2.flow[e2].str() + ", " + ph2.label_slope[s].str() +
              ", " + ph2.label_slope[t].str() + ")";
  }
  report(3, "golden trace I3", pass, detail);
  return {ext, run.profile};
}

// ---------------------------------------------------------------------------
// criteria 4/5/6 share the random end-to-end corpus
// ---------------------------------------------------------------------------
std::vector<SolvedInstance> criterion_4() {
  auto start = Clock::now();
  const int total = 100;
  int built = 0, certified = 0;
  std::vector<SolvedInstance> corpus;
  std::string witness;
  for (int i = 1; i <= total; ++i) {
    detail::SplitMix rng(static_cast<std::uint64_t>(i) * 7919);
    GeneratorParams params;
    params.nodes = 4 + rng.below(3);  // 4..6
    params.sinks = 1 + rng.below(3);  // 1..3
    std::size_t max_sources = params.nodes - params.sinks;
    params.sources = 1 + rng.below(max_sources < 3 ? max_sources : 3);
    params.extra_arcs = 2 + rng.below(3);
    Instance inst = generate_random_instance(static_cast<std::uint64_t>(i), params);
    ExtendedInstance ext = build_extended_graph(validated(inst));
    ++built;
    try {
      BuildResult run = construct_nash_flow(ext, ExtRat(Rat(50)), 500, false);
      NashCertificate cert = verify_nash(run.profile);
      if (cert.pass()) {
        ++certified;
      } else if (witness.empty()) {
        witness = "verify_nash failed at seed " + std::to_string(i);
      }
      corpus.push_back({ext, std::move(run.profile)});
    } catch (const std::exception& e) {
      if (witness.empty()) witness = "seed " + std::to_string(i) + ": " + e.what();
    }
  }
  double secs = seconds_since(start);
  bool pass = certified == total && secs < 300.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%d/%d instances certified, %.1fs (budget 300s)%s%s", certified,
                built, secs, witness.empty() ? "" : "; ", witness.c_str());
  report(4, "end-to-end Nash certification on random instances", pass, buf);
  return corpus;
}

void criterion_2(const std::vector<SolvedInstance>& corpus) {
  int violations = 0;
  std::size_t phases = 0;
  for (const auto& run : corpus) {
    Rat bound = Rat(1) / run.ext.sigma_value;
    for (const Phase& ph : run.profile.phases) {
      ++phases;
      for (std::size_t v = 0; v < run.ext.base.raw().nodes.size(); ++v)
        if (ph.label_slope[v] > bound) ++violations;
    }
  }
  report(2, "thin-flow label bound l' <= 1/sigma on original nodes", violations == 0,
         std::to_string(phases) + " phases, " + std::to_string(violations) + " violations");
}

void criterion_5(const std::vector<SolvedInstance>& corpus) {
  int violations = 0;
  std::size_t phases = 0;
  for (const auto& run : corpus) {
    for (const Phase& ph : run.profile.phases) {
      ++phases;
      for (std::size_t j = 0; j < run.ext.sink_arc_index.size(); ++j) {
        std::size_t ej = static_cast<std::size_t>(run.ext.sink_arc_index[j]);
        if (!ph.active[ej]) ++violations;
        if (ph.flow[ej] != run.ext.base.raw().sinks[j].demand) ++violations;
      }
    }
  }
  report(5, "super-sink arcs active with flow equal to the demand", violations == 0,
         std::to_string(phases) + " phases, " + std::to_string(violations) + " violations");
}

void criterion_6(const std::vector<SolvedInstance>& corpus) {
  int failed = 0;
  std::string witness;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      auto subs = subflow_functions(corpus[i].profile);
      SubflowCertificate cert = check_subflow_decomposition(corpus[i].profile, subs);
      if (!cert.pass()) {
        ++failed;
        if (witness.empty()) witness = "run " + std::to_string(i) + " failed decomposition check";
      }
    } catch (const std::exception& e) {
      ++failed;
      if (witness.empty()) witness = std::string("run threw: ") + e.what();
    }
  }
  report(6, "sub-flow decomposition certified on every run", failed == 0,
         std::to_string(corpus.size()) + " runs, " + std::to_string(failed) + " failures" +
             (witness.empty() ? "" : "; " + witness));
}

void criterion_7() {
  ExtendedInstance ext = build_extended_graph(validated(make_i4()));
  NashFlowProfile p = construct_nash_flow(ext, ExtRat::infinity(), 200).profile;
  std::size_t t1 = static_cast<std::size_t>(ext.graph.node_index("t1"));
  std::size_t t2 = static_cast<std::size_t>(ext.graph.node_index("t2"));
  bool pass = pl_equal(p.labels[t1], p.labels[t2]);
  report(7, "equal-demand sinks have identical arrival labels (I4)", pass,
         pass ? "exact piecewise-linear equality" : "labels differ");
}

void criterion_8() {
  int caught = 0;
  std::vector<std::string> missed;
  auto expect = [&](const char* name, bool detected) {
    if (detected)
      ++caught;
    else
      missed.push_back(name);
  };

  ExtendedInstance i3 = build_extended_graph(validated(make_i3()));
  NashFlowProfile base3 = construct_nash_flow(i3, ExtRat::infinity(), 100).profile;
  std::size_t e1 = static_cast<std::size_t>(i3.graph.arc_index("e1"));
  std::size_t e2 = static_cast<std::size_t>(i3.graph.arc_index("e2"));
  std::size_t t3 = static_cast<std::size_t>(i3.graph.node_index("t"));

  {  // 1. flow split perturbation
    NashFlowProfile p = base3;
    p.phases[1].flow[e1] = Rat(3, 4);
    p.phases[1].flow[e2] = Rat(1, 4);
    p.rebuild_functions();
    NashCertificate cert = verify_nash(p);
    bool on_e2 = false;
    for (const auto& i : cert.cumulative) on_e2 |= i.subject == "e2";
    expect("flow-split", !cert.pass() && on_e2);
  }
  {  // 2. label perturbation
    NashFlowProfile p = base3;
    p.phases.back().label_slope[t3] += Rat(1, 100);
    p.rebuild_functions();
    NashCertificate cert = verify_nash(p);
    expect("label", !cert.label_mismatch.empty());
  }
  {  // 3. flow on an inactive arc
    NashFlowProfile p = base3;
    p.phases[0].flow[e2] = Rat(1, 100);
    p.phases[0].flow[e1] = Rat(99, 100);
    p.rebuild_functions();
    NashCertificate cert = verify_nash(p);
    expect("inactive-arc-flow", !cert.inactive_inflow.empty());
  }
  {  // 4. demand mismatch rejected by the decomposition
    ExtendedInstance i4 = build_extended_graph(validated(make_i4()));
    NashFlowProfile p = construct_nash_flow(i4, ExtRat::infinity(), 100).profile;
    Phase ph = p.phases[0];
    ph.flow[static_cast<std::size_t>(i4.sink_arc_index[0])] = Rat(1, 3);
    bool detected = false;
    try {
      decompose_thin_flow(i4, ph.flow, ph.splits);
    } catch (const DemandMismatch&) {
      detected = true;
    }
    expect("demand-mismatch", detected);
  }
  {  // 5. broken FIFO
    ExtendedInstance i2 = build_extended_graph(validated(make_i2()));
    NashFlowProfile p = construct_nash_flow(i2, ExtRat::infinity(), 100).profile;
    EmittedRates rates = inflow_functions(p);
    std::size_t e = static_cast<std::size_t>(i2.graph.arc_index("e"));
    ArcTrajectory tr = simulate_queues(rates.arc_inflow[e], Rat(1), Rat(0));
    for (Rat& v : tr.outflow.vals) v = v / Rat(2);
    tr.outflow.tail = tr.outflow.tail / Rat(2);
    tr.cum_out = step_integral(tr.outflow, Rat(0));
    expect("fifo", !cumulative_identity_check(tr, Rat(0), "e").empty());
  }
  {  // 6. broken conservation
    ExtendedInstance i5 = build_extended_graph(validated(make_i5()));
    NashFlowProfile p = construct_nash_flow(i5, ExtRat::infinity(), 100).profile;
    std::size_t ee = static_cast<std::size_t>(i5.graph.arc_index("e2"));
    p.phases[0].flow[ee] = p.phases[0].flow[ee] * Rat(2, 3);
    p.rebuild_functions();
    NashCertificate cert = verify_nash(p);
    expect("conservation", !cert.conservation.empty());
  }

  std::string detail = std::to_string(caught) + "/6 corruption classes detected";
  for (const auto& m : missed) detail += ", missed: " + m;
  report(8, "checker sensitivity to seeded corruptions", caught == 6, detail);
}

void criterion_9() {
  auto start = Clock::now();
  const int total = 200;
  int bad = 0;
  const std::vector<Rat> rate_pool = {Rat(0),    Rat(1, 3), Rat(1, 2), Rat(1),
                                      Rat(3, 2), Rat(2),    Rat(3)};
  for (int seed = 1; seed <= total; ++seed) {
    detail::SplitMix rng(static_cast<std::uint64_t>(seed) * 31337);
    StepFunction f = StepFunction::zero(Rat(static_cast<long>(rng.below(3)), 2));
    Rat t = f.start();
    std::size_t pieces = 1 + rng.below(6);
    for (std::size_t k = 0; k < pieces; ++k) {
      Rat len = Rat(static_cast<long>(1 + rng.below(5)), 2);
      f.append(t, t + len, rate_pool[rng.below(rate_pool.size())]);
      t += len;
    }
    f.tail = rate_pool[rng.below(rate_pool.size())];
    Rat nu = Rat(static_cast<long>(1 + rng.below(5)), 2);
    Rat tau = Rat(static_cast<long>(rng.below(4)), 2);
    ArcTrajectory tr = simulate_queues(f, nu, tau);
    if (!cumulative_identity_check(tr, tau, "arc").empty()) ++bad;
    if (!exit_time_derivative_check(tr, nu, tau, "arc").empty()) ++bad;
  }
  double secs = seconds_since(start);
  bool pass = bad == 0 && secs < 30.0;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d scenarios, %d failures, %.1fs (budget 30s)", total, bad, secs);
  report(9, "simulator identities (queue, FIFO, exit-time derivative)", pass, buf);
}

}  // namespace

int main() {
  criterion_1();
  SolvedInstance golden = criterion_3();
  std::vector<SolvedInstance> corpus = criterion_4();
  corpus.push_back(std::move(golden));
  for (auto maker : {make_i1, make_i2, make_i4, make_i5}) {
    ExtendedInstance ext = build_extended_graph(validated(maker()));
    corpus.push_back({ext, construct_nash_flow(ext, ExtRat::infinity(), 200).profile});
  }
  criterion_2(corpus);
  criterion_5(corpus);
  criterion_6(corpus);
  criterion_7();
  criterion_8();
  criterion_9();

  if (failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
