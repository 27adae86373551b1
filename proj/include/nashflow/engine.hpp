#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nashflow/checker.hpp"
#include "nashflow/profile.hpp"
#include "nashflow/rational.hpp"
#include "nashflow/super_sink.hpp"
#include "nashflow/thin_flow.hpp"

namespace nashflow {

// ---------------------------------------------------------------------------
// Nash flow construction: chain thin flows with resetting through maximal
// alpha-extensions. Runs on the super-sink-extended single-sink instance;
// multi-sink entry always goes through build_extended_graph.
// ---------------------------------------------------------------------------

struct InfeasibleLabels : std::logic_error {
  explicit InfeasibleLabels(const std::string& what) : std::logic_error(what) {}
};

struct NonpositiveAlpha : std::logic_error {
  explicit NonpositiveAlpha(const std::string& what) : std::logic_error(what) {}
};

struct EngineInvariantViolation : std::logic_error {
  explicit EngineInvariantViolation(const std::string& what) : std::logic_error(what) {}
};

// l_v(0): shortest transit distance from the source set (no queues exist
// yet). Bellman-Ford over the extended graph; every node is reachable.
inline std::vector<Rat> initial_labels(const ExtendedInstance& ext) {
  const ValidatedInstance& g = ext.graph;
  const std::size_t n = g.node_count();
  std::vector<ExtRat> dist(n, ExtRat::infinity());
  for (int s : g.source_nodes()) dist[static_cast<std::size_t>(s)] = Rat(0);
  for (std::size_t round = 0; round + 1 < n || round == 0; ++round) {
    bool changed = false;
    for (std::size_t e = 0; e < g.arc_count(); ++e) {
      const auto& td = dist[static_cast<std::size_t>(g.arc_tail(e))];
      if (!td.is_finite()) continue;
      ExtRat cand = td + g.arc(e).transit;
      auto& hd = dist[static_cast<std::size_t>(g.arc_head(e))];
      if (cand < hd) {
        hd = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<Rat> out;
  out.reserve(n);
  for (const ExtRat& d : dist) out.push_back(d.value());
  return out;
}

struct ActiveSets {
  std::vector<char> active;     // E'_phi, per arc
  std::vector<char> resetting;  // E*_phi, per arc
};

// Slack characterization from the current labels:
//   E' = { e : l_head >= l_tail + tau },  E* = { e : strict }.
// Certifies the structural facts the extension relies on: E' is acyclic and
// every non-source node keeps an incoming active arc.
inline ActiveSets active_and_resetting_sets(const ValidatedInstance& g,
                                            const std::vector<Rat>& labels) {
  const std::size_t n = g.node_count();
  const std::size_t m = g.arc_count();
  ActiveSets sets{std::vector<char>(m, 0), std::vector<char>(m, 0)};
  for (std::size_t e = 0; e < m; ++e) {
    Rat slack = labels[static_cast<std::size_t>(g.arc_head(e))] -
                labels[static_cast<std::size_t>(g.arc_tail(e))] - g.arc(e).transit;
    if (slack.sign() >= 0) sets.active[e] = 1;
    if (slack.sign() > 0) sets.resetting[e] = 1;
  }
  std::vector<int> indeg_active(n, 0);
  for (std::size_t e = 0; e < m; ++e)
    if (sets.active[e]) ++indeg_active[static_cast<std::size_t>(g.arc_head(e))];
  for (std::size_t v = 0; v < n; ++v)
    if (indeg_active[v] == 0 && !g.is_source(static_cast<int>(v)))
      throw InfeasibleLabels("node " + g.node(v) + " has no incoming active arc");
  // acyclicity of E' (Kahn)
  std::vector<int> indeg = indeg_active;
  std::vector<int> queue;
  std::size_t seen = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) queue.push_back(static_cast<int>(v));
  while (!queue.empty()) {
    int v = queue.back();
    queue.pop_back();
    ++seen;
    for (int e : g.out_arcs(v))
      if (sets.active[static_cast<std::size_t>(e)])
        if (--indeg[static_cast<std::size_t>(g.arc_head(static_cast<std::size_t>(e)))] == 0)
          queue.push_back(g.arc_head(static_cast<std::size_t>(e)));
  }
  if (seen != n) throw InfeasibleLabels("active subgraph contains a cycle");
  return sets;
}

struct AlphaResult {
  ExtRat alpha;                    // infinite when no constraint binds
  std::vector<PhaseEvent> events;  // all constraints tight at phi + alpha
};

// Maximal alpha subject to
//   l_v - l_u + alpha (l'_v - l'_u) >= tau_e   for resetting arcs (queues
//                                              may deplete but not go negative)
//   l_v - l_u + alpha (l'_v - l'_u) <= tau_e   for non-active arcs (they must
//                                              stay unattractive)
inline AlphaResult compute_alpha(const ValidatedInstance& g, const std::vector<Rat>& labels,
                                 const std::vector<Rat>& label_slope, const ActiveSets& sets) {
  ExtRat best = ExtRat::infinity();
  std::vector<std::pair<Rat, PhaseEvent>> candidates;
  for (std::size_t e = 0; e < g.arc_count(); ++e) {
    std::size_t u = static_cast<std::size_t>(g.arc_tail(e));
    std::size_t v = static_cast<std::size_t>(g.arc_head(e));
    Rat slack = labels[v] - labels[u] - g.arc(e).transit;
    Rat d = label_slope[v] - label_slope[u];
    if (sets.resetting[e]) {
      if (slack.sign() <= 0)
        throw EngineInvariantViolation("resetting arc " + g.arc(e).id + " without strict slack");
      if (d.sign() < 0) {
        Rat bound = slack / -d;
        candidates.push_back({bound, {PhaseEvent::Type::QueueDepleted, g.arc(e).id}});
        best = min(best, ExtRat(bound));
      }
    } else if (!sets.active[e]) {
      if (slack.sign() >= 0)
        throw EngineInvariantViolation("non-active arc " + g.arc(e).id + " without strict gap");
      if (d.sign() > 0) {
        Rat bound = -slack / d;
        candidates.push_back({bound, {PhaseEvent::Type::ArcBecameActive, g.arc(e).id}});
        best = min(best, ExtRat(bound));
      }
    }
  }
  AlphaResult res;
  res.alpha = best;
  if (best.is_finite()) {
    if (best.value().sign() <= 0) throw NonpositiveAlpha("alpha = " + best.value().str());
    for (auto& [bound, ev] : candidates)
      if (bound == best.value()) res.events.push_back(ev);
  }
  return res;
}

// Appends one phase: labels and the underlying static flow continue linearly
// with the thin flow's slopes over [current end, current end + alpha).
inline void extend(NashFlowProfile& profile, std::vector<Rat> labels_start,
                   const ActiveSets& sets, std::vector<Rat> splits, std::vector<Rat> flow,
                   std::vector<Rat> label_slope, const ExtRat& alpha,
                   std::vector<PhaseEvent> events) {
  if (alpha.is_finite() && alpha.value().sign() <= 0)
    throw std::invalid_argument("extend: phases must have positive length");
  Phase ph;
  if (profile.phases.empty()) {
    ph.phi_start = Rat(0);
  } else {
    const ExtRat& prev_end = profile.phases.back().phi_end;
    if (!prev_end.is_finite()) throw std::logic_error("extend: profile already unbounded");
    ph.phi_start = prev_end.value();
  }
  ph.phi_end = alpha.is_finite() ? ExtRat(ph.phi_start + alpha.value()) : ExtRat::infinity();
  ph.active = sets.active;
  ph.resetting = sets.resetting;
  ph.labels_start = std::move(labels_start);
  ph.splits = std::move(splits);
  ph.flow = std::move(flow);
  ph.label_slope = std::move(label_slope);
  ph.events = std::move(events);
  profile.phases.push_back(std::move(ph));
  profile.steady_state = !alpha.is_finite();
  profile.rebuild_functions();
}

enum class BuildStatus { SteadyState, HorizonReached, PhaseCapExceeded };

inline const char* build_status_name(BuildStatus s) {
  switch (s) {
    case BuildStatus::SteadyState: return "steady_state";
    case BuildStatus::HorizonReached: return "horizon_reached";
    case BuildStatus::PhaseCapExceeded: return "phase_cap_exceeded";
  }
  return "?";
}

struct BuildResult {
  NashFlowProfile profile;
  BuildStatus status = BuildStatus::SteadyState;
};

namespace detail {

// Thin flow problem for the current active/resetting sets, plus the map from
// problem arc positions (sorted by id) back to extended arc indices.
inline std::pair<ThinFlowProblem, std::vector<std::size_t>> make_phase_problem(
    const ExtendedInstance& ext, const ActiveSets& sets) {
  const ValidatedInstance& g = ext.graph;
  ThinFlowProblem p;
  p.nodes = g.raw().nodes;
  for (const Source& s : g.raw().sources) p.sources.push_back({g.node_index(s.node), s.rate});
  p.sink = g.node_index(ext.super_sink);
  for (std::size_t e = 0; e < g.arc_count(); ++e)
    if (sets.active[e])
      p.arcs.push_back({g.arc(e).id, g.arc_tail(e), g.arc_head(e), g.arc(e).capacity,
                        static_cast<bool>(sets.resetting[e])});
  p.finalize();
  std::vector<std::size_t> arc_of_pos;
  arc_of_pos.reserve(p.arcs.size());
  for (const TFArc& a : p.arcs)
    arc_of_pos.push_back(static_cast<std::size_t>(g.arc_index(a.id)));
  return {std::move(p), std::move(arc_of_pos)};
}

}  // namespace detail

// Full construction: initial labels, then (sets -> thin flow -> alpha ->
// extend) until steady state, the particle horizon, or the phase cap. The
// returned profile is certified by the independent simulation checker unless
// `certify` is disabled (the CLI re-certifies before writing in that case).
inline BuildResult construct_nash_flow(const ExtendedInstance& ext, const ExtRat& phi_max,
                                       std::size_t phase_cap, bool certify = true) {
  if (phi_max.is_finite() && phi_max.value().sign() <= 0)
    throw std::invalid_argument("construct_nash_flow: phi_max must be positive");
  if (phase_cap == 0) throw std::invalid_argument("construct_nash_flow: phase_cap must be >= 1");

  const ValidatedInstance& g = ext.graph;
  BuildResult result;
  NashFlowProfile& profile = result.profile;
  profile.ext = ext;

  std::vector<Rat> labels = initial_labels(ext);
  Rat phi(0);
  Rat inv_sigma = Rat(1) / ext.sigma_value;

  for (;;) {
    if (profile.phases.size() >= phase_cap) {
      result.status = BuildStatus::PhaseCapExceeded;
      break;
    }
    ActiveSets sets = active_and_resetting_sets(g, labels);
    for (std::size_t j = 0; j < ext.sink_arc_index.size(); ++j)
      if (!sets.active[static_cast<std::size_t>(ext.sink_arc_index[j])])
        throw EngineInvariantViolation("sink arc " + ext.sink_arc_ids[j] +
                                       " inactive at phi = " + phi.str());

    auto [problem, arc_of_pos] = detail::make_phase_problem(ext, sets);
    ThinFlow tf = solve_thin_flow(problem);

    std::vector<Rat> flow(g.arc_count(), Rat(0));
    for (std::size_t pos = 0; pos < arc_of_pos.size(); ++pos)
      flow[arc_of_pos[pos]] = tf.arc_flow[pos];
    std::vector<Rat>& slopes = tf.labels;  // problem nodes share the graph's indexing

    for (std::size_t j = 0; j < ext.sink_arc_index.size(); ++j) {
      const Rat& demand = ext.base.raw().sinks[j].demand;
      if (flow[static_cast<std::size_t>(ext.sink_arc_index[j])] != demand)
        throw EngineInvariantViolation(
            "sink arc " + ext.sink_arc_ids[j] + " carries " +
            flow[static_cast<std::size_t>(ext.sink_arc_index[j])].str() + ", expected demand " +
            demand.str());
    }
    for (std::size_t v = 0; v < ext.base.raw().nodes.size(); ++v)
      if (slopes[v] > inv_sigma)
        throw EngineInvariantViolation("label slope at " + g.node(v) + " exceeds 1/sigma");

    AlphaResult ar = compute_alpha(g, labels, slopes, sets);

    ExtRat alpha = ar.alpha;
    std::vector<PhaseEvent> events = std::move(ar.events);
    bool final_phase = false;
    if (!alpha.is_finite()) {
      final_phase = true;  // steady state: no constraint ever binds again
      events.clear();
    } else if (phi_max.is_finite()) {
      Rat remaining = phi_max.value() - phi;
      if (alpha.value() > remaining) {
        alpha = remaining;
        events = {{PhaseEvent::Type::Horizon, ""}};
        final_phase = true;
        result.status = BuildStatus::HorizonReached;
      } else if (alpha.value() == remaining) {
        final_phase = true;
        result.status = BuildStatus::HorizonReached;
      }
    }

    extend(profile, labels, sets, tf.splits, flow, slopes, alpha, std::move(events));
    if (final_phase) {
      if (!alpha.is_finite()) result.status = BuildStatus::SteadyState;
      break;
    }
    phi += alpha.value();
    for (std::size_t v = 0; v < labels.size(); ++v) labels[v] += alpha.value() * slopes[v];
  }

  if (certify) {
    NashCertificate cert = verify_nash(profile);
    if (!cert.pass()) throw CertificationFailed(std::move(cert));
  }
  return result;
}

}  // namespace nashflow
