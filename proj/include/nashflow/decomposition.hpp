#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashflow/checker.hpp"
#include "nashflow/profile.hpp"
#include "nashflow/rational.hpp"
#include "nashflow/super_sink.hpp"

namespace nashflow {

// ---------------------------------------------------------------------------
// Per-sink decomposition of each phase thin flow and the induced sub-flows
// over time. Every source-to-supersink path uses exactly one of the sink
// arcs e_j, so grouping a path decomposition by that arc splits x' into
// per-sink static flows of value d_j.
// ---------------------------------------------------------------------------

struct DemandMismatch : std::runtime_error {
  DemandMismatch(std::size_t sink_idx, const Rat& got, const Rat& want)
      : std::runtime_error("sink arc " + std::to_string(sink_idx) + " carries " + got.str() +
                           ", expected demand " + want.str()),
        sink_index(sink_idx),
        value(got) {}
  std::size_t sink_index;
  Rat value;
};

struct PathEntry {
  std::vector<std::size_t> arcs;  // extended arc indices, source to super sink
  Rat weight;                     // > 0
  std::size_t sink;               // base sink index (via the unique sink arc)
};

// Deterministic path decomposition of an extended static flow: repeatedly
// walk from the first source with remaining supply along the smallest-id
// positive-flow arc and peel the bottleneck weight.
inline std::vector<PathEntry> decompose_paths(const ExtendedInstance& ext,
                                              const std::vector<Rat>& flow,
                                              const std::vector<Rat>& splits) {
  const ValidatedInstance& g = ext.graph;
  std::vector<Rat> residual = flow;
  std::vector<Rat> supply = splits;
  const int super = g.node_index(ext.super_sink);

  std::vector<std::vector<int>> out_sorted(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    out_sorted[v] = g.out_arcs(static_cast<int>(v));
    std::sort(out_sorted[v].begin(), out_sorted[v].end(),
              [&](int a, int b) { return g.arc(static_cast<std::size_t>(a)).id <
                                         g.arc(static_cast<std::size_t>(b)).id; });
  }

  std::vector<PathEntry> paths;
  for (std::size_t i = 0; i < supply.size(); ++i) {
    while (supply[i].sign() > 0) {
      PathEntry entry;
      entry.weight = supply[i];
      int v = g.source_nodes()[i];
      while (v != super) {
        int chosen = -1;
        for (int e : out_sorted[static_cast<std::size_t>(v)])
          if (residual[static_cast<std::size_t>(e)].sign() > 0) {
            chosen = e;
            break;
          }
        if (chosen < 0)
          throw std::logic_error("decompose_paths: stuck at " + g.node(static_cast<std::size_t>(v)) +
                                 " (flow does not conserve)");
        entry.arcs.push_back(static_cast<std::size_t>(chosen));
        entry.weight = min(entry.weight, residual[static_cast<std::size_t>(chosen)]);
        v = g.arc_head(static_cast<std::size_t>(chosen));
      }
      int sink_idx = ext.sink_of_arc(entry.arcs.back());
      if (sink_idx < 0) throw std::logic_error("decompose_paths: path ends off a sink arc");
      entry.sink = static_cast<std::size_t>(sink_idx);
      for (std::size_t e : entry.arcs) residual[e] -= entry.weight;
      supply[i] -= entry.weight;
      paths.push_back(std::move(entry));
    }
  }
  for (const Rat& r : residual)
    if (r.sign() != 0) throw std::logic_error("decompose_paths: nonzero residual");
  return paths;
}

// Splits one phase thin flow into per-sink static flows on the original
// arcs; |x'^j| = d_j is certified (a mismatch signals a thin-flow bug).
inline std::vector<std::vector<Rat>> decompose_thin_flow(const ExtendedInstance& ext,
                                                         const std::vector<Rat>& flow,
                                                         const std::vector<Rat>& splits) {
  const std::size_t sinks = ext.base.raw().sinks.size();
  for (std::size_t j = 0; j < sinks; ++j) {
    const Rat& got = flow[static_cast<std::size_t>(ext.sink_arc_index[j])];
    const Rat& want = ext.base.raw().sinks[j].demand;
    if (got != want) throw DemandMismatch(j, got, want);
  }
  std::vector<std::vector<Rat>> per_sink(sinks,
                                         std::vector<Rat>(ext.original_arc_count(), Rat(0)));
  for (const PathEntry& p : decompose_paths(ext, flow, splits))
    for (std::size_t e : p.arcs)
      if (ext.is_original_arc(e)) per_sink[p.sink][e] += p.weight;
  return per_sink;
}

// The sub-flow over time routed to one sink: per-phase static flows x'^j,
// the induced inflow rates g^j_e(theta) = x'^j_e / l'_u on the phase image,
// and the per-source distribution g^j_i over particle space.
struct SinkSubflow {
  std::size_t sink;  // base sink index
  std::string sink_node;
  std::vector<std::vector<Rat>> phase_flows;  // per phase, per original arc
  std::vector<StepFunction> rate;             // per original arc, over time
  std::vector<StepFunction> source_dist;      // per source, over particle
};

inline std::vector<SinkSubflow> subflow_functions(const NashFlowProfile& profile) {
  const ExtendedInstance& ext = profile.ext;
  const ValidatedInstance& g = ext.graph;
  const std::size_t sinks = ext.base.raw().sinks.size();
  const std::size_t morig = ext.original_arc_count();
  const std::size_t nsrc = g.raw().sources.size();

  std::vector<SinkSubflow> out(sinks);
  for (std::size_t j = 0; j < sinks; ++j) {
    out[j].sink = j;
    out[j].sink_node = ext.base.raw().sinks[j].node;
  }
  std::vector<std::vector<std::vector<Rat>>> per_phase;  // phase -> sink -> arc
  per_phase.reserve(profile.phases.size());
  for (const Phase& ph : profile.phases)
    per_phase.push_back(decompose_thin_flow(ext, ph.flow, ph.splits));

  for (std::size_t j = 0; j < sinks; ++j) {
    for (std::size_t k = 0; k < profile.phases.size(); ++k)
      out[j].phase_flows.push_back(per_phase[k][j]);

    for (std::size_t e = 0; e < morig; ++e) {
      std::size_t u = static_cast<std::size_t>(g.arc_tail(e));
      StepFunction f = StepFunction::zero(profile.phases[0].labels_start[u]);
      for (std::size_t k = 0; k < profile.phases.size(); ++k) {
        const Phase& ph = profile.phases[k];
        const Rat& slope = ph.label_slope[u];
        if (slope.sign() == 0) continue;
        Rat value = per_phase[k][j][e] / slope;
        if (!ph.phi_end.is_finite()) {
          f.tail = value;
          break;
        }
        Rat lo = ph.labels_start[u];
        f.append(lo, lo + (ph.phi_end.value() - ph.phi_start) * slope, value);
      }
      out[j].rate.push_back(std::move(f));
    }

    for (std::size_t i = 0; i < nsrc; ++i) {
      int s = g.source_nodes()[i];
      StepFunction f = StepFunction::zero(Rat(0));
      for (std::size_t k = 0; k < profile.phases.size(); ++k) {
        const Phase& ph = profile.phases[k];
        Rat net(0);
        for (int e : g.out_arcs(s))
          if (ext.is_original_arc(static_cast<std::size_t>(e)))
            net += per_phase[k][j][static_cast<std::size_t>(e)];
        for (int e : g.in_arcs(s))
          if (ext.is_original_arc(static_cast<std::size_t>(e)))
            net -= per_phase[k][j][static_cast<std::size_t>(e)];
        if (!ph.phi_end.is_finite()) {
          f.tail = net;
          break;
        }
        f.append(ph.phi_start, ph.phi_end.value(), net);
      }
      out[j].source_dist.push_back(std::move(f));
    }
  }
  return out;
}

struct SubflowCertificate {
  std::vector<CheckIssue> issues;
  bool pass() const { return issues.empty(); }
  std::string to_string() const {
    if (pass()) return "PASS";
    std::ostringstream os;
    os << "FAIL (" << issues.size() << " violations)\n";
    for (const auto& i : issues)
      os << "  [" << i.check << "] " << i.subject << ": " << i.detail << "\n";
    return os.str();
  }
};

namespace detail {

// Unique preimage of y under a nondecreasing piecewise-linear function, or
// nullopt when the preimage is empty or a nondegenerate interval.
inline std::optional<Rat> pl_preimage_point(const PiecewiseLinear& f, const Rat& y) {
  if (y < f.ys.front()) return std::nullopt;
  for (std::size_t i = 0; i + 1 < f.xs.size(); ++i) {
    if (y > f.ys[i + 1]) continue;
    if (f.ys[i] == f.ys[i + 1]) return std::nullopt;  // flat piece
    Rat t = (y - f.ys[i]) / (f.ys[i + 1] - f.ys[i]);
    return f.xs[i] + t * (f.xs[i + 1] - f.xs[i]);
  }
  if (y == f.ys.back()) return f.xs.back();
  if (f.final_slope.sign() <= 0) return std::nullopt;
  return f.xs.back() + (y - f.ys.back()) / f.final_slope;
}

// Sub-outflow induced by proportional share propagation: at exit time T(theta)
// the outflow share of g equals its inflow share at theta.
inline StepFunction subflow_outflow(const ArcTrajectory& tr, const StepFunction& g_in) {
  std::vector<Rat> grid = tr.outflow.cuts;
  for (const Rat& c : merge_points(tr.inflow.cuts, g_in.cuts))
    grid.push_back(tr.exit_time.eval(max(c, Rat(0))));
  // values of flat exit-time pieces are measure-zero exit instants; make them
  // grid points so sampled midpoints always have singleton preimages
  for (std::size_t i = 0; i + 1 < tr.exit_time.xs.size(); ++i)
    if (tr.exit_time.ys[i] == tr.exit_time.ys[i + 1]) grid.push_back(tr.exit_time.ys[i]);
  grid = merge_points(grid, {Rat(0)});

  StepFunction out = StepFunction::zero(grid.front());
  auto value_at = [&](const Rat& theta_out) {
    std::optional<Rat> pre = pl_preimage_point(tr.exit_time, theta_out);
    if (!pre) return Rat(0);
    Rat fin = tr.inflow.eval(*pre);
    if (fin.sign() <= 0) return Rat(0);
    return tr.outflow.eval(theta_out) * g_in.eval(*pre) / fin;
  };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    out.append(grid[i], grid[i + 1], value_at(midpoint(grid[i], grid[i + 1])));
  out.tail = value_at(grid.back() + Rat(1));
  out.merge_equal_pieces();
  return out;
}

}  // namespace nashflow::detail

// Verifies the decomposition against the profile on every constancy
// interval: domination, sub-outflow share consistency, conservation at all
// original nodes except the sources and the own sink, the relaxed
// inequality (9) everywhere else, source matching, values, superposition.
inline SubflowCertificate check_subflow_decomposition(const NashFlowProfile& profile,
                                                      const std::vector<SinkSubflow>& subs) {
  SubflowCertificate cert;
  auto flag = [&](std::string check, std::string subject, std::string detail) {
    cert.issues.push_back({std::move(check), std::move(subject), std::move(detail)});
  };
  const ExtendedInstance& ext = profile.ext;
  const ValidatedInstance& g = ext.graph;
  const std::size_t morig = ext.original_arc_count();
  const std::size_t nsrc = g.raw().sources.size();
  const std::size_t sinks = ext.base.raw().sinks.size();
  if (subs.size() != sinks) {
    flag("structure", "", "expected one sub-flow per sink");
    return cert;
  }

  EmittedRates rates = inflow_functions(profile);
  std::vector<ArcTrajectory> traj;
  for (std::size_t e = 0; e < morig; ++e)
    traj.push_back(simulate_queues(rates.arc_inflow[e], g.arc(e).capacity, g.arc(e).transit));

  // per-phase superposition of the static decomposition
  for (std::size_t k = 0; k < profile.phases.size(); ++k) {
    for (std::size_t e = 0; e < morig; ++e) {
      Rat sum(0);
      for (const SinkSubflow& s : subs) sum += s.phase_flows[k][e];
      if (sum != profile.phases[k].flow[e])
        flag("static_superposition", g.arc(e).id,
             "phase " + std::to_string(k) + ": sum of x'^j = " + sum.str() + " != x' = " +
                 profile.phases[k].flow[e].str());
    }
  }

  // domination and time superposition per arc
  for (std::size_t e = 0; e < morig; ++e) {
    std::vector<Rat> grid = rates.arc_inflow[e].cuts;
    for (const SinkSubflow& s : subs) grid = merge_points(grid, s.rate[e].cuts);
    for (const Rat& mid : step_sample_points(grid)) {
      Rat total = rates.arc_inflow[e].eval(mid);
      Rat sum(0);
      for (const SinkSubflow& s : subs) {
        Rat v = s.rate[e].eval(mid);
        sum += v;
        if (v > total) {
          flag("domination", g.arc(e).id,
               "g^" + s.sink_node + " = " + v.str() + " > f = " + total.str() + " near theta=" +
                   mid.str());
          break;
        }
      }
      if (sum != total) {
        flag("superposition", g.arc(e).id,
             "sum of sub-flows " + sum.str() + " != f = " + total.str() + " near theta=" +
                 mid.str());
        break;
      }
    }
  }

  for (std::size_t j = 0; j < sinks; ++j) {
    const SinkSubflow& sub = subs[j];
    const int own_sink_node = g.node_index(sub.sink_node);

    std::vector<StepFunction> g_out;
    for (std::size_t e = 0; e < morig; ++e)
      g_out.push_back(detail::subflow_outflow(traj[e], sub.rate[e]));

    // conservation / inequality (9) over time at every original non-source node
    for (std::size_t v = 0; v < ext.base.raw().nodes.size(); ++v) {
      if (g.is_source(static_cast<int>(v))) continue;
      std::vector<Rat> grid{Rat(0)};
      for (int e : g.out_arcs(static_cast<int>(v)))
        if (ext.is_original_arc(static_cast<std::size_t>(e)))
          grid = merge_points(grid, sub.rate[static_cast<std::size_t>(e)].cuts);
      for (int e : g.in_arcs(static_cast<int>(v))) {
        grid = merge_points(grid, g_out[static_cast<std::size_t>(e)].cuts);
        grid = merge_points(grid, traj[static_cast<std::size_t>(e)].outflow.cuts);
      }
      for (int e : g.out_arcs(static_cast<int>(v)))
        if (ext.is_original_arc(static_cast<std::size_t>(e)))
          grid = merge_points(grid, rates.arc_inflow[static_cast<std::size_t>(e)].cuts);
      for (const Rat& mid : step_sample_points(grid)) {
        if (mid.sign() <= 0) continue;
        Rat net_g(0), net_f(0);
        for (int e : g.in_arcs(static_cast<int>(v))) {
          if (!ext.is_original_arc(static_cast<std::size_t>(e))) continue;
          net_g += g_out[static_cast<std::size_t>(e)].eval(mid);
          net_f += traj[static_cast<std::size_t>(e)].outflow.eval(mid);
        }
        for (int e : g.out_arcs(static_cast<int>(v))) {
          if (!ext.is_original_arc(static_cast<std::size_t>(e))) continue;
          net_g -= sub.rate[static_cast<std::size_t>(e)].eval(mid);
          net_f -= rates.arc_inflow[static_cast<std::size_t>(e)].eval(mid);
        }
        if (static_cast<int>(v) != own_sink_node && net_g.sign() != 0) {
          flag("subflow_conservation", sub.sink_node + "@" + g.node(v),
               "net sub-flow " + net_g.str() + " near theta=" + mid.str());
          break;
        }
        if (net_g > net_f) {
          flag("subflow_loss_bound", sub.sink_node + "@" + g.node(v),
               "sub-flow gains " + net_g.str() + " > flow gains " + net_f.str() + " near theta=" +
                   mid.str());
          break;
        }
      }
    }

    // source matching and per-phase values
    for (std::size_t k = 0; k < profile.phases.size(); ++k) {
      const Phase& ph = profile.phases[k];
      Rat phi_mid = ph.phi_end.is_finite() ? midpoint(ph.phi_start, ph.phi_end.value())
                                           : ph.phi_start + Rat(1);
      Rat value_sum(0);
      for (std::size_t i = 0; i < nsrc; ++i) {
        std::size_t s = static_cast<std::size_t>(g.source_nodes()[i]);
        Rat gi = sub.source_dist[i].eval(phi_mid);
        value_sum += gi;
        const Rat& lslope = ph.label_slope[s];
        if (lslope.sign() == 0) {
          if (gi.sign() != 0)
            flag("source_matching", sub.sink_node + "@" + g.raw().sources[i].node,
                 "g^j_i = " + gi.str() + " while the source arrival is frozen");
          continue;
        }
        Rat theta = profile.labels[s].eval(phi_mid);  // T_i(phi): source arrival = label
        Rat net(0);
        for (int e : g.out_arcs(static_cast<int>(s)))
          if (ext.is_original_arc(static_cast<std::size_t>(e)))
            net += sub.rate[static_cast<std::size_t>(e)].eval(theta);
        for (int e : g.in_arcs(static_cast<int>(s)))
          if (ext.is_original_arc(static_cast<std::size_t>(e)))
            net -= g_out[static_cast<std::size_t>(e)].eval(theta);
        if (lslope * net != gi) {
          flag("source_matching", sub.sink_node + "@" + g.raw().sources[i].node,
               "phase " + std::to_string(k) + ": T'_i * net = " + (lslope * net).str() +
                   " != g^j_i = " + gi.str());
        }
      }
      if (value_sum != ext.base.raw().sinks[j].demand)
        flag("value", sub.sink_node,
             "phase " + std::to_string(k) + ": sum g^j_i = " + value_sum.str() +
                 " != demand " + ext.base.raw().sinks[j].demand.str());
    }
  }
  return cert;
}

}  // namespace nashflow
