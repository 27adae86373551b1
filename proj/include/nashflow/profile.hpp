#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nashflow/piecewise.hpp"
#include "nashflow/rational.hpp"
#include "nashflow/super_sink.hpp"

namespace nashflow {

// ---------------------------------------------------------------------------
// A Nash flow over time as a sequence of thin-flow phases over particle
// space, together with the derived piecewise-linear earliest-arrival labels
// and underlying static flows. Everything is parameterized by particle phi;
// time-space rate functions are derived on demand through the labels.
// ---------------------------------------------------------------------------

struct PhaseEvent {
  enum class Type { QueueDepleted, ArcBecameActive, Horizon };
  Type type;
  std::string arc;  // empty for Horizon
};

inline const char* phase_event_name(PhaseEvent::Type t) {
  switch (t) {
    case PhaseEvent::Type::QueueDepleted: return "queue_depleted";
    case PhaseEvent::Type::ArcBecameActive: return "arc_became_active";
    case PhaseEvent::Type::Horizon: return "horizon";
  }
  return "?";
}

// One alpha-extension: on [phi_start, phi_end) the labels grow linearly with
// slopes label_slope and the static flow with slopes flow/splits; E'/E* are
// the active and resetting sets evaluated at phi_start.
struct Phase {
  Rat phi_start;
  ExtRat phi_end;                  // infinite for the final steady-state phase
  std::vector<char> active;        // per extended arc
  std::vector<char> resetting;     // per extended arc
  std::vector<Rat> labels_start;   // per node, l_v(phi_start)
  std::vector<Rat> splits;         // per source, x'_i
  std::vector<Rat> flow;           // per extended arc, x'_e (zero off E')
  std::vector<Rat> label_slope;    // per node, l'_v
  std::vector<PhaseEvent> events;  // what ended the phase (empty if steady)

  Rat length_to(const ExtRat& cap) const {
    if (phi_end.is_finite()) return phi_end.value() - phi_start;
    if (!cap.is_finite()) throw std::domain_error("unbounded phase has no finite length");
    return cap.value() - phi_start;
  }
};

struct NashFlowProfile {
  ExtendedInstance ext;
  std::vector<Phase> phases;
  bool steady_state = false;
  ExtRat horizon;  // phi_end of the last phase; infinite iff steady_state

  // derived from the phases (rebuild_functions)
  std::vector<PiecewiseLinear> labels;             // per node over particle
  std::vector<PiecewiseLinear> arc_cumulative;     // x_e per extended arc
  std::vector<PiecewiseLinear> source_cumulative;  // x_i per source

  void rebuild_functions() {
    const std::size_t n = ext.graph.node_count();
    const std::size_t m = ext.graph.arc_count();
    const std::size_t ns = ext.graph.raw().sources.size();
    if (phases.empty()) throw std::logic_error("profile without phases");
    labels.assign(n, PiecewiseLinear::constant(Rat(0), Rat(0)));
    arc_cumulative.assign(m, PiecewiseLinear::constant(Rat(0), Rat(0)));
    source_cumulative.assign(ns, PiecewiseLinear::constant(Rat(0), Rat(0)));
    for (std::size_t v = 0; v < n; ++v) {
      labels[v] = PiecewiseLinear::constant(phases[0].phi_start, phases[0].labels_start[v]);
      for (const Phase& ph : phases) {
        if (!ph.phi_end.is_finite()) break;
        labels[v].append(ph.phi_end.value(),
                         ph.labels_start[v] + ph.length_to(ph.phi_end) * ph.label_slope[v]);
      }
      labels[v].final_slope = phases.back().label_slope[v];
    }
    auto accumulate = [&](std::vector<PiecewiseLinear>& out, std::size_t count,
                          auto slope_of) {
      for (std::size_t i = 0; i < count; ++i) {
        out[i] = PiecewiseLinear::constant(phases[0].phi_start, Rat(0));
        Rat acc(0);
        for (const Phase& ph : phases) {
          if (!ph.phi_end.is_finite()) break;
          acc += ph.length_to(ph.phi_end) * slope_of(ph, i);
          out[i].append(ph.phi_end.value(), acc);
        }
        out[i].final_slope = slope_of(phases.back(), i);
      }
    };
    accumulate(arc_cumulative, m, [](const Phase& ph, std::size_t i) { return ph.flow[i]; });
    accumulate(source_cumulative, ns,
               [](const Phase& ph, std::size_t i) { return ph.splits[i]; });
    horizon = phases.back().phi_end;
  }
};

// Emitted rate functions of a profile: per-arc inflow rates over time
// (f_e = x'_e / l'_u on the image of each phase under l_u; the image is
// empty when l'_u = 0) and the inflow distribution over particle space.
struct EmittedRates {
  std::vector<StepFunction> arc_inflow;   // per extended arc, over time
  std::vector<StepFunction> source_dist;  // f_i per source, over particle
};

namespace detail {

inline StepFunction arc_rate_function(const NashFlowProfile& p, std::size_t arc,
                                      bool outflow_side) {
  int node = outflow_side ? p.ext.graph.arc_head(arc) : p.ext.graph.arc_tail(arc);
  std::size_t v = static_cast<std::size_t>(node);
  StepFunction f = StepFunction::zero(p.phases[0].labels_start[v]);
  for (const Phase& ph : p.phases) {
    const Rat& slope = ph.label_slope[v];
    if (slope.sign() == 0) continue;  // the time interval is empty
    Rat rate = ph.flow[arc] / slope;
    Rat lo = ph.labels_start[v];
    if (!ph.phi_end.is_finite()) {
      f.tail = rate;  // final steady phase extends to time infinity
      break;
    }
    Rat hi = lo + (ph.phi_end.value() - ph.phi_start) * slope;
    f.append(lo, hi, rate);
  }
  return f;
}

}  // namespace detail

inline EmittedRates inflow_functions(const NashFlowProfile& p) {
  EmittedRates out;
  const std::size_t m = p.ext.graph.arc_count();
  for (std::size_t e = 0; e < m; ++e)
    out.arc_inflow.push_back(detail::arc_rate_function(p, e, false));
  const std::size_t ns = p.ext.graph.raw().sources.size();
  for (std::size_t i = 0; i < ns; ++i) {
    StepFunction f = StepFunction::zero(Rat(0));
    for (const Phase& ph : p.phases) {
      if (!ph.phi_end.is_finite()) {
        f.tail = ph.splits[i];
        break;
      }
      f.append(ph.phi_start, ph.phi_end.value(), ph.splits[i]);
    }
    out.source_dist.push_back(std::move(f));
  }
  return out;
}

// Outflow rates implied by the alpha-extension, f_e^- = x'_e / l'_v on the
// image of each phase under the head label.
inline std::vector<StepFunction> outflow_functions(const NashFlowProfile& p) {
  std::vector<StepFunction> out;
  for (std::size_t e = 0; e < p.ext.graph.arc_count(); ++e)
    out.push_back(detail::arc_rate_function(p, e, true));
  return out;
}

}  // namespace nashflow
