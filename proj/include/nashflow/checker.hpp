#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashflow/network.hpp"
#include "nashflow/piecewise.hpp"
#include "nashflow/profile.hpp"
#include "nashflow/rational.hpp"

namespace nashflow {

// ---------------------------------------------------------------------------
// Independent certification of Nash flows over time. The checker reconstructs
// the full fluid dynamics from the emitted inflow rate functions alone --
// queue evolution, outflows, cumulative flows, exit times, earliest-arrival
// labels -- and compares against the profile. It shares no engine logic;
// agreement is required to be exact.
// ---------------------------------------------------------------------------

struct NegativeInflow : std::runtime_error {
  explicit NegativeInflow(const std::string& what) : std::runtime_error(what) {}
};

struct ArcTrajectory {
  StepFunction inflow;        // f+ (the input)
  StepFunction outflow;       // f-
  PiecewiseLinear cum_in;     // F+ over time, from 0
  PiecewiseLinear cum_out;    // F- over time, from 0
  PiecewiseLinear queue;      // z over time, from 0
  PiecewiseLinear exit_time;  // T(theta) = theta + tau + z(theta+tau)/nu, from 0
};

// Event-driven sweep over the inflow breakpoints and queue depletion
// instants. The queue grows with rate f+(theta-tau) - nu while positive and
// the outflow runs at capacity exactly while the queue is positive.
inline ArcTrajectory simulate_queues(const StepFunction& inflow, const Rat& capacity,
                                     const Rat& transit) {
  if (!inflow.nonnegative()) throw NegativeInflow("negative inflow rate");
  if (inflow.start().sign() < 0)
    throw std::invalid_argument("simulate_queues: inflow before time 0");

  ArcTrajectory tr;
  tr.inflow = inflow;

  // arrival rate at the bottleneck: c on (segment start, segment end]
  struct Seg {
    Rat start;
    ExtRat end;
    Rat rate;
  };
  std::vector<Seg> segs;
  Rat cursor(0);
  Rat first_arrival = inflow.start() + transit;
  if (first_arrival > cursor) {
    segs.push_back({cursor, first_arrival, Rat(0)});
    cursor = first_arrival;
  }
  for (std::size_t i = 0; i < inflow.vals.size(); ++i) {
    Rat end = inflow.cuts[i + 1] + transit;
    segs.push_back({cursor, end, inflow.vals[i]});
    cursor = end;
  }
  segs.push_back({cursor, ExtRat::infinity(), inflow.tail});

  tr.queue = PiecewiseLinear::constant(Rat(0), Rat(0));
  StepFunction out = StepFunction::zero(Rat(0));
  Rat q(0);
  auto note_queue = [&](const Rat& t, const Rat& value) {
    if (t > tr.queue.xs.back()) tr.queue.append(t, value);
  };
  for (const Seg& seg : segs) {
    Rat t = seg.start;
    const Rat& c = seg.rate;
    if (q.sign() > 0 && c < capacity) {
      // queue drains; it may deplete inside the segment
      Rat deplete = t + q / (capacity - c);
      if (ExtRat(deplete) < seg.end) {
        note_queue(deplete, Rat(0));
        out.append(t, deplete, capacity);
        q = Rat(0);
        t = deplete;
      }
    }
    if (q.sign() > 0 || c > capacity) {
      // queue stays positive (or starts growing immediately)
      if (seg.end.is_finite()) {
        q += (c - capacity) * (seg.end.value() - t);
        note_queue(seg.end.value(), q);
        out.append(t, seg.end.value(), capacity);
      } else {
        tr.queue.final_slope = c - capacity;
        out.tail = capacity;
      }
    } else {
      // empty queue at rate c <= capacity: flow passes straight through
      if (seg.end.is_finite()) {
        note_queue(seg.end.value(), Rat(0));
        out.append(t, seg.end.value(), c);
      } else {
        tr.queue.final_slope = Rat(0);
        out.tail = c;
      }
    }
  }
  out.merge_equal_pieces();
  tr.outflow = std::move(out);
  tr.cum_in = step_integral(inflow, Rat(0));
  tr.cum_out = step_integral(tr.outflow, Rat(0));

  // T(theta) = theta + tau + z(theta+tau)/nu
  tr.exit_time = PiecewiseLinear::constant(Rat(0), transit + tr.queue.eval(transit) / capacity);
  for (std::size_t i = 0; i < tr.queue.xs.size(); ++i) {
    Rat theta = tr.queue.xs[i] - transit;
    if (theta.sign() <= 0) continue;
    tr.exit_time.append(theta, theta + transit + tr.queue.ys[i] / capacity);
  }
  tr.exit_time.final_slope = Rat(1) + tr.queue.final_slope / capacity;
  return tr;
}

// Exact solution of the Bellman equations over piecewise-linear functions:
//   l_s(phi) = min(T_i(phi), min over incoming arcs T_e(l_u(phi)))
//   l_v(phi) = min over incoming arcs T_e(l_u(phi))
// Converges after at most |V| relaxation rounds because all cycles have
// positive transit time; the fixpoint is verified before returning.
inline std::vector<PiecewiseLinear> earliest_arrival_labels(
    const ValidatedInstance& graph, const std::vector<ArcTrajectory>& trajectories,
    const std::vector<PiecewiseLinear>& source_arrival) {
  const std::size_t n = graph.node_count();
  std::vector<std::optional<PiecewiseLinear>> cur(n);
  for (std::size_t i = 0; i < graph.raw().sources.size(); ++i)
    cur[static_cast<std::size_t>(graph.source_nodes()[i])] = source_arrival[i];

  for (std::size_t round = 0; round <= n + 1; ++round) {
    bool changed = false;
    std::vector<std::optional<PiecewiseLinear>> next(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::optional<PiecewiseLinear> best;
      int si = graph.source_at(static_cast<int>(v));
      if (si >= 0) best = source_arrival[static_cast<std::size_t>(si)];
      for (int e : graph.in_arcs(static_cast<int>(v))) {
        const auto& lu = cur[static_cast<std::size_t>(graph.arc_tail(static_cast<std::size_t>(e)))];
        if (!lu) continue;
        PiecewiseLinear cand =
            pl_compose(trajectories[static_cast<std::size_t>(e)].exit_time, *lu);
        best = best ? pl_min(*best, cand) : cand;
      }
      if (best && (!cur[v] || !pl_equal(*cur[v], *best))) changed = true;
      next[v] = best ? best : cur[v];
    }
    cur = std::move(next);
    if (!changed) break;
    if (round == n + 1)
      throw std::logic_error("earliest_arrival_labels: Bellman system did not stabilize");
  }
  std::vector<PiecewiseLinear> out;
  out.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!cur[v]) throw std::logic_error("earliest_arrival_labels: unreachable node");
    out.push_back(std::move(*cur[v]));
  }
  return out;
}

struct CheckIssue {
  std::string check;
  std::string subject;
  std::string detail;
};

struct NashCertificate {
  std::vector<CheckIssue> label_mismatch;    // independent labels != profile labels
  std::vector<CheckIssue> cumulative;        // F+(l_u(phi)) != F-(l_v(phi))
  std::vector<CheckIssue> source_residuals;  // F_i != l_s * r_i
  std::vector<CheckIssue> inactive_inflow;   // inflow outside the active image
  std::vector<CheckIssue> outflow_mismatch;  // emitted f- != simulated f-
  std::vector<CheckIssue> conservation;      // flow conservation over time
  std::vector<CheckIssue> structural;        // set characterizations, queue slack

  bool pass() const {
    return label_mismatch.empty() && cumulative.empty() && source_residuals.empty() &&
           inactive_inflow.empty() && outflow_mismatch.empty() && conservation.empty() &&
           structural.empty();
  }

  void all_issues(std::vector<CheckIssue>& out) const {
    for (const auto* list : {&label_mismatch, &cumulative, &source_residuals,
                             &inactive_inflow, &outflow_mismatch,
                             &conservation, &structural})
      out.insert(out.end(), list->begin(), list->end());
  }

  std::string to_string() const {
    if (pass()) return "PASS";
    std::ostringstream os;
    std::vector<CheckIssue> issues;
    all_issues(issues);
    os << "FAIL (" << issues.size() << " violations)\n";
    for (const auto& i : issues)
      os << "  [" << i.check << "] " << i.subject << ": " << i.detail << "\n";
    return os.str();
  }
};

struct CertificationFailed : std::runtime_error {
  explicit CertificationFailed(NashCertificate c)
      : std::runtime_error("profile failed certification:\n" + c.to_string()),
        certificate(std::move(c)) {}
  NashCertificate certificate;
};

namespace detail {

inline Rat eval_or_zero(const PiecewiseLinear& f, const Rat& x) {
  return x < f.domain_start() ? Rat(0) : f.eval(x);
}

struct TimeInterval {
  Rat lo;
  ExtRat hi;
};

// Image of the particle zero-set under a nondecreasing label; merged closed
// time intervals.
inline std::vector<TimeInterval> image_intervals(const std::vector<ZeroInterval>& zs,
                                                 const PiecewiseLinear& label) {
  std::vector<TimeInterval> out;
  for (const auto& z : zs) {
    TimeInterval img;
    img.lo = label.eval(z.lo);
    if (z.hi.is_finite()) {
      img.hi = label.eval(z.hi.value());
    } else {
      img.hi = label.final_slope.sign() > 0
                   ? ExtRat::infinity()
                   : ExtRat(label.eval(max(z.lo, label.xs.back())));
    }
    if (!out.empty() && ExtRat(img.lo) <= out.back().hi) {
      if (out.back().hi < img.hi) out.back().hi = img.hi;
    } else {
      out.push_back(img);
    }
  }
  return out;
}

inline bool covered(const std::vector<TimeInterval>& cover, const Rat& lo, const ExtRat& hi) {
  for (const auto& c : cover)
    if (c.lo <= lo && hi <= c.hi) return true;
  return false;
}

}  // namespace detail

// Exit-time derivative cases for one simulated trajectory:
// on every constancy interval, T' = f+/nu while the queue is positive and
// max(f+/nu, 1) while it is empty.
inline std::vector<CheckIssue> exit_time_derivative_check(const ArcTrajectory& tr,
                                                          const Rat& capacity,
                                                          const Rat& transit,
                                                          const std::string& subject) {
  std::vector<CheckIssue> issues;
  std::vector<Rat> grid = tr.inflow.cuts;
  for (const Rat& t : tr.queue.xs) grid.push_back(t - transit);
  grid = merge_points(grid, {Rat(0)});
  while (grid.size() > 1 && grid.front() < Rat(0)) grid.erase(grid.begin());
  for (const Rat& mid : step_sample_points(grid)) {
    if (mid.sign() < 0) continue;
    Rat f = tr.inflow.eval(mid);
    Rat z = tr.queue.eval(mid + transit);
    Rat expect = z.sign() > 0 ? f / capacity : max(f / capacity, Rat(1));
    Rat got = tr.exit_time.slope_at(mid);
    if (got != expect)
      issues.push_back({"exit_time_derivative", subject,
                        "at theta=" + mid.str() + ": T' = " + got.str() + ", expected " +
                            expect.str()});
  }
  return issues;
}

// Queue and FIFO identities for one trajectory, checked at every breakpoint of the
// refined grid: z(theta) = F+(theta - tau) - F-(theta) and F+ = F- o T.
inline std::vector<CheckIssue> cumulative_identity_check(const ArcTrajectory& tr,
                                                         const Rat& transit,
                                                         const std::string& subject) {
  std::vector<CheckIssue> issues;
  std::vector<Rat> grid = merge_points(tr.queue.xs, tr.cum_out.xs);
  grid = merge_points(grid, tr.exit_time.xs);
  for (const Rat& t : tr.cum_in.xs) grid.push_back(t + transit);
  grid = merge_points(grid, {});
  grid.push_back(grid.back() + Rat(1));  // sample the final rays as well
  for (const Rat& theta : grid) {
    if (theta.sign() < 0) continue;
    Rat lhs = tr.queue.eval(theta);
    Rat rhs = detail::eval_or_zero(tr.cum_in, theta - transit) - tr.cum_out.eval(theta);
    if (lhs != rhs)
      issues.push_back({"queue_identity", subject,
                        "z(" + theta.str() + ") = " + lhs.str() + " but F+ - F- = " + rhs.str()});
    Rat fifo_lhs = detail::eval_or_zero(tr.cum_in, theta - transit);
    Rat fifo_rhs = tr.cum_out.eval(tr.exit_time.eval(max(theta - transit, Rat(0))));
    if (fifo_lhs != fifo_rhs)
      issues.push_back({"fifo_identity", subject,
                        "F+(" + (theta - transit).str() + ") = " + fifo_lhs.str() +
                            " but F-(T(.)) = " + fifo_rhs.str()});
  }
  return issues;
}

// Full certification of a profile against an independent re-simulation.
inline NashCertificate verify_nash(const NashFlowProfile& profile) {
  NashCertificate cert;
  const ValidatedInstance& g = profile.ext.graph;
  const std::size_t m = g.arc_count();
  const std::size_t nsrc = g.raw().sources.size();

  EmittedRates rates = inflow_functions(profile);
  std::vector<StepFunction> emitted_out = outflow_functions(profile);

  std::vector<ArcTrajectory> traj;
  traj.reserve(m);
  for (std::size_t e = 0; e < m; ++e)
    traj.push_back(simulate_queues(rates.arc_inflow[e], g.arc(e).capacity, g.arc(e).transit));

  std::vector<PiecewiseLinear> cum_source, arrival;
  for (std::size_t i = 0; i < nsrc; ++i) {
    cum_source.push_back(step_integral(rates.source_dist[i], Rat(0)));
    arrival.push_back(pl_scale(cum_source.back(), Rat(1) / g.raw().sources[i].rate));
  }
  std::vector<PiecewiseLinear> labels = earliest_arrival_labels(g, traj, arrival);

  const bool bounded = profile.horizon.is_finite();
  const Rat H = bounded ? profile.horizon.value() : Rat(0);
  auto pl_agree = [&](const PiecewiseLinear& a, const PiecewiseLinear& b) {
    return bounded ? pl_equal_on(a, b, H) : pl_equal(a, b);
  };

  // (d) independently recomputed labels match the engine's exactly
  for (std::size_t v = 0; v < g.node_count(); ++v)
    if (!pl_agree(labels[v], profile.labels[v]))
      cert.label_mismatch.push_back(
          {"labels", g.node(v), "independent earliest-arrival label differs from profile"});

  // (a) cumulative equality at the claimed labels: F+(l_u(phi)) = F-(l_v(phi))
  for (std::size_t e = 0; e < m; ++e) {
    std::size_t u = static_cast<std::size_t>(g.arc_tail(e));
    std::size_t v = static_cast<std::size_t>(g.arc_head(e));
    PiecewiseLinear lhs = pl_compose(traj[e].cum_in, profile.labels[u]);
    PiecewiseLinear rhs = pl_compose(traj[e].cum_out, profile.labels[v]);
    if (!pl_agree(lhs, rhs))
      cert.cumulative.push_back(
          {"cumulative_equality", g.arc(e).id, "F+(l_tail(phi)) != F-(l_head(phi))"});
  }

  // (b) F_i(phi) = l_{s_i}(phi) * r_i
  for (std::size_t i = 0; i < nsrc; ++i) {
    std::size_t s = static_cast<std::size_t>(g.source_nodes()[i]);
    if (!pl_agree(cum_source[i], pl_scale(profile.labels[s], g.raw().sources[i].rate)))
      cert.source_residuals.push_back(
          {"source", g.raw().sources[i].node, "F_i != l_s * r_i"});
  }

  // (c) N2: positive inflow only inside the label image of the active set
  for (std::size_t e = 0; e < m; ++e) {
    std::size_t u = static_cast<std::size_t>(g.arc_tail(e));
    std::size_t v = static_cast<std::size_t>(g.arc_head(e));
    PiecewiseLinear gap =
        pl_combine(pl_compose(traj[e].exit_time, labels[u]), labels[v], Rat(1), -Rat(1));
    std::vector<ZeroInterval> zs = pl_zero_set(gap);
    if (bounded) {
      std::vector<ZeroInterval> clipped;
      for (auto& z : zs) {
        if (z.lo > H) continue;
        clipped.push_back({z.lo, min(z.hi, ExtRat(H))});
      }
      zs = std::move(clipped);
    }
    auto cover = detail::image_intervals(zs, labels[u]);
    const StepFunction& f = rates.arc_inflow[e];
    for (std::size_t i = 0; i < f.vals.size(); ++i)
      if (f.vals[i].sign() > 0 && !detail::covered(cover, f.cuts[i], ExtRat(f.cuts[i + 1])))
        cert.inactive_inflow.push_back({"inactive_inflow", g.arc(e).id,
                                        "positive inflow on (" + f.cuts[i].str() + ", " +
                                            f.cuts[i + 1].str() + "] while inactive"});
    if (f.tail.sign() > 0 && !detail::covered(cover, f.end(), ExtRat::infinity()))
      cert.inactive_inflow.push_back(
          {"inactive_inflow", g.arc(e).id, "positive tail inflow while inactive"});
  }

  // emitted outflows must coincide with the simulated ones (FIFO discipline)
  for (std::size_t e = 0; e < m; ++e)
    if (!step_equal(emitted_out[e], traj[e].outflow))
      cert.outflow_mismatch.push_back(
          {"outflow", g.arc(e).id, "emitted outflow differs from simulated outflow"});

  // flow conservation over time at every node except the super sink
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (g.node(v) == profile.ext.super_sink) continue;
    int si = g.source_at(static_cast<int>(v));
    std::vector<Rat> grid{Rat(0)};
    for (int e : g.out_arcs(static_cast<int>(v)))
      grid = merge_points(grid, rates.arc_inflow[static_cast<std::size_t>(e)].cuts);
    for (int e : g.in_arcs(static_cast<int>(v)))
      grid = merge_points(grid, traj[static_cast<std::size_t>(e)].outflow.cuts);
    Rat boundary(0);
    if (si >= 0 && bounded) {
      boundary = profile.labels[v].eval(H);
      grid = merge_points(grid, {boundary});
    }
    for (const Rat& mid : step_sample_points(grid)) {
      if (mid.sign() <= 0) continue;
      Rat net(0);
      for (int e : g.out_arcs(static_cast<int>(v)))
        net += rates.arc_inflow[static_cast<std::size_t>(e)].eval(mid);
      for (int e : g.in_arcs(static_cast<int>(v)))
        net -= traj[static_cast<std::size_t>(e)].outflow.eval(mid);
      Rat expect(0);
      if (si >= 0 && (!bounded || mid <= boundary))
        expect = g.raw().sources[static_cast<std::size_t>(si)].rate;
      if (net != expect) {
        cert.conservation.push_back({"conservation", g.node(v),
                                     "net outflow " + net.str() + " at theta=" + mid.str() +
                                         ", expected " + expect.str()});
        break;
      }
    }
  }

  // structural checks at every phase breakpoint: the stored E'/E* must match
  // the simulated queues (label-slack characterization) and resetting arcs must
  // carry exactly the queue their label slack implies
  for (const Phase& ph : profile.phases) {
    const Rat& phi = ph.phi_start;
    for (std::size_t e = 0; e < m; ++e) {
      std::size_t u = static_cast<std::size_t>(g.arc_tail(e));
      std::size_t v = static_cast<std::size_t>(g.arc_head(e));
      Rat lu = labels[u].eval(phi);
      Rat lv = labels[v].eval(phi);
      Rat z = traj[e].queue.eval(lu + g.arc(e).transit);
      bool queued = z.sign() > 0;
      bool active = lv == traj[e].exit_time.eval(lu);
      if (queued && !active)
        cert.structural.push_back({"resetting_subset_active", g.arc(e).id,
                                   "queued but inactive at phi=" + phi.str()});
      if (static_cast<bool>(ph.active[e]) != active)
        cert.structural.push_back({"active_set", g.arc(e).id,
                                   "stored E' disagrees with simulation at phi=" + phi.str()});
      if (static_cast<bool>(ph.resetting[e]) != queued)
        cert.structural.push_back({"resetting_set", g.arc(e).id,
                                   "stored E* disagrees with simulation at phi=" + phi.str()});
      if (queued) {
        Rat slack = lv - lu - g.arc(e).transit;
        if (z != g.arc(e).capacity * slack)
          cert.structural.push_back({"queue_slack", g.arc(e).id,
                                     "z = " + z.str() + " != nu * label slack = " +
                                         (g.arc(e).capacity * slack).str()});
      }
    }
  }
  return cert;
}

// Derivative consistency: exit-time derivative cases per arc and label
// slopes as minima of composed slopes over the arcs active on each interval.
inline std::vector<CheckIssue> derivative_consistency(const NashFlowProfile& profile) {
  const ValidatedInstance& g = profile.ext.graph;
  EmittedRates rates = inflow_functions(profile);
  std::vector<ArcTrajectory> traj;
  for (std::size_t e = 0; e < g.arc_count(); ++e)
    traj.push_back(simulate_queues(rates.arc_inflow[e], g.arc(e).capacity, g.arc(e).transit));
  std::vector<PiecewiseLinear> cum_source, arrival;
  for (std::size_t i = 0; i < g.raw().sources.size(); ++i) {
    cum_source.push_back(step_integral(rates.source_dist[i], Rat(0)));
    arrival.push_back(pl_scale(cum_source.back(), Rat(1) / g.raw().sources[i].rate));
  }
  std::vector<PiecewiseLinear> labels = earliest_arrival_labels(g, traj, arrival);

  std::vector<CheckIssue> issues;
  for (std::size_t e = 0; e < g.arc_count(); ++e) {
    auto arc_issues =
        exit_time_derivative_check(traj[e], g.arc(e).capacity, g.arc(e).transit, g.arc(e).id);
    issues.insert(issues.end(), arc_issues.begin(), arc_issues.end());
  }

  // min-differentiation rule over particle space, up to the profile horizon
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    std::vector<Rat> grid = labels[v].xs;
    std::vector<PiecewiseLinear> terms;
    std::vector<std::string> term_names;
    int si = g.source_at(static_cast<int>(v));
    if (si >= 0) {
      terms.push_back(arrival[static_cast<std::size_t>(si)]);
      term_names.push_back("source");
    }
    for (int e : g.in_arcs(static_cast<int>(v))) {
      terms.push_back(pl_compose(traj[static_cast<std::size_t>(e)].exit_time,
                                 labels[static_cast<std::size_t>(g.arc_tail(static_cast<std::size_t>(e)))]));
      term_names.push_back(g.arc(static_cast<std::size_t>(e)).id);
    }
    for (const auto& t : terms) grid = merge_points(grid, t.xs);
    if (profile.horizon.is_finite()) {
      grid = merge_points(grid, {profile.horizon.value()});
      while (grid.back() > profile.horizon.value()) grid.pop_back();
    }
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const Rat& a = grid[i];
      const Rat& b = grid[i + 1];
      std::optional<Rat> best;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        // active on [a, b] iff the term equals the label at both endpoints
        if (terms[t].eval(a) != labels[v].eval(a) || terms[t].eval(b) != labels[v].eval(b))
          continue;
        Rat s = terms[t].slope_at(midpoint(a, b));
        if (!best || s < *best) best = s;
      }
      Rat got = labels[v].slope_at(midpoint(a, b));
      if (!best || *best != got)
        issues.push_back({"label_derivative", g.node(v),
                          "on (" + a.str() + ", " + b.str() + "): slope " + got.str() +
                              (best ? " != min active slope " + best->str()
                                    : " with no active term")});
    }
  }
  return issues;
}

}  // namespace nashflow
