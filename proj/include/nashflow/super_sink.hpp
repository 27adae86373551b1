#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashflow/network.hpp"
#include "nashflow/rational.hpp"

namespace nashflow {

// sigma = min over all capacities and all source rates; every thin-flow label
// on original nodes is bounded by 1/sigma, which is what makes the super-sink
// capacities small enough to pin the per-sink flow values to the demands.
inline Rat sigma(const ValidatedInstance& inst) {
  Rat s = inst.raw().sources.front().rate;
  for (const Source& src : inst.raw().sources) s = min(s, src.rate);
  for (const Arc& a : inst.raw().arcs) s = min(s, a.capacity);
  return s;
}

// Multi-sink instance reduced to a single sink: the original graph plus a
// super sink t and one arc e_j = (t_j, t) per sink with
//   tau_{e_j} = delta_max - delta_j       (so every e_j starts out active)
//   nu_{e_j}  = d_j * sigma / 2           (strictly below every nu_e and r_i)
// where delta_j is the shortest transit distance from any source to t_j.
struct ExtendedInstance {
  ValidatedInstance base;   // the original, multi-sink instance
  ValidatedInstance graph;  // the extended single-sink instance
  std::string super_sink;
  Rat sigma_value;
  std::vector<std::string> sink_arc_ids;  // aligned with base.raw().sinks
  std::vector<int> sink_arc_index;        // arc index in `graph`, same alignment

  std::size_t original_arc_count() const { return base.raw().arcs.size(); }
  bool is_original_arc(std::size_t arc_idx) const { return arc_idx < original_arc_count(); }
  bool is_original_node(std::size_t node_idx) const { return node_idx < base.raw().nodes.size(); }
  // base sink index served by this arc, or -1 for original arcs
  int sink_of_arc(std::size_t arc_idx) const {
    return is_original_arc(arc_idx) ? -1
                                    : static_cast<int>(arc_idx - original_arc_count());
  }
};

inline ExtendedInstance build_extended_graph(const ValidatedInstance& inst) {
  const Instance& raw = inst.raw();
  Rat sig = sigma(inst);

  std::vector<Rat> delta;
  delta.reserve(raw.sinks.size());
  for (const SinkDemand& t : raw.sinks) {
    auto dist = shortest_transit_distances(inst, t.node);
    ExtRat best = ExtRat::infinity();
    for (const Source& s : raw.sources) best = min(best, dist.at(s.node));
    delta.push_back(best.value());  // finite: validation certifies reachability
  }
  Rat delta_max(0);
  for (const Rat& d : delta) delta_max = max(delta_max, d);

  std::string t_id = "t*";
  while (std::find(raw.nodes.begin(), raw.nodes.end(), t_id) != raw.nodes.end()) t_id += "*";

  Instance ext = raw;
  ext.nodes.push_back(t_id);
  std::vector<std::string> sink_arc_ids;
  for (std::size_t j = 0; j < raw.sinks.size(); ++j) {
    std::string id = "sink-arc:" + raw.sinks[j].node;
    auto taken = [&](const std::string& cand) {
      for (const Arc& a : ext.arcs)
        if (a.id == cand) return true;
      return false;
    };
    while (taken(id)) id += "*";
    ext.arcs.push_back({id, raw.sinks[j].node, t_id, delta_max - delta[j],
                        raw.sinks[j].demand * sig / Rat(2)});
    sink_arc_ids.push_back(id);
  }
  ext.sources = raw.sources;
  ext.sinks = {{t_id, Rat(1)}};

  ValidationResult vr = validate_instance(ext);
  if (!vr.ok()) throw std::logic_error("build_extended_graph: extension failed validation");

  ExtendedInstance out;
  out.base = inst;
  out.graph = std::move(*vr.instance);
  out.super_sink = t_id;
  out.sigma_value = sig;
  out.sink_arc_ids = std::move(sink_arc_ids);
  for (const std::string& id : out.sink_arc_ids)
    out.sink_arc_index.push_back(out.graph.arc_index(id));
  return out;
}

}  // namespace nashflow
