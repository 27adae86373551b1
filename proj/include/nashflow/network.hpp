#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nashflow/rational.hpp"

namespace nashflow {

// ---------------------------------------------------------------------------
// Fluid queuing network instance: directed multigraph with transit times and
// capacities, inflow rates at sources, demand shares at sinks. Arcs are
// identified by id only -- parallel arcs are legal.
// ---------------------------------------------------------------------------

struct Arc {
  std::string id;
  std::string tail;
  std::string head;
  Rat transit;   // tau_e >= 0
  Rat capacity;  // nu_e > 0

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct Source {
  std::string node;
  Rat rate;  // r_i > 0

  friend bool operator==(const Source&, const Source&) = default;
};

struct SinkDemand {
  std::string node;
  Rat demand;  // d_j > 0, demands sum to 1

  friend bool operator==(const SinkDemand&, const SinkDemand&) = default;
};

struct Instance {
  std::vector<std::string> nodes;
  std::vector<Arc> arcs;
  std::vector<Source> sources;
  std::vector<SinkDemand> sinks;

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class ViolationKind {
  UnknownNode,
  DuplicateNode,
  DuplicateArcId,
  NonpositiveCapacity,
  NegativeTransit,
  NonpositiveRate,
  NonpositiveDemand,
  DuplicateSource,
  DuplicateSink,
  SourceSinkOverlap,
  DemandSumMismatch,
  UnreachableNode,
  NodeCannotReachSink,
  ZeroTransitCycle,
  NoSource,
  NoSink,
};

struct Violation {
  ViolationKind kind;
  std::string subject;  // node id, arc id, or an arc list for cycles
  std::string detail;
};

inline const char* violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::UnknownNode: return "UnknownNode";
    case ViolationKind::DuplicateNode: return "DuplicateNode";
    case ViolationKind::DuplicateArcId: return "DuplicateArcId";
    case ViolationKind::NonpositiveCapacity: return "NonpositiveCapacity";
    case ViolationKind::NegativeTransit: return "NegativeTransit";
    case ViolationKind::NonpositiveRate: return "NonpositiveRate";
    case ViolationKind::NonpositiveDemand: return "NonpositiveDemand";
    case ViolationKind::DuplicateSource: return "DuplicateSource";
    case ViolationKind::DuplicateSink: return "DuplicateSink";
    case ViolationKind::SourceSinkOverlap: return "SourceSinkOverlap";
    case ViolationKind::DemandSumMismatch: return "DemandSumMismatch";
    case ViolationKind::UnreachableNode: return "UnreachableNode";
    case ViolationKind::NodeCannotReachSink: return "NodeCannotReachSink";
    case ViolationKind::ZeroTransitCycle: return "ZeroTransitCycle";
    case ViolationKind::NoSource: return "NoSource";
    case ViolationKind::NoSink: return "NoSink";
  }
  return "?";
}

struct ValidationResult;
class ValidatedInstance;
ValidationResult validate_instance(const Instance& in);

// An Instance whose invariants have been certified. Carries the index maps
// and adjacency used by every algorithm; immutable after construction.
class ValidatedInstance {
public:
  const Instance& raw() const { return raw_; }
  std::size_t node_count() const { return raw_.nodes.size(); }
  std::size_t arc_count() const { return raw_.arcs.size(); }

  int node_index(const std::string& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) throw std::out_of_range("unknown node: " + id);
    return it->second;
  }
  int arc_index(const std::string& id) const {
    auto it = arc_index_.find(id);
    if (it == arc_index_.end()) throw std::out_of_range("unknown arc: " + id);
    return it->second;
  }
  const Arc& arc(std::size_t i) const { return raw_.arcs[i]; }
  const std::string& node(std::size_t i) const { return raw_.nodes[i]; }
  int arc_tail(std::size_t i) const { return tail_[i]; }
  int arc_head(std::size_t i) const { return head_[i]; }
  const std::vector<int>& out_arcs(int v) const { return out_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& in_arcs(int v) const { return in_[static_cast<std::size_t>(v)]; }

  const std::vector<int>& source_nodes() const { return source_nodes_; }
  const std::vector<int>& sink_nodes() const { return sink_nodes_; }
  bool is_source(int v) const { return source_of_node_[static_cast<std::size_t>(v)] >= 0; }
  // index into raw().sources, or -1
  int source_at(int v) const { return source_of_node_[static_cast<std::size_t>(v)]; }
  bool is_sink(int v) const { return sink_of_node_[static_cast<std::size_t>(v)] >= 0; }
  int sink_at(int v) const { return sink_of_node_[static_cast<std::size_t>(v)]; }

private:
  friend ValidationResult validate_instance(const Instance& in);

  Instance raw_;
  std::map<std::string, int> node_index_;
  std::map<std::string, int> arc_index_;
  std::vector<int> tail_, head_;
  std::vector<std::vector<int>> out_, in_;
  std::vector<int> source_nodes_, sink_nodes_;
  std::vector<int> source_of_node_, sink_of_node_;
};

struct ValidationResult {
  std::optional<ValidatedInstance> instance;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const {
    for (const auto& v : violations)
      if (v.kind == k) return true;
    return false;
  }
};

// Certifies all structural invariants of an instance. Returns either the
// validated instance or the full list of violations (never throws on bad
// input). Validating an already-valid instance returns it unchanged.
inline ValidationResult validate_instance(const Instance& in) {
  ValidationResult res;
  auto flag = [&](ViolationKind k, std::string subject, std::string detail) {
    res.violations.push_back({k, std::move(subject), std::move(detail)});
  };

  std::map<std::string, int> node_index;
  for (std::size_t i = 0; i < in.nodes.size(); ++i) {
    if (!node_index.emplace(in.nodes[i], static_cast<int>(i)).second)
      flag(ViolationKind::DuplicateNode, in.nodes[i], "node listed twice");
  }
  std::set<std::string> arc_ids;
  for (const Arc& a : in.arcs) {
    if (!arc_ids.insert(a.id).second)
      flag(ViolationKind::DuplicateArcId, a.id, "arc id listed twice");
    if (!node_index.count(a.tail))
      flag(ViolationKind::UnknownNode, a.tail, "tail of arc " + a.id);
    if (!node_index.count(a.head))
      flag(ViolationKind::UnknownNode, a.head, "head of arc " + a.id);
    if (a.capacity.sign() <= 0)
      flag(ViolationKind::NonpositiveCapacity, a.id, "capacity " + a.capacity.str());
    if (a.transit.sign() < 0)
      flag(ViolationKind::NegativeTransit, a.id, "transit " + a.transit.str());
  }
  std::set<std::string> seen_sources, seen_sinks;
  for (const Source& s : in.sources) {
    if (!node_index.count(s.node)) flag(ViolationKind::UnknownNode, s.node, "source node");
    if (!seen_sources.insert(s.node).second)
      flag(ViolationKind::DuplicateSource, s.node, "source listed twice");
    if (s.rate.sign() <= 0) flag(ViolationKind::NonpositiveRate, s.node, "rate " + s.rate.str());
  }
  Rat demand_sum(0);
  for (const SinkDemand& t : in.sinks) {
    if (!node_index.count(t.node)) flag(ViolationKind::UnknownNode, t.node, "sink node");
    if (!seen_sinks.insert(t.node).second)
      flag(ViolationKind::DuplicateSink, t.node, "sink listed twice");
    if (seen_sources.count(t.node))
      flag(ViolationKind::SourceSinkOverlap, t.node,
           "node is both a source and a sink; flow for this sink would vanish at its entry "
           "point and the per-sink decomposition has no value there");
    if (t.demand.sign() <= 0)
      flag(ViolationKind::NonpositiveDemand, t.node, "demand " + t.demand.str());
    demand_sum += t.demand;
  }
  if (in.sources.empty()) flag(ViolationKind::NoSource, "", "at least one source required");
  if (in.sinks.empty()) flag(ViolationKind::NoSink, "", "at least one sink required");
  if (!in.sinks.empty() && demand_sum != Rat(1))
    flag(ViolationKind::DemandSumMismatch, demand_sum.str(),
         "demands sum to " + demand_sum.str() + ", expected 1");
  if (!res.violations.empty()) return res;  // graph checks need a well-formed index

  const std::size_t n = in.nodes.size();
  std::vector<std::vector<int>> out(n), in_adj(n);
  for (std::size_t i = 0; i < in.arcs.size(); ++i) {
    out[static_cast<std::size_t>(node_index[in.arcs[i].tail])].push_back(static_cast<int>(i));
    in_adj[static_cast<std::size_t>(node_index[in.arcs[i].head])].push_back(static_cast<int>(i));
  }

  // forward reachability from the set of sources
  std::vector<bool> reached(n, false);
  std::vector<int> stack;
  for (const Source& s : in.sources) {
    int v = node_index[s.node];
    if (!reached[static_cast<std::size_t>(v)]) {
      reached[static_cast<std::size_t>(v)] = true;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int a : out[static_cast<std::size_t>(v)]) {
      int w = node_index[in.arcs[static_cast<std::size_t>(a)].head];
      if (!reached[static_cast<std::size_t>(w)]) {
        reached[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (!reached[v]) flag(ViolationKind::UnreachableNode, in.nodes[v], "not reachable from any source");

  // backward reachability to the set of sinks
  std::vector<bool> coreached(n, false);
  for (const SinkDemand& t : in.sinks) {
    int v = node_index[t.node];
    if (!coreached[static_cast<std::size_t>(v)]) {
      coreached[static_cast<std::size_t>(v)] = true;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int a : in_adj[static_cast<std::size_t>(v)]) {
      int w = node_index[in.arcs[static_cast<std::size_t>(a)].tail];
      if (!coreached[static_cast<std::size_t>(w)]) {
        coreached[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (!coreached[v]) flag(ViolationKind::NodeCannotReachSink, in.nodes[v], "cannot reach any sink");

  // every directed cycle must have positive total transit: equivalently the
  // subgraph of zero-transit arcs is acyclic
  {
    std::vector<std::vector<int>> zout(n);
    for (std::size_t i = 0; i < in.arcs.size(); ++i)
      if (in.arcs[i].transit.sign() == 0)
        zout[static_cast<std::size_t>(node_index[in.arcs[i].tail])].push_back(static_cast<int>(i));
    std::vector<int> state(n, 0);  // 0 unseen, 1 on stack, 2 done
    std::vector<int> cycle;
    // returns -1: no cycle below, -2: cycle found and fully recorded,
    // w >= 0: cycle head w, still collecting tree arcs on the way up
    auto dfs = [&](auto&& self, int v) -> int {
      state[static_cast<std::size_t>(v)] = 1;
      for (int a : zout[static_cast<std::size_t>(v)]) {
        int w = node_index[in.arcs[static_cast<std::size_t>(a)].head];
        if (state[static_cast<std::size_t>(w)] == 1) {
          cycle.push_back(a);
          return w == v ? -2 : w;
        }
        if (state[static_cast<std::size_t>(w)] == 0) {
          int r = self(self, w);
          if (r == -2) return -2;
          if (r >= 0) {
            cycle.push_back(a);
            return r == v ? -2 : r;
          }
        }
      }
      state[static_cast<std::size_t>(v)] = 2;
      return -1;
    };
    for (std::size_t v = 0; v < n && cycle.empty(); ++v)
      if (state[v] == 0) dfs(dfs, static_cast<int>(v));
    if (!cycle.empty()) {
      std::string arcs;
      for (auto it = cycle.rbegin(); it != cycle.rend(); ++it) {
        if (!arcs.empty()) arcs += ",";
        arcs += in.arcs[static_cast<std::size_t>(*it)].id;
      }
      flag(ViolationKind::ZeroTransitCycle, arcs, "directed cycle with zero total transit time");
    }
  }

  if (!res.violations.empty()) return res;

  ValidatedInstance vi;
  vi.raw_ = in;
  vi.node_index_ = std::move(node_index);
  for (std::size_t i = 0; i < in.arcs.size(); ++i) vi.arc_index_[in.arcs[i].id] = static_cast<int>(i);
  vi.out_ = std::move(out);
  vi.in_ = std::move(in_adj);
  vi.tail_.reserve(in.arcs.size());
  vi.head_.reserve(in.arcs.size());
  for (const Arc& a : in.arcs) {
    vi.tail_.push_back(vi.node_index_[a.tail]);
    vi.head_.push_back(vi.node_index_[a.head]);
  }
  vi.source_of_node_.assign(n, -1);
  vi.sink_of_node_.assign(n, -1);
  for (std::size_t i = 0; i < in.sources.size(); ++i) {
    int v = vi.node_index_[in.sources[i].node];
    vi.source_nodes_.push_back(v);
    vi.source_of_node_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }
  for (std::size_t j = 0; j < in.sinks.size(); ++j) {
    int v = vi.node_index_[in.sinks[j].node];
    vi.sink_nodes_.push_back(v);
    vi.sink_of_node_[static_cast<std::size_t>(v)] = static_cast<int>(j);
  }
  res.instance = std::move(vi);
  return res;
}

// Length of a shortest path to `target` under the transit times, for every
// node (infinite when the node cannot reach the target). Bellman-Ford on the
// reversed graph; well-defined because all cycles have positive transit.
inline std::map<std::string, ExtRat> shortest_transit_distances(const ValidatedInstance& inst,
                                                                const std::string& target) {
  const std::size_t n = inst.node_count();
  std::vector<ExtRat> dist(n, ExtRat::infinity());
  dist[static_cast<std::size_t>(inst.node_index(target))] = Rat(0);
  for (std::size_t round = 0; round + 1 < n || round == 0; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < inst.arc_count(); ++a) {
      const auto& hd = dist[static_cast<std::size_t>(inst.arc_head(a))];
      if (!hd.is_finite()) continue;
      ExtRat cand = hd + inst.arc(a).transit;
      auto& td = dist[static_cast<std::size_t>(inst.arc_tail(a))];
      if (cand < td) {
        td = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::map<std::string, ExtRat> out;
  for (std::size_t v = 0; v < n; ++v) out[inst.node(v)] = dist[v];
  return out;
}

}  // namespace nashflow
