#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashflow/linalg.hpp"
#include "nashflow/rational.hpp"

namespace nashflow {

// ---------------------------------------------------------------------------
// Thin flows with resetting on an acyclic shortest-paths subgraph.
//
// A problem carries the active arcs E' (with their resetting subset E* as a
// per-arc flag), capacities, source rates and the single sink. A solution is
// a static unit flow (splits x'_i, arc flows x'_e) plus node labels l'_v
// satisfying the four thin-flow conditions; the congestion of an arc is
//   rho_e = x'_e / nu_e                 for resetting arcs,
//   rho_e = max(l'_tail, x'_e / nu_e)   otherwise.
// ---------------------------------------------------------------------------

struct TFArc {
  std::string id;
  int tail = -1;
  int head = -1;
  Rat capacity;
  bool resetting = false;
};

struct TFSource {
  int node = -1;
  Rat rate;
};

struct ThinFlowProblem {
  std::vector<std::string> nodes;
  std::vector<TFArc> arcs;  // E'; finalize() sorts them by id
  std::vector<TFSource> sources;
  int sink = -1;

  // derived by finalize()
  std::vector<std::vector<int>> in_arcs, out_arcs;
  std::vector<int> topo;          // topological node order (empty if cyclic)
  std::vector<int> source_index;  // node -> index into sources, or -1
  bool acyclic = false;

  void finalize() {
    std::sort(arcs.begin(), arcs.end(),
              [](const TFArc& a, const TFArc& b) { return a.id < b.id; });
    const std::size_t n = nodes.size();
    in_arcs.assign(n, {});
    out_arcs.assign(n, {});
    for (std::size_t e = 0; e < arcs.size(); ++e) {
      out_arcs[static_cast<std::size_t>(arcs[e].tail)].push_back(static_cast<int>(e));
      in_arcs[static_cast<std::size_t>(arcs[e].head)].push_back(static_cast<int>(e));
    }
    source_index.assign(n, -1);
    for (std::size_t i = 0; i < sources.size(); ++i)
      source_index[static_cast<std::size_t>(sources[i].node)] = static_cast<int>(i);
    // Kahn topological sort
    topo.clear();
    std::vector<int> indeg(n, 0);
    for (const TFArc& a : arcs) ++indeg[static_cast<std::size_t>(a.head)];
    std::vector<int> queue;
    for (std::size_t v = 0; v < n; ++v)
      if (indeg[v] == 0) queue.push_back(static_cast<int>(v));
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int v = queue[qi];
      topo.push_back(v);
      for (int e : out_arcs[static_cast<std::size_t>(v)])
        if (--indeg[static_cast<std::size_t>(arcs[static_cast<std::size_t>(e)].head)] == 0)
          queue.push_back(arcs[static_cast<std::size_t>(e)].head);
    }
    acyclic = topo.size() == n;
  }

  bool is_source_node(int v) const { return source_index[static_cast<std::size_t>(v)] >= 0; }

  std::vector<std::string> validate() const {
    std::vector<std::string> problems;
    const int n = static_cast<int>(nodes.size());
    if (sink < 0 || sink >= n) problems.push_back("sink out of range");
    if (sources.empty()) problems.push_back("no sources");
    std::set<int> snodes;
    for (const TFSource& s : sources) {
      if (s.node < 0 || s.node >= n) problems.push_back("source node out of range");
      else if (!snodes.insert(s.node).second) problems.push_back("duplicate source " + nodes[static_cast<std::size_t>(s.node)]);
      if (s.rate.sign() <= 0) problems.push_back("nonpositive source rate");
    }
    if (sink >= 0 && snodes.count(sink)) problems.push_back("sink coincides with a source");
    std::set<std::string> ids;
    for (const TFArc& a : arcs) {
      if (a.tail < 0 || a.tail >= n || a.head < 0 || a.head >= n)
        problems.push_back("arc " + a.id + " endpoint out of range");
      if (a.capacity.sign() <= 0) problems.push_back("arc " + a.id + " nonpositive capacity");
      if (!ids.insert(a.id).second) problems.push_back("duplicate arc id " + a.id);
    }
    if (!problems.empty()) return problems;
    if (!acyclic) problems.push_back("subgraph has a directed cycle");
    // every node reachable from a source within E'
    std::vector<bool> reach(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    for (int v : snodes) {
      reach[static_cast<std::size_t>(v)] = true;
      stack.push_back(v);
    }
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int e : out_arcs[static_cast<std::size_t>(v)]) {
        int w = arcs[static_cast<std::size_t>(e)].head;
        if (!reach[static_cast<std::size_t>(w)]) {
          reach[static_cast<std::size_t>(w)] = true;
          stack.push_back(w);
        }
      }
    }
    for (int v = 0; v < n; ++v)
      if (!reach[static_cast<std::size_t>(v)])
        problems.push_back("node " + nodes[static_cast<std::size_t>(v)] + " unreachable within E'");
    return problems;
  }

  std::string debug_dump() const {
    std::string s = "thin flow problem\n nodes:";
    for (const auto& v : nodes) s += " " + v;
    s += "\n sink: " + (sink >= 0 ? nodes[static_cast<std::size_t>(sink)] : std::string("?"));
    s += "\n sources:";
    for (const auto& src : sources)
      s += " " + nodes[static_cast<std::size_t>(src.node)] + "(r=" + src.rate.str() + ")";
    s += "\n arcs:\n";
    for (const TFArc& a : arcs) {
      s += "  " + a.id + ": " + nodes[static_cast<std::size_t>(a.tail)] + "->" +
           nodes[static_cast<std::size_t>(a.head)] + " nu=" + a.capacity.str() +
           (a.resetting ? " resetting" : "") + "\n";
    }
    return s;
  }
};

struct ThinFlow {
  std::vector<Rat> splits;    // x'_i, one per problem source
  std::vector<Rat> arc_flow;  // x'_e, one per problem arc (E' order)
  std::vector<Rat> labels;    // l'_v, one per problem node
};

inline Rat congestion(const Rat& label_tail, const Rat& flow, const Rat& capacity,
                      bool resetting) {
  Rat q = flow / capacity;
  return resetting ? q : max(label_tail, q);
}

enum class ThinFlowCondition {
  Conservation,
  SplitSum,
  NonnegativeFlow,
  SourceLabel,      // l'_s = x'_i / r_i at every source
  SourceBound,      // source labels bounded by incoming congestion
  MinimumAttained,  // non-source labels equal the incoming minimum
  TightArc,         // flow-carrying arcs are congestion-tight
  Structure,
};

struct ThinFlowViolation {
  ThinFlowCondition condition;
  std::string subject;
  std::string detail;
};

struct ThinFlowCertificate {
  std::vector<ThinFlowViolation> violations;
  bool pass() const { return violations.empty(); }
};

// Verifies conservation (the static unit flow property) and the four
// thin-flow conditions exactly, reporting every violated condition with its
// witnessing node or arc.
inline ThinFlowCertificate check_thin_flow(const ThinFlowProblem& p, const ThinFlow& tf) {
  ThinFlowCertificate cert;
  auto flag = [&](ThinFlowCondition c, std::string subject, std::string detail) {
    cert.violations.push_back({c, std::move(subject), std::move(detail)});
  };
  const std::size_t n = p.nodes.size();
  if (tf.splits.size() != p.sources.size() || tf.arc_flow.size() != p.arcs.size() ||
      tf.labels.size() != n) {
    flag(ThinFlowCondition::Structure, "", "solution dimensions do not match problem");
    return cert;
  }

  for (std::size_t e = 0; e < p.arcs.size(); ++e)
    if (tf.arc_flow[e].sign() < 0)
      flag(ThinFlowCondition::NonnegativeFlow, p.arcs[e].id, "x' = " + tf.arc_flow[e].str());
  Rat split_sum(0);
  for (std::size_t i = 0; i < p.sources.size(); ++i) {
    if (tf.splits[i].sign() < 0)
      flag(ThinFlowCondition::NonnegativeFlow, p.nodes[static_cast<std::size_t>(p.sources[i].node)],
           "x'_i = " + tf.splits[i].str());
    split_sum += tf.splits[i];
  }
  if (split_sum != Rat(1))
    flag(ThinFlowCondition::SplitSum, "", "sum of source splits is " + split_sum.str());

  for (std::size_t v = 0; v < n; ++v) {
    Rat net(0);
    for (int e : p.out_arcs[v]) net += tf.arc_flow[static_cast<std::size_t>(e)];
    for (int e : p.in_arcs[v]) net -= tf.arc_flow[static_cast<std::size_t>(e)];
    int si = p.source_index[v];
    Rat expected = si >= 0 ? tf.splits[static_cast<std::size_t>(si)]
                           : (static_cast<int>(v) == p.sink ? -Rat(1) : Rat(0));
    if (net != expected)
      flag(ThinFlowCondition::Conservation, p.nodes[v],
           "net outflow " + net.str() + ", expected " + expected.str());
  }

  auto rho = [&](std::size_t e) {
    const TFArc& a = p.arcs[e];
    return congestion(tf.labels[static_cast<std::size_t>(a.tail)], tf.arc_flow[e], a.capacity,
                      a.resetting);
  };

  for (std::size_t i = 0; i < p.sources.size(); ++i) {
    std::size_t v = static_cast<std::size_t>(p.sources[i].node);
    Rat want = tf.splits[i] / p.sources[i].rate;
    if (tf.labels[v] != want)
      flag(ThinFlowCondition::SourceLabel, p.nodes[v],
           "l' = " + tf.labels[v].str() + ", x'_i/r_i = " + want.str());
    for (int e : p.in_arcs[v]) {
      Rat r = rho(static_cast<std::size_t>(e));
      if (tf.labels[v] > r)
        flag(ThinFlowCondition::SourceBound, p.nodes[v],
             "l' = " + tf.labels[v].str() + " > rho(" + p.arcs[static_cast<std::size_t>(e)].id +
                 ") = " + r.str());
    }
  }

  for (std::size_t v = 0; v < n; ++v) {
    if (p.source_index[v] >= 0) continue;
    if (p.in_arcs[v].empty()) {
      flag(ThinFlowCondition::Structure, p.nodes[v], "non-source node without incoming arc");
      continue;
    }
    bool attained = false;
    for (int e : p.in_arcs[v]) {
      Rat r = rho(static_cast<std::size_t>(e));
      if (tf.labels[v] > r) {
        flag(ThinFlowCondition::MinimumAttained, p.nodes[v],
             "l' = " + tf.labels[v].str() + " > rho(" + p.arcs[static_cast<std::size_t>(e)].id +
                 ") = " + r.str());
      }
      if (tf.labels[v] == r) attained = true;
    }
    if (!attained)
      flag(ThinFlowCondition::MinimumAttained, p.nodes[v],
           "l' = " + tf.labels[v].str() + " attained by no incoming arc");
  }

  for (std::size_t e = 0; e < p.arcs.size(); ++e) {
    if (tf.arc_flow[e].sign() <= 0) continue;
    Rat r = rho(e);
    std::size_t v = static_cast<std::size_t>(p.arcs[e].head);
    if (tf.labels[v] != r)
      flag(ThinFlowCondition::TightArc, p.arcs[e].id,
           "l'_head = " + tf.labels[v].str() + ", rho = " + r.str());
  }
  return cert;
}

struct NoThinFlowFound : std::runtime_error {
  explicit NoThinFlowFound(const ThinFlowProblem& p)
      : std::runtime_error("no thin flow found (solver bug, existence is guaranteed):\n" +
                           p.debug_dump()),
        problem_dump(p.debug_dump()) {}
  std::string problem_dump;
};

struct OracleBoundExceeded : std::runtime_error {
  explicit OracleBoundExceeded(std::size_t n, std::size_t bound)
      : std::runtime_error("oracle bound exceeded: " + std::to_string(n) + " arcs > " +
                           std::to_string(bound)) {}
};

namespace detail {

// Support masks are feasible only if every chosen arc lies on a source-sink
// path inside the support (flow decomposition makes this necessary) and the
// sink is reachable at all.
inline bool support_closed(const ThinFlowProblem& p, std::uint32_t mask) {
  const std::size_t n = p.nodes.size();
  std::vector<bool> fwd(n, false), bwd(n, false);
  std::vector<int> stack;
  for (const TFSource& s : p.sources)
    if (!fwd[static_cast<std::size_t>(s.node)]) {
      fwd[static_cast<std::size_t>(s.node)] = true;
      stack.push_back(s.node);
    }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int e : p.out_arcs[static_cast<std::size_t>(v)]) {
      if (!(mask >> e & 1u)) continue;
      int w = p.arcs[static_cast<std::size_t>(e)].head;
      if (!fwd[static_cast<std::size_t>(w)]) {
        fwd[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  if (!fwd[static_cast<std::size_t>(p.sink)]) return false;
  bwd[static_cast<std::size_t>(p.sink)] = true;
  stack.push_back(p.sink);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int e : p.in_arcs[static_cast<std::size_t>(v)]) {
      if (!(mask >> e & 1u)) continue;
      int w = p.arcs[static_cast<std::size_t>(e)].tail;
      if (!bwd[static_cast<std::size_t>(w)]) {
        bwd[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  for (std::size_t e = 0; e < p.arcs.size(); ++e) {
    if (!(mask >> e & 1u)) continue;
    if (!fwd[static_cast<std::size_t>(p.arcs[e].tail)] ||
        !bwd[static_cast<std::size_t>(p.arcs[e].head)])
      return false;
  }
  return true;
}

// Affine expression in the support-arc flow variables: coef[0..k-1] + constant.
struct Affine {
  std::vector<Rat> coef;
  Rat constant;

  explicit Affine(std::size_t k) : coef(k, Rat(0)), constant(0) {}
  void add(const Affine& o, const Rat& c) {
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] += c * o.coef[i];
    constant += c * o.constant;
  }
  Rat eval(const std::vector<Rat>& x) const {
    Rat r = constant;
    for (std::size_t i = 0; i < coef.size(); ++i)
      if (coef[i].sign() != 0) r += coef[i] * x[i];
    return r;
  }
};

}  // namespace detail

// Certified constructive search: enumerate closed support sets in a fixed
// order (arcs sorted by id, bitmask ascending), resolve the max in rho per
// supported non-resetting arc and the minimum-attaining arc per node untouched by the
// support, express labels by substitution along a topological order, solve
// the remaining exact linear system in the flow variables, and return the
// first candidate that check_thin_flow certifies. Existence is
// guaranteed, so exhausting the search indicates a bug and throws.
inline ThinFlow solve_thin_flow(const ThinFlowProblem& p) {
  {
    auto problems = p.validate();
    if (!problems.empty())
      throw std::invalid_argument("solve_thin_flow: invalid problem: " + problems.front());
  }
  const std::size_t m = p.arcs.size();
  const std::size_t n = p.nodes.size();
  if (m >= 31) throw std::invalid_argument("solve_thin_flow: too many active arcs");

  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    if (!detail::support_closed(p, mask)) continue;
    std::vector<int> support;  // arc indices, ascending (= id order)
    std::vector<int> var_of_arc(m, -1);
    for (std::size_t e = 0; e < m; ++e)
      if (mask >> e & 1u) {
        var_of_arc[e] = static_cast<int>(support.size());
        support.push_back(static_cast<int>(e));
      }
    const std::size_t k = support.size();

    std::vector<int> nonreset;  // positions in `support` needing a max-case bit
    for (std::size_t s = 0; s < k; ++s)
      if (!p.arcs[static_cast<std::size_t>(support[s])].resetting)
        nonreset.push_back(static_cast<int>(s));

    // nodes with no supported incoming arc need a choice of minimum-attaining arc
    std::vector<bool> covered(n, false);
    for (int e : support) covered[static_cast<std::size_t>(p.arcs[static_cast<std::size_t>(e)].head)] = true;
    std::vector<int> choice_nodes;
    for (std::size_t v = 0; v < n; ++v)
      if (p.source_index[v] < 0 && !covered[v] && !p.in_arcs[v].empty())
        choice_nodes.push_back(static_cast<int>(v));

    std::vector<std::size_t> attainer(choice_nodes.size(), 0);
    for (;;) {  // mixed-radix loop over attainer choices
      for (std::uint32_t cases = 0; cases < (1u << nonreset.size()); ++cases) {
        // queue_side[s]: rho of support arc s resolves to x'_e/nu_e
        std::vector<bool> queue_side(k, true);
        for (std::size_t b = 0; b < nonreset.size(); ++b)
          queue_side[static_cast<std::size_t>(nonreset[b])] = (cases >> b & 1u) != 0;

        // labels as affine functions of the flow variables, in topo order
        std::vector<detail::Affine> label(n, detail::Affine(k));
        std::vector<std::vector<Rat>> rows;
        std::vector<Rat> rhs;
        bool bad = false;
        for (int v : p.topo) {
          std::size_t vu = static_cast<std::size_t>(v);
          int si = p.source_index[vu];
          detail::Affine net(k);  // net outflow at v over the support
          for (int e : p.out_arcs[vu])
            if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
              net.coef[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] += Rat(1);
          for (int e : p.in_arcs[vu])
            if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
              net.coef[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] -= Rat(1);

          auto rho_affine = [&](int e) {
            const TFArc& a = p.arcs[static_cast<std::size_t>(e)];
            detail::Affine r(k);
            int var = var_of_arc[static_cast<std::size_t>(e)];
            if (var >= 0) {
              if (queue_side[static_cast<std::size_t>(var)])
                r.coef[static_cast<std::size_t>(var)] = Rat(1) / a.capacity;
              else
                r = label[static_cast<std::size_t>(a.tail)];
            } else {
              if (!a.resetting) r = label[static_cast<std::size_t>(a.tail)];
              // resetting with zero flow: rho = 0
            }
            return r;
          };

          std::vector<int> supported_in;
          for (int e : p.in_arcs[vu])
            if (var_of_arc[static_cast<std::size_t>(e)] >= 0) supported_in.push_back(e);

          if (si >= 0) {
            // the source-label condition defines the label; supported incoming arcs add tightness rows
            label[vu] = net;
            Rat inv = Rat(1) / p.sources[static_cast<std::size_t>(si)].rate;
            for (Rat& c : label[vu].coef) c *= inv;
            label[vu].constant *= inv;
            for (int e : supported_in) {
              detail::Affine row = label[vu];
              row.add(rho_affine(e), Rat(-1));
              rows.push_back(row.coef);
              rhs.push_back(-row.constant);
            }
          } else if (!supported_in.empty()) {
            label[vu] = rho_affine(supported_in.front());
            for (std::size_t j = 1; j < supported_in.size(); ++j) {
              detail::Affine row = label[vu];
              row.add(rho_affine(supported_in[j]), Rat(-1));
              rows.push_back(row.coef);
              rhs.push_back(-row.constant);
            }
          } else if (!p.in_arcs[vu].empty()) {
            std::size_t pos =
                static_cast<std::size_t>(std::find(choice_nodes.begin(), choice_nodes.end(), v) -
                                         choice_nodes.begin());
            int e0 = p.in_arcs[vu][attainer[pos]];
            label[vu] = rho_affine(e0);
          } else {
            bad = true;  // unreachable non-source node; validate() precludes this
            break;
          }

          // flow conservation rows (sources and sink excluded: the source net
          // outflow defines the split, the sink carries the value row)
          if (si < 0 && v != p.sink) {
            bool nonzero = false;
            for (const Rat& c : net.coef)
              if (c.sign() != 0) nonzero = true;
            if (nonzero) {
              rows.push_back(net.coef);
              rhs.push_back(Rat(0));
            }
          }
          if (v == p.sink) {
            std::vector<Rat> row = net.coef;
            for (Rat& c : row) c = -c;
            rows.push_back(std::move(row));
            rhs.push_back(Rat(1));
          }
        }
        if (bad) continue;

        LinearSolution sol = solve_linear(rows, rhs);
        if (!sol.consistent) continue;

        ThinFlow tf;
        tf.arc_flow.assign(m, Rat(0));
        bool negative = false;
        for (std::size_t s = 0; s < k; ++s) {
          tf.arc_flow[static_cast<std::size_t>(support[s])] = sol.x[s];
          if (sol.x[s].sign() < 0) negative = true;
        }
        if (negative) continue;
        tf.labels.reserve(n);
        for (std::size_t v = 0; v < n; ++v) tf.labels.push_back(label[v].eval(sol.x));
        tf.splits.reserve(p.sources.size());
        for (const TFSource& src : p.sources) {
          Rat net(0);
          for (int e : p.out_arcs[static_cast<std::size_t>(src.node)]) net += tf.arc_flow[static_cast<std::size_t>(e)];
          for (int e : p.in_arcs[static_cast<std::size_t>(src.node)]) net -= tf.arc_flow[static_cast<std::size_t>(e)];
          tf.splits.push_back(net);
        }
        if (check_thin_flow(p, tf).pass()) return tf;
      }

      // advance the attainer counter
      std::size_t pos = 0;
      while (pos < choice_nodes.size()) {
        std::size_t deg = p.in_arcs[static_cast<std::size_t>(choice_nodes[pos])].size();
        if (++attainer[pos] < deg) break;
        attainer[pos] = 0;
        ++pos;
      }
      if (pos == choice_nodes.size()) break;
    }
  }
  throw NoThinFlowFound(p);
}

// Brute-force oracle: enumerates every feasible support, every max-case of
// every supported non-resetting arc and every minimum-attaining arc of every
// non-source node, solves the induced joint linear system in (x', l') and
// returns all certified solutions, deduplicated. Attainer choices resolving
// to identical equations (parallel arcs with the same rho form) are solved
// once. Independent of the substitution strategy used by solve_thin_flow;
// shares only the certifier.
inline std::vector<ThinFlow> oracle_enumerate(const ThinFlowProblem& p, std::size_t bound = 16) {
  {
    auto problems = p.validate();
    if (!problems.empty())
      throw std::invalid_argument("oracle_enumerate: invalid problem: " + problems.front());
  }
  const std::size_t m = p.arcs.size();
  const std::size_t n = p.nodes.size();
  if (m > bound) throw OracleBoundExceeded(m, bound);

  std::vector<ThinFlow> found;
  std::set<std::string> seen;

  // reusable workspace: Rat slots keep their allocations across systems
  std::vector<std::vector<Rat>> base_A, work_A;
  std::vector<Rat> base_b, work_b;
  auto ensure_shape = [](std::vector<std::vector<Rat>>& mat, std::vector<Rat>& vec,
                         std::size_t rows, std::size_t cols) {
    if (mat.size() < rows) mat.resize(rows);
    for (std::size_t r = 0; r < rows; ++r)
      if (mat[r].size() < cols) mat[r].resize(cols, Rat(0));
    if (vec.size() < rows) vec.resize(rows, Rat(0));
  };

  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    if (!detail::support_closed(p, mask)) continue;
    std::vector<int> var_of_arc(m, -1);
    std::vector<int> support;
    for (std::size_t e = 0; e < m; ++e)
      if (mask >> e & 1u) {
        var_of_arc[e] = static_cast<int>(support.size());
        support.push_back(static_cast<int>(e));
      }
    const std::size_t k = support.size();
    const std::size_t nvars = k + n;  // flows then labels

    std::vector<int> nonreset;
    for (std::size_t s = 0; s < k; ++s)
      if (!p.arcs[static_cast<std::size_t>(support[s])].resetting)
        nonreset.push_back(static_cast<int>(s));

    std::vector<int> choice_nodes;
    for (std::size_t v = 0; v < n; ++v)
      if (p.source_index[v] < 0 && !p.in_arcs[v].empty()) choice_nodes.push_back(static_cast<int>(v));

    for (std::uint32_t cases = 0; cases < (1u << nonreset.size()); ++cases) {
      std::vector<bool> queue_side(k, true);
      for (std::size_t b = 0; b < nonreset.size(); ++b)
        queue_side[static_cast<std::size_t>(nonreset[b])] = (cases >> b & 1u) != 0;

      // rho_e resolved under the current case split: the attainer equation
      // l'_v = rho_e depends on the arc only through this form
      struct RhoForm {
        int kind;  // 0: rho = 0, 1: rho = l'_tail, 2: rho = x'_e / nu_e
        int index; // tail node (kind 1) or flow variable (kind 2)
        Rat coef;  // 1 / nu_e for kind 2
      };
      auto resolve = [&](int e) {
        const TFArc& a = p.arcs[static_cast<std::size_t>(e)];
        int var = var_of_arc[static_cast<std::size_t>(e)];
        if (var >= 0 && queue_side[static_cast<std::size_t>(var)])
          return RhoForm{2, var, Rat(1) / a.capacity};
        if (var >= 0 || !a.resetting) return RhoForm{1, a.tail, Rat(0)};
        return RhoForm{0, 0, Rat(0)};
      };

      // base rows: source labels, conservation, sink value, arc tightness (independent of the
      // attainer choices)
      std::size_t base_rows = 0;
      std::size_t max_rows = n + k + choice_nodes.size() + 1;
      ensure_shape(base_A, base_b, max_rows, nvars);
      auto new_base_row = [&]() -> std::vector<Rat>& {
        auto& row = base_A[base_rows];
        for (std::size_t j = 0; j < nvars; ++j) row[j] = Rat(0);
        base_b[base_rows] = Rat(0);
        ++base_rows;
        return row;
      };
      auto add_rho = [&](std::vector<Rat>& row, const RhoForm& f, const Rat& c) {
        if (f.kind == 1)
          row[k + static_cast<std::size_t>(f.index)] += c;
        else if (f.kind == 2)
          row[static_cast<std::size_t>(f.index)] += c * f.coef;
      };

      for (std::size_t v = 0; v < n; ++v) {
        int si = p.source_index[v];
        if (si >= 0) {
          // source label: l'_s * r_i - net_out = 0
          auto& row = new_base_row();
          row[k + v] = p.sources[static_cast<std::size_t>(si)].rate;
          for (int e : p.out_arcs[v])
            if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
              row[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] -= Rat(1);
          for (int e : p.in_arcs[v])
            if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
              row[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] += Rat(1);
        } else if (static_cast<int>(v) != p.sink) {
          bool touched = false;
          for (int e : p.out_arcs[v]) touched |= var_of_arc[static_cast<std::size_t>(e)] >= 0;
          for (int e : p.in_arcs[v]) touched |= var_of_arc[static_cast<std::size_t>(e)] >= 0;
          if (touched) {
            auto& row = new_base_row();
            for (int e : p.out_arcs[v])
              if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
                row[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] += Rat(1);
            for (int e : p.in_arcs[v])
              if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
                row[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] -= Rat(1);
          }
        } else {
          auto& row = new_base_row();
          for (int e : p.in_arcs[v])
            if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
              row[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] += Rat(1);
          for (int e : p.out_arcs[v])
            if (var_of_arc[static_cast<std::size_t>(e)] >= 0)
              row[static_cast<std::size_t>(var_of_arc[static_cast<std::size_t>(e)])] -= Rat(1);
          base_b[base_rows - 1] = Rat(1);
        }
      }
      for (int e : support) {
        auto& row = new_base_row();
        row[k + static_cast<std::size_t>(p.arcs[static_cast<std::size_t>(e)].head)] = Rat(1);
        add_rho(row, resolve(e), Rat(-1));
      }

      StagedSolver staged;
      if (!staged.set_base(base_A, base_b, base_rows, nvars)) continue;

      // distinct attainer forms per choice node
      std::vector<std::vector<RhoForm>> forms(choice_nodes.size());
      for (std::size_t c = 0; c < choice_nodes.size(); ++c) {
        for (int e : p.in_arcs[static_cast<std::size_t>(choice_nodes[c])]) {
          RhoForm f = resolve(e);
          bool dup = false;
          for (const RhoForm& g : forms[c])
            dup |= g.kind == f.kind && (f.kind == 0 || g.index == f.index);
          if (!dup) forms[c].push_back(f);
        }
      }

      const std::size_t rows = choice_nodes.size();
      std::vector<std::size_t> attainer(rows, 0);
      std::vector<Rat> x;
      for (;;) {
        ensure_shape(work_A, work_b, rows, nvars);
        for (std::size_t c = 0; c < rows; ++c) {
          auto& row = work_A[c];
          for (std::size_t j = 0; j < nvars; ++j) row[j] = Rat(0);
          work_b[c] = Rat(0);
          row[k + static_cast<std::size_t>(choice_nodes[c])] = Rat(1);
          add_rho(row, forms[c][attainer[c]], Rat(-1));
        }

        if (staged.solve(work_A, work_b, rows, x)) {
          ThinFlow tf;
          tf.arc_flow.assign(m, Rat(0));
          for (std::size_t s = 0; s < k; ++s)
            tf.arc_flow[static_cast<std::size_t>(support[s])] = x[s];
          tf.labels.assign(x.begin() + static_cast<long>(k), x.begin() + static_cast<long>(nvars));
          for (const TFSource& src : p.sources) {
            Rat net(0);
            for (int e : p.out_arcs[static_cast<std::size_t>(src.node)])
              net += tf.arc_flow[static_cast<std::size_t>(e)];
            for (int e : p.in_arcs[static_cast<std::size_t>(src.node)])
              net -= tf.arc_flow[static_cast<std::size_t>(e)];
            tf.splits.push_back(net);
          }
          if (check_thin_flow(p, tf).pass()) {
            std::string key;
            for (const Rat& r : tf.splits) key += r.str() + ";";
            for (const Rat& r : tf.arc_flow) key += r.str() + ";";
            for (const Rat& r : tf.labels) key += r.str() + ";";
            if (seen.insert(key).second) found.push_back(std::move(tf));
          }
        }

        std::size_t pos = 0;
        while (pos < rows) {
          if (++attainer[pos] < forms[pos].size()) break;
          attainer[pos] = 0;
          ++pos;
        }
        if (pos == rows) break;
      }
    }
  }
  return found;
}

}  // namespace nashflow
