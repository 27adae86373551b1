#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nashflow/network.hpp"
#include "nashflow/piecewise.hpp"
#include "nashflow/profile.hpp"
#include "nashflow/super_sink.hpp"
#include "nashflow/thin_flow.hpp"

namespace nashflow {

struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

inline Rat rat_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rat(static_cast<long>(j.get<long long>()));
  if (j.is_string()) {
    try {
      return Rat::parse(j.get<std::string>());
    } catch (const std::domain_error& e) {
      throw InputError(e.what());
    }
  }
  throw InputError("expected rational as \"p/q\" string or integer, got " + j.dump());
}

inline std::string id_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw InputError("expected id as string or integer, got " + j.dump());
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field \"") + key + "\" in " + j.dump());
  return *it;
}

// --------------------------------------------------------------------------
// Instance
// --------------------------------------------------------------------------

inline Instance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("instance: expected a JSON object");
  Instance inst;
  for (const auto& n : field(j, "nodes")) inst.nodes.push_back(id_from_json(n));
  for (const auto& a : field(j, "arcs"))
    inst.arcs.push_back({id_from_json(field(a, "id")), id_from_json(field(a, "tail")),
                         id_from_json(field(a, "head")), rat_from_json(field(a, "transit")),
                         rat_from_json(field(a, "capacity"))});
  for (const auto& s : field(j, "sources"))
    inst.sources.push_back({id_from_json(field(s, "node")), rat_from_json(field(s, "rate"))});
  for (const auto& t : field(j, "sinks"))
    inst.sinks.push_back({id_from_json(field(t, "node")), rat_from_json(field(t, "demand"))});
  return inst;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["nodes"] = inst.nodes;
  j["arcs"] = nlohmann::json::array();
  for (const Arc& a : inst.arcs)
    j["arcs"].push_back({{"id", a.id},
                         {"tail", a.tail},
                         {"head", a.head},
                         {"transit", a.transit.str()},
                         {"capacity", a.capacity.str()}});
  j["sources"] = nlohmann::json::array();
  for (const Source& s : inst.sources)
    j["sources"].push_back({{"node", s.node}, {"rate", s.rate.str()}});
  j["sinks"] = nlohmann::json::array();
  for (const SinkDemand& t : inst.sinks)
    j["sinks"].push_back({{"node", t.node}, {"demand", t.demand.str()}});
  return j;
}

// --------------------------------------------------------------------------
// Thin flow problems and solutions
// --------------------------------------------------------------------------

inline ThinFlowProblem thin_flow_problem_from_json(const nlohmann::json& j) {
  ThinFlowProblem p;
  for (const auto& n : field(j, "nodes")) p.nodes.push_back(id_from_json(n));
  auto node_idx = [&](const std::string& id) {
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
      if (p.nodes[i] == id) return static_cast<int>(i);
    throw InputError("thin flow problem references unknown node " + id);
  };
  for (const auto& a : field(j, "arcs")) {
    TFArc arc;
    arc.id = id_from_json(field(a, "id"));
    arc.tail = node_idx(id_from_json(field(a, "tail")));
    arc.head = node_idx(id_from_json(field(a, "head")));
    arc.capacity = rat_from_json(field(a, "capacity"));
    arc.resetting = a.value("resetting", false);
    p.arcs.push_back(std::move(arc));
  }
  for (const auto& s : field(j, "sources"))
    p.sources.push_back({node_idx(id_from_json(field(s, "node"))), rat_from_json(field(s, "rate"))});
  p.sink = node_idx(id_from_json(field(j, "sink")));
  p.finalize();
  auto problems = p.validate();
  if (!problems.empty()) throw InputError("invalid thin flow problem: " + problems.front());
  return p;
}

inline nlohmann::json thin_flow_to_json(const ThinFlowProblem& p, const ThinFlow& tf) {
  nlohmann::json j;
  j["splits"] = nlohmann::json::object();
  for (std::size_t i = 0; i < p.sources.size(); ++i)
    j["splits"][p.nodes[static_cast<std::size_t>(p.sources[i].node)]] = tf.splits[i].str();
  j["flows"] = nlohmann::json::object();
  for (std::size_t e = 0; e < p.arcs.size(); ++e) j["flows"][p.arcs[e].id] = tf.arc_flow[e].str();
  j["labels"] = nlohmann::json::object();
  for (std::size_t v = 0; v < p.nodes.size(); ++v) j["labels"][p.nodes[v]] = tf.labels[v].str();
  return j;
}

// --------------------------------------------------------------------------
// Step functions (for exports)
// --------------------------------------------------------------------------

inline nlohmann::json step_to_json(const StepFunction& f) {
  nlohmann::json j;
  j["cuts"] = nlohmann::json::array();
  for (const Rat& c : f.cuts) j["cuts"].push_back(c.str());
  j["values"] = nlohmann::json::array();
  for (const Rat& v : f.vals) j["values"].push_back(v.str());
  j["tail"] = f.tail.str();
  return j;
}

// --------------------------------------------------------------------------
// Profiles
// --------------------------------------------------------------------------

inline nlohmann::json profile_to_json(const NashFlowProfile& p) {
  const ValidatedInstance& g = p.ext.graph;
  nlohmann::json j;
  j["format"] = "nashflow-profile-v1";
  j["instance"] = instance_to_json(p.ext.base.raw());
  nlohmann::json extj;
  extj["super_sink"] = p.ext.super_sink;
  extj["sigma"] = p.ext.sigma_value.str();
  extj["sink_arcs"] = nlohmann::json::array();
  for (std::size_t jdx = 0; jdx < p.ext.sink_arc_ids.size(); ++jdx) {
    const Arc& a = g.arc(static_cast<std::size_t>(p.ext.sink_arc_index[jdx]));
    extj["sink_arcs"].push_back({{"id", a.id},
                                 {"sink", a.tail},
                                 {"transit", a.transit.str()},
                                 {"capacity", a.capacity.str()}});
  }
  j["extension"] = std::move(extj);
  j["steady_state"] = p.steady_state;
  j["horizon"] = p.horizon.str();
  j["phases"] = nlohmann::json::array();
  for (const Phase& ph : p.phases) {
    nlohmann::json pj;
    pj["phi_start"] = ph.phi_start.str();
    pj["phi_end"] = ph.phi_end.str();
    pj["active"] = nlohmann::json::array();
    pj["resetting"] = nlohmann::json::array();
    for (std::size_t e = 0; e < g.arc_count(); ++e) {
      if (ph.active[e]) pj["active"].push_back(g.arc(e).id);
      if (ph.resetting[e]) pj["resetting"].push_back(g.arc(e).id);
    }
    pj["labels_start"] = nlohmann::json::object();
    pj["label_slopes"] = nlohmann::json::object();
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      pj["labels_start"][g.node(v)] = ph.labels_start[v].str();
      pj["label_slopes"][g.node(v)] = ph.label_slope[v].str();
    }
    pj["splits"] = nlohmann::json::object();
    for (std::size_t i = 0; i < g.raw().sources.size(); ++i)
      pj["splits"][g.raw().sources[i].node] = ph.splits[i].str();
    pj["flows"] = nlohmann::json::object();
    for (std::size_t e = 0; e < g.arc_count(); ++e)
      if (ph.flow[e].sign() != 0) pj["flows"][g.arc(e).id] = ph.flow[e].str();
    pj["events"] = nlohmann::json::array();
    for (const PhaseEvent& ev : ph.events) {
      nlohmann::json ej;
      ej["type"] = phase_event_name(ev.type);
      if (!ev.arc.empty()) ej["arc"] = ev.arc;
      pj["events"].push_back(std::move(ej));
    }
    j["phases"].push_back(std::move(pj));
  }
  return j;
}

inline NashFlowProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "nashflow-profile-v1")
    throw InputError("not a nashflow profile file");
  Instance inst = instance_from_json(field(j, "instance"));
  ValidationResult vr = validate_instance(inst);
  if (!vr.ok())
    throw InputError("profile instance invalid: " +
                     std::string(violation_kind_name(vr.violations.front().kind)) + " " +
                     vr.violations.front().subject);
  NashFlowProfile p;
  p.ext = build_extended_graph(*vr.instance);
  const ValidatedInstance& g = p.ext.graph;

  const nlohmann::json& extj = field(j, "extension");
  bool ext_ok = extj.value("super_sink", "") == p.ext.super_sink &&
                rat_from_json(field(extj, "sigma")) == p.ext.sigma_value;
  const nlohmann::json& sarcs = field(extj, "sink_arcs");
  ext_ok = ext_ok && sarcs.size() == p.ext.sink_arc_ids.size();
  if (ext_ok) {
    for (std::size_t jdx = 0; jdx < p.ext.sink_arc_ids.size(); ++jdx) {
      const Arc& a = g.arc(static_cast<std::size_t>(p.ext.sink_arc_index[jdx]));
      const nlohmann::json& sj = sarcs[jdx];
      ext_ok = ext_ok && id_from_json(field(sj, "id")) == a.id &&
               id_from_json(field(sj, "sink")) == a.tail &&
               rat_from_json(field(sj, "transit")) == a.transit &&
               rat_from_json(field(sj, "capacity")) == a.capacity;
    }
  }
  if (!ext_ok) throw InputError("profile extension block does not match the instance");

  for (const auto& pj : field(j, "phases")) {
    Phase ph;
    ph.phi_start = rat_from_json(field(pj, "phi_start"));
    std::string end = field(pj, "phi_end").get<std::string>();
    ph.phi_end = end == "inf" ? ExtRat::infinity() : ExtRat(Rat::parse(end));
    ph.active.assign(g.arc_count(), 0);
    ph.resetting.assign(g.arc_count(), 0);
    for (const auto& id : field(pj, "active"))
      ph.active[static_cast<std::size_t>(g.arc_index(id_from_json(id)))] = 1;
    for (const auto& id : field(pj, "resetting"))
      ph.resetting[static_cast<std::size_t>(g.arc_index(id_from_json(id)))] = 1;
    ph.labels_start.assign(g.node_count(), Rat(0));
    ph.label_slope.assign(g.node_count(), Rat(0));
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      ph.labels_start[v] = rat_from_json(field(field(pj, "labels_start"), g.node(v).c_str()));
      ph.label_slope[v] = rat_from_json(field(field(pj, "label_slopes"), g.node(v).c_str()));
    }
    ph.splits.assign(g.raw().sources.size(), Rat(0));
    for (std::size_t i = 0; i < g.raw().sources.size(); ++i)
      ph.splits[i] = rat_from_json(field(field(pj, "splits"), g.raw().sources[i].node.c_str()));
    ph.flow.assign(g.arc_count(), Rat(0));
    for (const auto& [key, value] : field(pj, "flows").items())
      ph.flow[static_cast<std::size_t>(g.arc_index(key))] = rat_from_json(value);
    for (const auto& ej : field(pj, "events")) {
      std::string type = field(ej, "type").get<std::string>();
      PhaseEvent ev;
      if (type == "queue_depleted") ev.type = PhaseEvent::Type::QueueDepleted;
      else if (type == "arc_became_active") ev.type = PhaseEvent::Type::ArcBecameActive;
      else if (type == "horizon") ev.type = PhaseEvent::Type::Horizon;
      else throw InputError("unknown event type " + type);
      ev.arc = ej.value("arc", "");
      ph.events.push_back(std::move(ev));
    }
    if (!p.phases.empty()) {
      const ExtRat& prev = p.phases.back().phi_end;
      if (!prev.is_finite() || prev.value() != ph.phi_start)
        throw InputError("phases are not contiguous in particle space");
    } else if (ph.phi_start != Rat(0)) {
      throw InputError("first phase must start at phi = 0");
    }
    if (ph.phi_end.is_finite() && ph.phi_end.value() <= ph.phi_start)
      throw InputError("phase with nonpositive length");
    p.phases.push_back(std::move(ph));
  }
  if (p.phases.empty()) throw InputError("profile without phases");
  p.steady_state = !p.phases.back().phi_end.is_finite();
  if (j.value("steady_state", p.steady_state) != p.steady_state)
    throw InputError("steady_state flag contradicts the phases");
  p.rebuild_functions();
  if (field(j, "horizon").get<std::string>() != p.horizon.str())
    throw InputError("horizon field contradicts the phases");
  return p;
}

}  // namespace nashflow
