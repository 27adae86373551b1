// Command-line front end: instance validation, thin-flow solving, Nash flow
// construction with certification, profile checking, per-sink decomposition,
// and plot-data export.
//
// Exit codes: 0 success, 1 verification failure, 2 input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nashflow/nashflow.hpp"

namespace nf = nashflow;

namespace {

int log_level() {
  static int level = [] {
    const char* env = std::getenv("NASHFLOW_LOG");
    if (!env) return 0;
    std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[nashflow] " << msg << "\n";
}

struct RunConfig {
  std::string instance_path;
  std::string out_path;
  std::string phi_max = "1000";
  std::size_t phase_cap = 10000;
  std::string format = "json";
  bool keep_super_sink = false;
  std::optional<std::uint64_t> seed;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nf::InputError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw nf::InputError(path + ": " + e.what());
  }
}

void write_text(const RunConfig& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(cfg.out_path);
  if (!out) throw nf::InputError("cannot write " + cfg.out_path);
  out << text;
  log_info("wrote " + cfg.out_path);
}

void write_json(const RunConfig& cfg, const nlohmann::json& j) { write_text(cfg, j.dump(2) + "\n"); }

nf::ExtRat parse_phi_max(const std::string& s) {
  if (s == "inf") return nf::ExtRat::infinity();
  try {
    return nf::ExtRat(nf::Rat::parse(s));
  } catch (const std::domain_error& e) {
    throw nf::InputError(std::string("--phi-max: ") + e.what());
  }
}

nf::Instance load_instance(const RunConfig& cfg) {
  if (!cfg.instance_path.empty()) return nf::instance_from_json(load_json(cfg.instance_path));
  if (cfg.seed) {
    nf::GeneratorParams params;
    params.nodes = 5;
    params.extra_arcs = 4;
    params.sources = 2;
    params.sinks = 2;
    log_info("generating random instance from seed " + std::to_string(*cfg.seed));
    return nf::generate_random_instance(*cfg.seed, params);
  }
  throw nf::InputError("no input: pass --instance FILE or --seed N");
}

nf::ValidatedInstance validated_or_die(const nf::Instance& inst) {
  nf::ValidationResult vr = nf::validate_instance(inst);
  if (!vr.ok()) {
    std::ostringstream os;
    for (const auto& v : vr.violations)
      os << nf::violation_kind_name(v.kind) << " " << v.subject << ": " << v.detail << "\n";
    throw nf::InputError("instance invalid:\n" + os.str());
  }
  return *vr.instance;
}

nf::BuildResult solve_from_config(const RunConfig& cfg) {
  nf::ExtendedInstance ext = nf::build_extended_graph(validated_or_die(load_instance(cfg)));
  log_info("solving (phi_max=" + cfg.phi_max + ", phase_cap=" + std::to_string(cfg.phase_cap) + ")");
  nf::BuildResult run =
      nf::construct_nash_flow(ext, parse_phi_max(cfg.phi_max), cfg.phase_cap, true);
  log_info("status: " + std::string(nf::build_status_name(run.status)) + ", phases: " +
           std::to_string(run.profile.phases.size()));
  return run;
}

// Accepts either a profile file (written by `solve`) or an instance file, in
// which case the profile is constructed first.
nf::NashFlowProfile load_profile(const RunConfig& cfg) {
  if (!cfg.instance_path.empty()) {
    nlohmann::json j = load_json(cfg.instance_path);
    if (j.is_object() && j.value("format", "") == "nashflow-profile-v1")
      return nf::profile_from_json(j);
  }
  return solve_from_config(cfg).profile;
}

// ---------------------------------------------------------------------------
// export tables
// ---------------------------------------------------------------------------

struct TableRow {
  std::string function;
  std::string kind;  // point | slope | piece | tail
  nf::Rat x;
  nf::Rat value;
};

void add_pl_rows(std::vector<TableRow>& rows, const std::string& name,
                 const nf::PiecewiseLinear& f) {
  for (std::size_t i = 0; i < f.xs.size(); ++i) rows.push_back({name, "point", f.xs[i], f.ys[i]});
  rows.push_back({name, "slope", f.xs.back(), f.final_slope});
}

void add_step_rows(std::vector<TableRow>& rows, const std::string& name,
                   const nf::StepFunction& f) {
  for (std::size_t i = 0; i < f.vals.size(); ++i)
    rows.push_back({name, "piece", f.cuts[i], f.vals[i]});
  rows.push_back({name, "tail", f.cuts.back(), f.tail});
}

std::vector<TableRow> profile_tables(const nf::NashFlowProfile& p, bool keep_super_sink) {
  const nf::ValidatedInstance& g = p.ext.graph;
  std::vector<TableRow> rows;
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (!keep_super_sink && !p.ext.is_original_node(v)) continue;
    add_pl_rows(rows, "l[" + g.node(v) + "]", p.labels[v]);
  }
  nf::EmittedRates rates = nf::inflow_functions(p);
  auto outs = nf::outflow_functions(p);
  for (std::size_t e = 0; e < g.arc_count(); ++e) {
    if (!keep_super_sink && !p.ext.is_original_arc(e)) continue;
    add_pl_rows(rows, "x[" + g.arc(e).id + "]", p.arc_cumulative[e]);
    add_step_rows(rows, "f_in[" + g.arc(e).id + "]", rates.arc_inflow[e]);
    add_step_rows(rows, "f_out[" + g.arc(e).id + "]", outs[e]);
  }
  for (std::size_t i = 0; i < g.raw().sources.size(); ++i) {
    add_pl_rows(rows, "x_i[" + g.raw().sources[i].node + "]", p.source_cumulative[i]);
    add_step_rows(rows, "f_i[" + g.raw().sources[i].node + "]", rates.source_dist[i]);
  }
  return rows;
}

std::string rows_to_csv(const std::vector<TableRow>& rows) {
  std::ostringstream os;
  os << "function,kind,point,value,value_approx\n";
  for (const auto& r : rows)
    os << r.function << "," << r.kind << "," << r.x.str() << "," << r.value.str() << ","
       << r.value.approx() << "\n";
  return os.str();
}

nlohmann::json rows_to_json(const std::vector<TableRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"function", r.function},
                 {"kind", r.kind},
                 {"point", r.x.str()},
                 {"value", r.value.str()},
                 {"value_approx", r.value.approx()}});
  return j;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg) {
  nf::Instance inst = load_instance(cfg);
  nf::ValidationResult vr = nf::validate_instance(inst);
  if (vr.ok()) {
    std::cout << "valid: " << inst.nodes.size() << " nodes, " << inst.arcs.size() << " arcs, "
              << inst.sources.size() << " sources, " << inst.sinks.size() << " sinks\n";
    return 0;
  }
  for (const auto& v : vr.violations)
    std::cout << nf::violation_kind_name(v.kind) << " " << v.subject << ": " << v.detail << "\n";
  return 1;
}

int cmd_thin_flow(const RunConfig& cfg) {
  if (cfg.instance_path.empty()) throw nf::InputError("thin-flow needs --instance FILE");
  nf::ThinFlowProblem p = nf::thin_flow_problem_from_json(load_json(cfg.instance_path));
  nf::ThinFlow tf = nf::solve_thin_flow(p);
  write_json(cfg, nf::thin_flow_to_json(p, tf));
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  nf::BuildResult run = solve_from_config(cfg);
  nlohmann::json j = nf::profile_to_json(run.profile);
  j["status"] = nf::build_status_name(run.status);
  write_json(cfg, j);
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  if (cfg.instance_path.empty()) throw nf::InputError("check needs --instance PROFILE_FILE");
  nf::NashFlowProfile p = nf::profile_from_json(load_json(cfg.instance_path));
  nf::NashCertificate cert = nf::verify_nash(p);
  std::cout << cert.to_string();
  if (cert.pass()) std::cout << "\n";
  return cert.pass() ? 0 : 1;
}

int cmd_decompose(const RunConfig& cfg) {
  nf::NashFlowProfile p = load_profile(cfg);
  auto subs = nf::subflow_functions(p);
  nf::SubflowCertificate cert = nf::check_subflow_decomposition(p, subs);
  if (!cert.pass()) {
    std::cout << cert.to_string();
    return 1;
  }
  nlohmann::json j;
  j["format"] = "nashflow-subflows-v1";
  j["sinks"] = nlohmann::json::array();
  const auto& g = p.ext.graph;
  for (const auto& sub : subs) {
    nlohmann::json sj;
    sj["sink"] = sub.sink_node;
    sj["demand"] = p.ext.base.raw().sinks[sub.sink].demand.str();
    sj["phase_flows"] = nlohmann::json::array();
    for (const auto& flows : sub.phase_flows) {
      nlohmann::json fj = nlohmann::json::object();
      for (std::size_t e = 0; e < flows.size(); ++e)
        if (flows[e].sign() != 0) fj[g.arc(e).id] = flows[e].str();
      sj["phase_flows"].push_back(std::move(fj));
    }
    sj["rates"] = nlohmann::json::object();
    for (std::size_t e = 0; e < sub.rate.size(); ++e)
      sj["rates"][g.arc(e).id] = nf::step_to_json(sub.rate[e]);
    sj["source_dist"] = nlohmann::json::object();
    for (std::size_t i = 0; i < sub.source_dist.size(); ++i)
      sj["source_dist"][g.raw().sources[i].node] = nf::step_to_json(sub.source_dist[i]);
    j["sinks"].push_back(std::move(sj));
  }
  write_json(cfg, j);
  return 0;
}

int cmd_export(const RunConfig& cfg) {
  nf::NashFlowProfile p = load_profile(cfg);
  auto rows = profile_tables(p, cfg.keep_super_sink);
  if (cfg.format == "csv")
    write_text(cfg, rows_to_csv(rows));
  else
    write_json(cfg, rows_to_json(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nash flows over time in fluid queuing networks"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub, bool io = true) {
    sub->add_option("--instance", cfg.instance_path, "input file (JSON)");
    if (io) sub->add_option("--out", cfg.out_path, "output file (default: stdout)");
    sub->add_option("--seed", cfg.seed, "generate a random instance instead of reading one");
  };

  CLI::App* validate = app.add_subcommand("validate", "check instance invariants");
  add_common(validate, false);

  CLI::App* thin = app.add_subcommand("thin-flow", "solve one thin flow problem");
  add_common(thin);

  CLI::App* solve = app.add_subcommand("solve", "construct and certify a Nash flow over time");
  add_common(solve);
  solve->add_option("--phi-max", cfg.phi_max, "particle horizon (rational or 'inf')");
  solve->add_option("--phase-cap", cfg.phase_cap, "maximum number of phases");

  CLI::App* check = app.add_subcommand("check", "certify a profile file");
  add_common(check, false);

  CLI::App* decompose = app.add_subcommand("decompose", "per-sink sub-flow decomposition");
  add_common(decompose);
  decompose->add_option("--phi-max", cfg.phi_max, "particle horizon when solving an instance");
  decompose->add_option("--phase-cap", cfg.phase_cap, "maximum number of phases");

  CLI::App* exp = app.add_subcommand("export", "breakpoint tables for plotting");
  add_common(exp);
  exp->add_option("--phi-max", cfg.phi_max, "particle horizon when solving an instance");
  exp->add_option("--phase-cap", cfg.phase_cap, "maximum number of phases");
  exp->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  exp->add_flag("--keep-super-sink", cfg.keep_super_sink,
                "include the super sink and its arcs in exports");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(cfg);
    if (thin->parsed()) return cmd_thin_flow(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (decompose->parsed()) return cmd_decompose(cfg);
    if (exp->parsed()) return cmd_export(cfg);
  } catch (const nf::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const nf::CertificationFailed& e) {
    std::cerr << "certification failed:\n" << e.certificate.to_string();
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
