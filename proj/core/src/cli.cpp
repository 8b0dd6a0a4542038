#include "tbsim/cli.hpp"

#include "tbsim/analysis.hpp"
#include "tbsim/config.hpp"
#include "tbsim/log_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <thread>

#ifndef TBSIM_VERSION_STRING
#define TBSIM_VERSION_STRING "0.0.0"
#endif

namespace tbsim {

using nlohmann::json;

namespace {

std::string phase_name(JumpPhase p) {
  switch (p) {
    case JumpPhase::Idle: return "Idle";
    case JumpPhase::TakeOff: return "TakeOff";
    case JumpPhase::Ballistic: return "Ballistic";
    case JumpPhase::TouchDown: return "TouchDown";
  }
  return "?";
}

UnifiedConfig config_for_log(const TrajectoryLog& log, const std::string& config_path) {
  if (!config_path.empty()) return load_config(config_path);
  if (!log.meta.config_json.empty()) {
    const json j = json::parse(log.meta.config_json);
    return config_from_json(j, default_config(), "<log metadata>");
  }
  return default_config();
}

json energy_report(const TrajectoryLog& log, const UnifiedConfig& cfg) {
  const EnergyBreakdown eb = energy_breakdown(log, cfg.robot, cfg.analysis);
  json j;
  j["t"] = eb.t;
  j["E_leg_J"] = eb.E_leg;
  j["E_thruster_J"] = eb.E_thruster;
  j["E_thruster_kgfm"] = eb.E_thruster_kgfm;
  j["per_phase"] = json::array();
  for (const auto& p : eb.per_phase)
    j["per_phase"].push_back({{"phase", phase_name(p.phase)},
                              {"t_begin", p.t_begin},
                              {"t_end", p.t_end},
                              {"leg_J", p.leg_J},
                              {"thruster_J", p.thruster_J}});
  const EnergyAudit ea = energy_audit(log, cfg.robot);
  j["audit"] = {{"dE_mech_J", ea.dE_mech},
                {"E_leg_work_J", ea.E_leg_work},
                {"E_thruster_work_J", ea.E_thruster_work},
                {"E_contact_work_J", ea.E_contact_work},
                {"residual_J", ea.residual},
                {"residual_rel", ea.residual_rel}};
  return j;
}

json tracking_report(const TrajectoryLog& log, const UnifiedConfig& cfg) {
  const TrackingStats ts = joint_tracking_stats(log, cfg.analysis);
  json j;
  j["groups"] = json::array();
  for (const auto& g : ts.groups)
    j["groups"].push_back({{"name", g.name},
                           {"mean_deg", g.mean_deg},
                           {"std_deg", g.std_deg},
                           {"window_t", g.window_t},
                           {"window_mean_deg", g.window_mean_deg},
                           {"window_std_deg", g.window_std_deg}});
  return j;
}

json steps_report(const TrajectoryLog& log, const UnifiedConfig& cfg) {
  json j;
  for (Side side : {Side::Left, Side::Right}) {
    const FootVectors fv = foot_displacement(log, cfg.robot, cfg.gait, side);
    const auto b = step_cycle_boundaries(log, side, cfg.analysis.cycle_hysteresis);
    json sj;
    sj["P_NB"] = {fv.P_NB.x(), fv.P_NB.y(), fv.P_NB.z()};
    sj["cycles"] = json::array();
    if (b.size() >= 2) {
      const auto est = extract_step_params(fv, b);
      double zt = 0, zb = 0, xf = 0, xh = 0;
      for (const auto& e : est) {
        sj["cycles"].push_back({{"t_begin", e.t_begin},
                                {"t_end", e.t_end},
                                {"z_top", e.z_top},
                                {"z_bottom", e.z_bottom},
                                {"x_fore", e.x_fore},
                                {"x_hind", e.x_hind}});
        zt += e.z_top;
        zb += e.z_bottom;
        xf += e.x_fore;
        xh += e.x_hind;
      }
      const double n = static_cast<double>(est.size());
      sj["mean"] = {{"z_top", zt / n}, {"z_bottom", zb / n}, {"x_fore", xf / n}, {"x_hind", xh / n}};
    }
    j[side == Side::Left ? "left" : "right"] = sj;
  }
  return j;
}

json limit_cycle_json(const LimitCycleReport& r) {
  return {{"coordinate", r.coordinate},
          {"cycles", r.cycles},
          {"pos_min", r.pos_min},
          {"pos_max", r.pos_max},
          {"vel_min", r.vel_min},
          {"vel_max", r.vel_max},
          {"cycle_max", r.cycle_max},
          {"cycle_min", r.cycle_min},
          {"extrema_std", r.extrema_std},
          {"closure_score", r.closure_score},
          {"bounded", r.bounded}};
}

json limit_cycles_report(const TrajectoryLog& log, const UnifiedConfig& cfg) {
  json j;
  try {
    j["x"] = limit_cycle_json(limit_cycle_metrics(log, "pb_x[m]", "d_pb_x[m/s]", cfg.analysis));
  } catch (const InsufficientData& e) {
    j["x"] = {{"error", e.what()}};
  }
  try {
    j["z"] = limit_cycle_json(limit_cycle_metrics(log, "pb_z[m]", "d_pb_z[m/s]", cfg.analysis));
  } catch (const InsufficientData& e) {
    j["z"] = {{"error", e.what()}};
  }
  return j;
}

json accel_report(const TrajectoryLog& log, const UnifiedConfig& cfg) {
  const AccelDecomposition ad = acceleration_decomposition(log, cfg.robot, cfg.analysis);
  json j;
  j["t"] = ad.t;
  j["a_tot"] = ad.a_tot;
  j["a_uth"] = ad.a_uth;
  j["a_l"] = ad.a_l;
  j["a_g"] = ad.a_g;
  return j;
}

json phases_json(const TrajectoryLog& log) {
  json j = json::array();
  for (const auto& p : phase_segmentation(log))
    j.push_back({{"phase", phase_name(p.phase)},
                 {"t_begin", p.t_begin},
                 {"t_end", p.t_end},
                 {"duration", p.t_end - p.t_begin}});
  return j;
}

json analyze_log(const TrajectoryLog& log, const UnifiedConfig& cfg, const std::string& report) {
  json out;
  out["meta"] = {{"scenario", log.meta.scenario},
                 {"config_hash", log.meta.config_hash},
                 {"tool_version", TBSIM_VERSION_STRING},
                 {"report", report},
                 {"rows", log.size()},
                 {"sample_rate_hz", log.meta.sample_rate}};
  if (report == "energy" || report == "all") out["energy"] = energy_report(log, cfg);
  if (report == "tracking" || report == "all") out["tracking"] = tracking_report(log, cfg);
  if (report == "steps" || report == "all") out["steps"] = steps_report(log, cfg);
  if (report == "limit-cycles" || report == "all")
    out["limit_cycles"] = limit_cycles_report(log, cfg);
  if (report == "accel" || report == "all") out["accel"] = accel_report(log, cfg);
  if (report == "all") out["phases"] = phases_json(log);
  return out;
}

void write_plot_csvs(const TrajectoryLog& log, const UnifiedConfig& cfg, const json& rep,
                     const std::string& dir) {
  auto open = [&](const std::string& name) {
    std::ofstream f(dir + "/" + name);
    if (!f) throw IoError("cannot open '" + dir + "/" + name + "' for writing");
    return f;
  };
  if (rep.contains("energy")) {
    auto f = open("energy.csv");
    f << "t[s],E_leg[J],E_thruster[J],E_thruster[kgfm]\n";
    const auto& e = rep["energy"];
    for (std::size_t i = 0; i < e["t"].size(); ++i)
      f << e["t"][i].get<double>() << "," << e["E_leg_J"][i].get<double>() << ","
        << e["E_thruster_J"][i].get<double>() << "," << e["E_thruster_kgfm"][i].get<double>()
        << "\n";
  }
  if (rep.contains("accel")) {
    auto f = open("accel.csv");
    f << "t[s],a_tot[m/s2],a_uth[m/s2],a_l[m/s2],a_g[m/s2]\n";
    const auto& a = rep["accel"];
    for (std::size_t i = 0; i < a["t"].size(); ++i)
      f << a["t"][i].get<double>() << "," << a["a_tot"][i].get<double>() << ","
        << a["a_uth"][i].get<double>() << "," << a["a_l"][i].get<double>() << ","
        << a["a_g"][i].get<double>() << "\n";
  }
  if (rep.contains("limit_cycles")) {
    for (const char* coordpair : {"x", "z"}) {
      const std::string pos = std::string("pb_") + coordpair + "[m]";
      const std::string vel = std::string("d_pb_") + coordpair + "[m/s]";
      auto f = open(std::string("phase_portrait_") + coordpair + ".csv");
      f << "position[m],velocity[m/s]\n";
      const auto p = log.series(pos);
      const auto v = log.series(vel);
      for (std::size_t i = 0; i < p.size(); ++i) f << p[i] << "," << v[i] << "\n";
    }
  }
  (void)cfg;
}

// Recursive numeric diff of two analysis documents.
void diff_json(const json& a, const json& b, const std::string& path, json& details,
               double& max_abs, double& max_rel, std::size_t& count) {
  if (a.is_object() && b.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k)) {
        details.push_back({{"path", path + k}, {"note", "missing in B"}});
        continue;
      }
      diff_json(v, b.at(k), path + k + ".", details, max_abs, max_rel, count);
    }
    for (const auto& [k, v] : b.items())
      if (!a.contains(k)) details.push_back({{"path", path + k}, {"note", "missing in A"}});
    return;
  }
  if (a.is_array() && b.is_array()) {
    if (a.size() != b.size()) {
      details.push_back({{"path", path}, {"note", "array size mismatch"},
                         {"a", a.size()}, {"b", b.size()}});
      return;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
      diff_json(a[i], b[i], path + std::to_string(i) + ".", details, max_abs, max_rel, count);
    return;
  }
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    const double ad = std::abs(x - y);
    const double rd = ad / std::max({1e-12, std::abs(x), std::abs(y)});
    ++count;
    if (ad > max_abs) max_abs = ad;
    if (rd > max_rel) max_rel = rd;
    if (ad > 0 && details.size() < 200)
      details.push_back({{"path", path}, {"a", x}, {"b", y}, {"abs", ad}, {"rel", rd}});
    return;
  }
  if (a != b) details.push_back({{"path", path}, {"a", a}, {"b", b}});
}

int simulate_cmd(const std::string& config_path, const std::string& scenario_name_arg,
                 const std::string& out_path, int runs) {
  const Scenario scenario = scenario_from_name(scenario_name_arg);
  UnifiedConfig cfg = scenario_config(scenario);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError(config_path, "<file>", "cannot open config file");
    json j = json::parse(in, nullptr, true, true);
    cfg = config_from_json(j, cfg, config_path);
  }

  auto one_run = [&](std::uint64_t seed, const std::string& path) {
    UnifiedConfig c = cfg;
    c.sim.seed = seed;
    const TrajectoryLog log = run_scenario(c, scenario);
    write_log(path, log);
    return log.meta.failure;
  };

  if (runs <= 1) {
    const std::string failure = one_run(cfg.sim.seed, out_path);
    if (!failure.empty()) {
      std::cerr << "simulation terminated early: " << failure << "\n";
      return 2;
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  // Batch fan-out of independent seeds; SIM_THREADS caps parallelism.
  std::size_t max_threads = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("SIM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) max_threads = static_cast<std::size_t>(v);
  }
  std::string stem = out_path;
  const auto dot = stem.rfind(".csv");
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  int rc = 0;
  for (int base = 0; base < runs; base += static_cast<int>(max_threads)) {
    std::vector<std::future<std::string>> futs;
    for (int i = base; i < std::min(runs, base + static_cast<int>(max_threads)); ++i)
      futs.push_back(std::async(std::launch::async, one_run, cfg.sim.seed + std::uint64_t(i),
                                stem + "." + std::to_string(i) + ".csv"));
    for (auto& f : futs)
      if (!f.get().empty()) rc = 2;
  }
  if (rc == 0) std::cout << "wrote " << runs << " logs to " << stem << ".*.csv\n";
  return rc;
}

}  // namespace

std::string tool_version() { return TBSIM_VERSION_STRING; }

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"tbsim: thruster-assisted point-foot biped simulator and analysis toolkit"};
  app.set_version_flag("--version", TBSIM_VERSION_STRING);
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run a scenario and write a trajectory log");
  std::string sim_config, sim_scenario = "trot", sim_out = "out.csv";
  int sim_runs = 1;
  sim_cmd->add_option("--config", sim_config, "JSON config overlaying the scenario preset");
  sim_cmd->add_option("--scenario", sim_scenario, "trot|jump|drop")->required();
  sim_cmd->add_option("--out", sim_out, "output CSV path")->required();
  sim_cmd->add_option("--runs", sim_runs, "batch: number of seeds (parallel, SIM_THREADS cap)");

  // analyze
  auto* an_cmd = app.add_subcommand("analyze", "compute analysis reports from a trajectory log");
  std::string an_log, an_report = "all", an_out, an_config, an_csv_dir;
  an_cmd->add_option("--log", an_log, "trajectory CSV")->required();
  an_cmd->add_option("--report", an_report, "energy|tracking|steps|limit-cycles|accel|all");
  an_cmd->add_option("--out", an_out, "output JSON path (stdout when omitted)");
  an_cmd->add_option("--config", an_config, "config override (default: embedded in the log)");
  an_cmd->add_option("--csv-dir", an_csv_dir, "also write plot-ready CSV series here");
  bool an_paper_sign = false;
  an_cmd->add_flag("--paper-sign", an_paper_sign, "flip reported signs to match the figures");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "diff analysis outputs of two logs");
  std::vector<std::string> cmp_logs;
  std::string cmp_report = "all", cmp_out;
  cmp_cmd->add_option("--log", cmp_logs, "log (give twice: --log A --log B)")->required();
  cmp_cmd->add_option("--report", cmp_report, "report to compare");
  cmp_cmd->add_option("--out", cmp_out, "output JSON path (stdout when omitted)");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "schema-check a config file");
  std::string val_config;
  val_cmd->add_option("--config", val_config, "JSON config")->required();

  std::vector<const char*> argv;
  argv.push_back("tbsim");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*val_cmd) {
      const UnifiedConfig cfg = load_config(val_config);
      std::cout << "config OK (hash " << config_hash(cfg) << ")\n";
      return 0;
    }
    if (*sim_cmd) return simulate_cmd(sim_config, sim_scenario, sim_out, sim_runs);
    if (*an_cmd) {
      static const std::set<std::string> kReports{"energy", "tracking", "steps",
                                                  "limit-cycles", "accel", "all"};
      if (!kReports.count(an_report))
        throw ConfigError("<args>", "report", "unknown report '" + an_report + "'");
      const TrajectoryLog log = read_log(an_log);
      UnifiedConfig cfg = config_for_log(log, an_config);
      if (an_paper_sign) cfg.analysis.paper_sign = true;
      const json rep = analyze_log(log, cfg, an_report);
      if (!an_csv_dir.empty()) write_plot_csvs(log, cfg, rep, an_csv_dir);
      if (an_out.empty()) {
        std::cout << rep.dump(2) << "\n";
      } else {
        std::ofstream out(an_out);
        if (!out) throw IoError("cannot open '" + an_out + "' for writing");
        out << rep.dump(2) << "\n";
        std::cout << "wrote " << an_out << "\n";
      }
      return 0;
    }
    if (*cmp_cmd) {
      if (cmp_logs.size() != 2)
        throw ConfigError("<args>", "log", "compare needs exactly two logs (--log A --log B)");
      const TrajectoryLog la = read_log(cmp_logs[0]);
      const TrajectoryLog lb = read_log(cmp_logs[1]);
      const UnifiedConfig ca = config_for_log(la, "");
      const UnifiedConfig cb = config_for_log(lb, "");
      const json ra = analyze_log(la, ca, cmp_report);
      const json rb = analyze_log(lb, cb, cmp_report);
      json details = json::array();
      double max_abs = 0, max_rel = 0;
      std::size_t count = 0;
      diff_json(ra, rb, "", details, max_abs, max_rel, count);
      json out = {{"summary",
                   {{"max_abs_diff", max_abs}, {"max_rel_diff", max_rel},
                    {"fields_compared", count}}},
                  {"details", details}};
      if (cmp_out.empty()) {
        std::cout << out.dump(2) << "\n";
      } else {
        std::ofstream f(cmp_out);
        if (!f) throw IoError("cannot open '" + cmp_out + "' for writing");
        f << out.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SimError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int cli_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args);
}

}  // namespace tbsim
