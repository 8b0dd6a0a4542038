#include "tbsim/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#ifndef TBSIM_VERSION_STRING
#define TBSIM_VERSION_STRING "0.0.0"
#endif

namespace tbsim {

using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec6_to_json(const Vec6& v) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}
json mat3_to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}
json knots_to_json(const std::vector<std::pair<double, double>>& k) {
  json a = json::array();
  for (const auto& [t, v] : k) a.push_back(json::array({t, v}));
  return a;
}

Vec3 vec3_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError("<config>", path, "expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}
Vec6 vec6_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 6)
    throw ConfigError("<config>", path, "expected an array of 6 numbers");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}
Mat3 mat3_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError("<config>", path, "expected a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 3)
      throw ConfigError("<config>", path, "expected a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}
std::vector<std::pair<double, double>> knots_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("<config>", path, "expected an array of [t, value] pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw ConfigError("<config>", path, "expected [t, value] pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

// Recursive overlay with unknown-key rejection and object/value shape checks.
json merge_checked(const json& base, const json& user, const std::string& where,
                   const std::string& path) {
  if (base.is_object()) {
    if (!user.is_object())
      throw ConfigError(where, path.empty() ? "<root>" : path, "expected an object");
    json out = base;
    for (const auto& [k, v] : user.items()) {
      if (!base.contains(k)) throw ConfigError(where, path + k, "unknown key");
      out[k] = merge_checked(base.at(k), v, where, path + k + ".");
    }
    return out;
  }
  if (base.is_object() != user.is_object())
    throw ConfigError(where, path, "type mismatch");
  return user;
}

}  // namespace

void UnifiedConfig::validate(const std::string& where) const {
  if (version != kConfigVersion)
    throw ConfigError(where, "version",
                      "config version " + std::to_string(version) +
                          " does not match tool schema version " +
                          std::to_string(kConfigVersion));
  robot.validate(where);
  contact.validate(where);
  gait.validate(where + ".gait");
  controller.validate(where + ".controller");
  sim.validate(where);
  analysis.validate(where);
}

UnifiedConfig default_config() {
  UnifiedConfig cfg;
  // Standing start: feet at the static penetration depth of half the weight.
  const double penetration = cfg.robot.total_mass * cfg.robot.g / (2.0 * cfg.contact.k_g);
  cfg.sim.initial_state.q[coord::kPz] =
      cfg.contact.ground_height + cfg.robot.nominal_stance_depth - penetration;
  return cfg;
}

UnifiedConfig scenario_config(Scenario scenario) {
  UnifiedConfig cfg = default_config();
  switch (scenario) {
    case Scenario::Drop:
      // Released 5 cm above the ground with zero inputs: the joints are held
      // by the drop rig (locked coordinates), everything else is passive.
      cfg.sim.duration = 1.5;
      cfg.sim.initial_state.q[coord::kPz] =
          cfg.contact.ground_height + cfg.robot.nominal_stance_depth + 0.05;
      cfg.sim.lock_joints = true;
      cfg.controller.kp_j.setZero();
      cfg.controller.kd_j.setZero();
      cfg.controller.balance_kp = 0.0;
      cfg.controller.balance_kd = 0.0;
      cfg.controller.balance_pitch_kp = 0.0;
      cfg.controller.balance_pitch_kd = 0.0;
      break;
    case Scenario::Trot:
      cfg.sim.duration = 3.7;  // 0.2 s settle + 3.5 s (~11 cycles) of stepping
      cfg.gait.trot_start = 0.2;
      // Near-in-place stepping keeps the sagittal limit cycles bounded under
      // the gantry; the wide-sweep module defaults describe forward walking.
      cfg.gait.step.x_fore = 0.015;
      cfg.gait.step.x_hind = -0.015;
      cfg.gait.step.z_top = 0.05;
      cfg.gait.step.z_bottom = -0.005;
      cfg.gait.step.duty = 0.58;
      break;
    case Scenario::Jump:
      cfg.sim.duration = 2.6;
      cfg.gait.jump.start = 0.3;
      break;
  }
  return cfg;
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "drop") return Scenario::Drop;
  if (name == "trot") return Scenario::Trot;
  if (name == "jump") return Scenario::Jump;
  throw ConfigError("<args>", "scenario", "unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::Drop:
      return "drop";
    case Scenario::Trot:
      return "trot";
    case Scenario::Jump:
      return "jump";
  }
  return "unknown";
}

json config_to_json(const UnifiedConfig& c) {
  json j;
  j["version"] = c.version;

  json& r = j["robot"];
  r["m_B"] = c.robot.m_B;
  r["m_H"] = c.robot.m_H;
  r["m_K"] = c.robot.m_K;
  r["total_mass"] = c.robot.total_mass;
  r["I_B"] = mat3_to_json(c.robot.I_B);
  r["I_H"] = mat3_to_json(c.robot.I_H);
  r["I_K"] = mat3_to_json(c.robot.I_K);
  r["l1"] = vec3_to_json(c.robot.l1);
  r["l2"] = vec3_to_json(c.robot.l2);
  r["l3"] = vec3_to_json(c.robot.l3);
  r["l4a"] = c.robot.l4a;
  r["l4b"] = c.robot.l4b;
  r["lt"] = vec3_to_json(c.robot.lt);
  r["K_t"] = c.robot.K_t;
  r["gear_ratio"] = c.robot.gear_ratio;
  r["torque_constant_includes_gearbox"] = c.robot.torque_constant_includes_gearbox;
  r["rotor_inertia"] = c.robot.rotor_inertia;
  r["max_thrust_per_side"] = c.robot.max_thrust_per_side;
  r["thrust_frame"] = c.robot.thrust_frame == ThrustFrame::Body ? "body" : "world";
  r["g"] = c.robot.g;
  r["nominal_stance_depth"] = c.robot.nominal_stance_depth;

  json& ct = j["contact"];
  ct["k_g"] = c.contact.k_g;
  ct["b_g"] = c.contact.b_g;
  ct["mu"] = c.contact.mu;
  ct["v_slip"] = c.contact.v_slip;
  ct["ground_height"] = c.contact.ground_height;
  ct["normal"] = vec3_to_json(c.contact.n);

  json& g = j["gait"];
  g["step"] = {{"z_top", c.gait.step.z_top},       {"z_bottom", c.gait.step.z_bottom},
               {"x_fore", c.gait.step.x_fore},     {"x_hind", c.gait.step.x_hind},
               {"step_period", c.gait.step.step_period}, {"duty", c.gait.step.duty}};
  g["nominal_foot"] = vec3_to_json(c.gait.nominal_foot);
  g["trot_start"] = c.gait.trot_start;
  g["jump"] = {{"start", c.gait.jump.start},
               {"crouch_depth", c.gait.jump.crouch_depth},
               {"crouch_time", c.gait.jump.crouch_time},
               {"extend_time", c.gait.jump.extend_time},
               {"extend_depth", c.gait.jump.extend_depth},
               {"takeoff_max", c.gait.jump.takeoff_max},
               {"settle_time", c.gait.jump.settle_time},
               {"land_x", c.gait.jump.land_x},
               {"land_clear", c.gait.jump.land_clear},
               {"retract_time", c.gait.jump.retract_time}};

  json& k = j["controller"];
  k["kp_j"] = vec6_to_json(c.controller.kp_j);
  k["kd_j"] = vec6_to_json(c.controller.kd_j);
  k["torque_limit"] = c.controller.torque_limit;
  k["thrust_profile"] = {{"takeoff", knots_to_json(c.controller.thrust_profile.takeoff)},
                         {"ballistic", knots_to_json(c.controller.thrust_profile.ballistic)}};
  k["pwm_map"] = {{"slope", c.controller.pwm_map.slope}, {"offset", c.controller.pwm_map.offset}};
  k["raibert_gain"] = c.controller.raibert_gain;
  k["v_des_x"] = c.controller.v_des_x;
  k["station_gain"] = c.controller.station_gain;
  k["raibert_shift_max"] = c.controller.raibert_shift_max;
  k["balance_kp"] = c.controller.balance_kp;
  k["balance_kd"] = c.controller.balance_kd;
  k["balance_pitch_kp"] = c.controller.balance_pitch_kp;
  k["balance_pitch_kd"] = c.controller.balance_pitch_kd;
  k["balance_shift_max"] = c.controller.balance_shift_max;
  k["pitch_kp"] = c.controller.pitch_kp;
  k["pitch_kd"] = c.controller.pitch_kd;
  k["gravity_ff"] = c.controller.gravity_ff;

  json& s = j["sim"];
  s["dt_physics"] = c.sim.dt_physics;
  s["control_rate"] = c.sim.control_rate;
  s["log_rate"] = c.sim.log_rate;
  s["duration"] = c.sim.duration;
  s["integrator"] = c.sim.integrator == IntegratorKind::RK4 ? "rk4" : "semi_implicit_euler";
  s["gantry_enabled"] = c.sim.gantry_enabled;
  s["contact_enabled"] = c.sim.contact_enabled;
  s["lock_joints"] = c.sim.lock_joints;
  s["baumgarte_alpha"] = c.sim.baumgarte_alpha;
  s["baumgarte_beta"] = c.sim.baumgarte_beta;
  s["seed"] = c.sim.seed;
  s["initial_perturbation"] = c.sim.initial_perturbation;
  s["initial"] = {{"p_B", vec3_to_json(c.sim.initial_state.q.segment<3>(0))},
                  {"euler", vec3_to_json(c.sim.initial_state.q.segment<3>(3))},
                  {"joints", vec6_to_json(c.sim.initial_state.q.segment<6>(6))},
                  {"v_B", vec3_to_json(c.sim.initial_state.qd.segment<3>(0))},
                  {"euler_rates", vec3_to_json(c.sim.initial_state.qd.segment<3>(3))},
                  {"joint_rates", vec6_to_json(c.sim.initial_state.qd.segment<6>(6))},
                  {"t", c.sim.initial_state.t}};

  json& a = j["analysis"];
  a["K_i"] = c.analysis.K_i;
  a["paper_sign"] = c.analysis.paper_sign;
  a["thrust_pitch_offset"] = c.analysis.thrust_pitch_offset;
  a["window"] = c.analysis.window;
  a["cycle_hysteresis"] = c.analysis.cycle_hysteresis;
  a["envelope_rel"] = c.analysis.envelope_rel;
  a["torque_from_current"] = c.analysis.torque_from_current;
  return j;
}

namespace {

UnifiedConfig parse_config(const json& j, const std::string& where) {
  UnifiedConfig c;
  c.version = j.at("version").get<int>();

  const json& r = j.at("robot");
  c.robot.m_B = r.at("m_B").get<double>();
  c.robot.m_H = r.at("m_H").get<double>();
  c.robot.m_K = r.at("m_K").get<double>();
  c.robot.total_mass = r.at("total_mass").get<double>();
  c.robot.I_B = mat3_from_json(r.at("I_B"), "robot.I_B");
  c.robot.I_H = mat3_from_json(r.at("I_H"), "robot.I_H");
  c.robot.I_K = mat3_from_json(r.at("I_K"), "robot.I_K");
  c.robot.l1 = vec3_from_json(r.at("l1"), "robot.l1");
  c.robot.l2 = vec3_from_json(r.at("l2"), "robot.l2");
  c.robot.l3 = vec3_from_json(r.at("l3"), "robot.l3");
  c.robot.l4a = r.at("l4a").get<double>();
  c.robot.l4b = r.at("l4b").get<double>();
  c.robot.lt = vec3_from_json(r.at("lt"), "robot.lt");
  c.robot.K_t = r.at("K_t").get<double>();
  c.robot.gear_ratio = r.at("gear_ratio").get<double>();
  c.robot.torque_constant_includes_gearbox = r.at("torque_constant_includes_gearbox").get<bool>();
  c.robot.rotor_inertia = r.at("rotor_inertia").get<double>();
  c.robot.max_thrust_per_side = r.at("max_thrust_per_side").get<double>();
  const std::string tf = r.at("thrust_frame").get<std::string>();
  if (tf == "body")
    c.robot.thrust_frame = ThrustFrame::Body;
  else if (tf == "world")
    c.robot.thrust_frame = ThrustFrame::World;
  else
    throw ConfigError(where, "robot.thrust_frame", "must be 'body' or 'world'");
  c.robot.g = r.at("g").get<double>();
  c.robot.nominal_stance_depth = r.at("nominal_stance_depth").get<double>();

  const json& ct = j.at("contact");
  c.contact.k_g = ct.at("k_g").get<double>();
  c.contact.b_g = ct.at("b_g").get<double>();
  c.contact.mu = ct.at("mu").get<double>();
  c.contact.v_slip = ct.at("v_slip").get<double>();
  c.contact.ground_height = ct.at("ground_height").get<double>();
  c.contact.n = vec3_from_json(ct.at("normal"), "contact.normal");

  const json& g = j.at("gait");
  const json& st = g.at("step");
  c.gait.step.z_top = st.at("z_top").get<double>();
  c.gait.step.z_bottom = st.at("z_bottom").get<double>();
  c.gait.step.x_fore = st.at("x_fore").get<double>();
  c.gait.step.x_hind = st.at("x_hind").get<double>();
  c.gait.step.step_period = st.at("step_period").get<double>();
  c.gait.step.duty = st.at("duty").get<double>();
  c.gait.nominal_foot = vec3_from_json(g.at("nominal_foot"), "gait.nominal_foot");
  c.gait.trot_start = g.at("trot_start").get<double>();
  const json& jp = g.at("jump");
  c.gait.jump.start = jp.at("start").get<double>();
  c.gait.jump.crouch_depth = jp.at("crouch_depth").get<double>();
  c.gait.jump.crouch_time = jp.at("crouch_time").get<double>();
  c.gait.jump.extend_time = jp.at("extend_time").get<double>();
  c.gait.jump.extend_depth = jp.at("extend_depth").get<double>();
  c.gait.jump.takeoff_max = jp.at("takeoff_max").get<double>();
  c.gait.jump.settle_time = jp.at("settle_time").get<double>();
  c.gait.jump.land_x = jp.at("land_x").get<double>();
  c.gait.jump.land_clear = jp.at("land_clear").get<double>();
  c.gait.jump.retract_time = jp.at("retract_time").get<double>();

  const json& k = j.at("controller");
  c.controller.kp_j = vec6_from_json(k.at("kp_j"), "controller.kp_j");
  c.controller.kd_j = vec6_from_json(k.at("kd_j"), "controller.kd_j");
  c.controller.torque_limit = k.at("torque_limit").get<double>();
  c.controller.thrust_profile.takeoff =
      knots_from_json(k.at("thrust_profile").at("takeoff"), "controller.thrust_profile.takeoff");
  c.controller.thrust_profile.ballistic = knots_from_json(k.at("thrust_profile").at("ballistic"),
                                                          "controller.thrust_profile.ballistic");
  c.controller.pwm_map.slope = k.at("pwm_map").at("slope").get<double>();
  c.controller.pwm_map.offset = k.at("pwm_map").at("offset").get<double>();
  c.controller.raibert_gain = k.at("raibert_gain").get<double>();
  c.controller.v_des_x = k.at("v_des_x").get<double>();
  c.controller.station_gain = k.at("station_gain").get<double>();
  c.controller.raibert_shift_max = k.at("raibert_shift_max").get<double>();
  c.controller.balance_kp = k.at("balance_kp").get<double>();
  c.controller.balance_kd = k.at("balance_kd").get<double>();
  c.controller.balance_pitch_kp = k.at("balance_pitch_kp").get<double>();
  c.controller.balance_pitch_kd = k.at("balance_pitch_kd").get<double>();
  c.controller.balance_shift_max = k.at("balance_shift_max").get<double>();
  c.controller.pitch_kp = k.at("pitch_kp").get<double>();
  c.controller.pitch_kd = k.at("pitch_kd").get<double>();
  c.controller.gravity_ff = k.at("gravity_ff").get<bool>();

  const json& s = j.at("sim");
  c.sim.dt_physics = s.at("dt_physics").get<double>();
  c.sim.control_rate = s.at("control_rate").get<double>();
  c.sim.log_rate = s.at("log_rate").get<double>();
  c.sim.duration = s.at("duration").get<double>();
  const std::string integ = s.at("integrator").get<std::string>();
  if (integ == "rk4")
    c.sim.integrator = IntegratorKind::RK4;
  else if (integ == "semi_implicit_euler")
    c.sim.integrator = IntegratorKind::SemiImplicitEuler;
  else
    throw ConfigError(where, "sim.integrator", "must be 'rk4' or 'semi_implicit_euler'");
  c.sim.gantry_enabled = s.at("gantry_enabled").get<bool>();
  c.sim.contact_enabled = s.at("contact_enabled").get<bool>();
  c.sim.lock_joints = s.at("lock_joints").get<bool>();
  c.sim.baumgarte_alpha = s.at("baumgarte_alpha").get<double>();
  c.sim.baumgarte_beta = s.at("baumgarte_beta").get<double>();
  c.sim.seed = s.at("seed").get<std::uint64_t>();
  c.sim.initial_perturbation = s.at("initial_perturbation").get<double>();
  const json& init = s.at("initial");
  c.sim.initial_state.q.segment<3>(0) = vec3_from_json(init.at("p_B"), "sim.initial.p_B");
  c.sim.initial_state.q.segment<3>(3) = vec3_from_json(init.at("euler"), "sim.initial.euler");
  c.sim.initial_state.q.segment<6>(6) = vec6_from_json(init.at("joints"), "sim.initial.joints");
  c.sim.initial_state.qd.segment<3>(0) = vec3_from_json(init.at("v_B"), "sim.initial.v_B");
  c.sim.initial_state.qd.segment<3>(3) =
      vec3_from_json(init.at("euler_rates"), "sim.initial.euler_rates");
  c.sim.initial_state.qd.segment<6>(6) =
      vec6_from_json(init.at("joint_rates"), "sim.initial.joint_rates");
  c.sim.initial_state.t = init.at("t").get<double>();

  const json& a = j.at("analysis");
  c.analysis.K_i = a.at("K_i").get<double>();
  c.analysis.paper_sign = a.at("paper_sign").get<bool>();
  c.analysis.thrust_pitch_offset = a.at("thrust_pitch_offset").get<double>();
  c.analysis.window = a.at("window").get<double>();
  c.analysis.cycle_hysteresis = a.at("cycle_hysteresis").get<double>();
  c.analysis.envelope_rel = a.at("envelope_rel").get<double>();
  c.analysis.torque_from_current = a.at("torque_from_current").get<bool>();
  return c;
}

}  // namespace

UnifiedConfig config_from_json(const json& j, const UnifiedConfig& base, const std::string& where) {
  const json merged = merge_checked(config_to_json(base), j, where, "");
  UnifiedConfig cfg;
  try {
    cfg = parse_config(merged, where);
  } catch (const json::exception& e) {
    throw ConfigError(where, "<parse>", e.what());
  }
  cfg.validate(where);
  return cfg;
}

UnifiedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "<file>", "cannot open config file");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(path, "<parse>", e.what());
  }
  return config_from_json(j, default_config(), path);
}

void save_config(const UnifiedConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << config_to_json(cfg).dump(2) << "\n";
}

std::string canonical_config_string(const UnifiedConfig& cfg) {
  return config_to_json(cfg).dump();  // nlohmann objects keep sorted keys
}

std::string config_hash(const UnifiedConfig& cfg) {
  const std::string s = canonical_config_string(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

TrajectoryLog run_scenario(const UnifiedConfig& cfg, Scenario scenario) {
  TrajectoryLog log =
      simulate(cfg.sim, cfg.robot, cfg.contact, cfg.gait, cfg.controller, scenario);
  log.meta.tool_version = TBSIM_VERSION_STRING;
  log.meta.scenario = scenario_name(scenario);
  log.meta.config_hash = config_hash(cfg);
  log.meta.config_json = canonical_config_string(cfg);
  return log;
}

}  // namespace tbsim
