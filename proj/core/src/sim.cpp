#include "tbsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tbsim {

namespace {

int rate_divisor(double dt, double rate, const std::string& where, const std::string& key) {
  const double steps = 1.0 / (rate * dt);
  const int n = static_cast<int>(std::lround(steps));
  if (n < 1 || std::abs(steps - n) > 1e-9)
    throw ConfigError(where, key, "1/(rate*dt_physics) must be a positive integer");
  return n;
}

}  // namespace

void SimConfig::validate(const std::string& where) const {
  if (!(dt_physics > 0)) throw ConfigError(where, "sim.dt_physics", "must be > 0");
  if (!(control_rate > 0)) throw ConfigError(where, "sim.control_rate", "must be > 0");
  if (!(log_rate > 0)) throw ConfigError(where, "sim.log_rate", "must be > 0");
  if (!(duration > 0)) throw ConfigError(where, "sim.duration", "must be > 0");
  if (dt_physics > 1.0 / (2.0 * control_rate))
    throw ConfigError(where, "sim.dt_physics", "must be <= 1/(2*control_rate)");
  (void)rate_divisor(dt_physics, control_rate, where, "sim.control_rate");
  (void)rate_divisor(dt_physics, log_rate, where, "sim.log_rate");
  if (!(baumgarte_alpha >= 0) || !(baumgarte_beta >= 0))
    throw ConfigError(where, "sim.baumgarte_*", "must be >= 0");
  if (initial_perturbation < 0)
    throw ConfigError(where, "sim.initial_perturbation", "must be >= 0");
  initial_state.validate();
}

std::vector<std::string> TrajectoryLog::schema_v1() {
  static const char* joints[6] = {"gam_L", "gam_R", "phih_L", "phih_R", "phik_L", "phik_R"};
  std::vector<std::string> c;
  c.emplace_back("t[s]");
  const char* qn[6] = {"pb_x[m]", "pb_y[m]", "pb_z[m]", "eul_x[rad]", "eul_y[rad]", "eul_z[rad]"};
  for (auto* n : qn) c.emplace_back(n);
  for (auto* j : joints) c.push_back(std::string(j) + "[rad]");
  const char* qdn[6] = {"d_pb_x[m/s]", "d_pb_y[m/s]", "d_pb_z[m/s]",
                        "d_eul_x[rad/s]", "d_eul_y[rad/s]", "d_eul_z[rad/s]"};
  for (auto* n : qdn) c.emplace_back(n);
  for (auto* j : joints) c.push_back("d_" + std::string(j) + "[rad/s]");
  for (auto* j : joints) c.push_back("des_" + std::string(j) + "[rad]");
  for (auto* j : joints) c.push_back("d_des_" + std::string(j) + "[rad/s]");
  for (auto* j : joints) c.push_back("tau_" + std::string(j) + "[Nm]");
  for (auto* j : joints) c.push_back("i_" + std::string(j) + "[A]");
  c.emplace_back("ut_mag_L[N]");
  c.emplace_back("ut_mag_R[N]");
  c.emplace_back("theta_p[rad]");
  for (const char* s : {"L", "R"})
    for (const char* a : {"x", "y", "z"})
      c.push_back("pf_w_" + std::string(s) + "_" + a + "[m]");
  for (const char* s : {"L", "R"})
    for (const char* a : {"x", "y", "z"})
      c.push_back("pf_b_" + std::string(s) + "_" + a + "[m]");
  c.emplace_back("contact_L[-]");
  c.emplace_back("contact_R[-]");
  c.emplace_back("jump_phase[-]");
  c.emplace_back("leg_phase_L[-]");
  c.emplace_back("leg_phase_R[-]");
  c.emplace_back("a_tot[m/s2]");
  for (const char* s : {"L", "R"})
    for (const char* a : {"x", "y", "z"})
      c.push_back("fg_" + std::string(s) + "_" + a + "[N]");
  return c;
}

int TrajectoryLog::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw SchemaError("log is missing column '" + name + "'");
}

bool TrajectoryLog::has_col(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

double TrajectoryLog::at(std::size_t row, const std::string& name) const {
  return rows.at(row)[static_cast<std::size_t>(col(name))];
}

std::vector<double> TrajectoryLog::series(const std::string& name) const {
  const int c = col(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
  return out;
}

SimEngine::SimEngine(const SimConfig& sim, const RobotParams& robot, const ContactParams& contact,
                     const GaitConfig& gait, const ControllerGains& gains, Scenario scenario)
    : sim_(sim),
      robot_(robot),
      contact_(contact),
      constraints_(sim.gantry_enabled
                       ? ConstraintSet::gantry(sim.baumgarte_alpha, sim.baumgarte_beta)
                       : ConstraintSet::none()),
      controller_(scenario, gait, gains, robot),
      scenario_(scenario),
      state_(sim.initial_state) {
  sim_.validate();
  robot_.validate();
  contact_.validate();
  gait.validate();
  gains.validate();
  if (sim_.lock_joints) {
    constraints_.baumgarte_alpha = sim_.baumgarte_alpha;
    constraints_.baumgarte_beta = sim_.baumgarte_beta;
    for (int j = 0; j < coord::kNumJoints; ++j)
      constraints_.coords.push_back(coord::kJointBase + j);
  }
  steps_per_control_ = rate_divisor(sim_.dt_physics, sim_.control_rate, "<sim>", "control_rate");
  steps_per_log_ = rate_divisor(sim_.dt_physics, sim_.log_rate, "<sim>", "log_rate");

  if (sim_.initial_perturbation > 0.0) {
    std::mt19937_64 rng(sim_.seed);
    std::uniform_real_distribution<double> d(-sim_.initial_perturbation,
                                             sim_.initial_perturbation);
    for (int j = 0; j < coord::kNumJoints; ++j) state_.q[coord::kJointBase + j] += d(rng);
  }
}

ContactState SimEngine::foot_contact(Side side) const {
  if (!sim_.contact_enabled) return ContactState{};
  const LegKinematics k = leg_kinematics(state_, robot_, side);
  return ground_force(k.p_F, k.Jv_F * state_.qd, contact_);
}

ControlInput SimEngine::assemble_input(const GeneralizedState& s) const {
  ControlInput u;
  u.u_j = ctrl_out_.u_j;
  const Mat3 R_B = body_rotation(s.body_euler());
  for (int i = 0; i < 2; ++i) {
    const Vec3 dir = robot_.thrust_frame == ThrustFrame::Body ? Vec3(R_B.col(2)) : Vec3(0, 0, 1);
    u.u_t.segment<3>(3 * i) = ctrl_out_.thrust_mag[i] * dir;
  }
  return u;
}

Vec12 SimEngine::accel(const GeneralizedState& s, const ControlInput& u_base,
                       Vec6* ground_forces) const {
  ControlInput u = u_base;
  if (sim_.contact_enabled) {
    for (int i = 0; i < 2; ++i) {
      const LegKinematics k = leg_kinematics(s, robot_, static_cast<Side>(i));
      const ContactState cs = ground_force(k.p_F, k.Jv_F * s.qd, contact_);
      u.u_g.segment<3>(3 * i) = cs.force;
    }
  }
  if (ground_forces) *ground_forces = u.u_g;
  return solve_constrained_dynamics(s, u, robot_, constraints_).qdd;
}

void SimEngine::control_tick() {
  const ContactState cl = foot_contact(Side::Left);
  const ContactState cr = foot_contact(Side::Right);
  ctrl_out_ = controller_.update(state_, cl.in_contact, cr.in_contact);
}

void SimEngine::integrate() {
  const double dt = sim_.dt_physics;

  auto deriv = [&](const GeneralizedState& s, Vec12& dq, Vec12& dqd) {
    dq = s.qd;
    // Contact is re-evaluated and the body-fixed thrust direction follows the
    // stage state; joint torques and thrust magnitude are zero-order-held.
    dqd = accel(s, assemble_input(s), nullptr);
  };

  GeneralizedState s = state_;
  if (sim_.integrator == IntegratorKind::RK4) {
    Vec12 k1q, k1v, k2q, k2v, k3q, k3v, k4q, k4v;
    deriv(s, k1q, k1v);
    GeneralizedState s2 = s;
    s2.q = s.q + 0.5 * dt * k1q;
    s2.qd = s.qd + 0.5 * dt * k1v;
    s2.t = s.t + 0.5 * dt;
    deriv(s2, k2q, k2v);
    GeneralizedState s3 = s;
    s3.q = s.q + 0.5 * dt * k2q;
    s3.qd = s.qd + 0.5 * dt * k2v;
    s3.t = s.t + 0.5 * dt;
    deriv(s3, k3q, k3v);
    GeneralizedState s4 = s;
    s4.q = s.q + dt * k3q;
    s4.qd = s.qd + dt * k3v;
    s4.t = s.t + dt;
    deriv(s4, k4q, k4v);
    state_.q = s.q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    state_.qd = s.qd + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  } else {  // semi-implicit Euler
    const Vec12 a = accel(s, assemble_input(s), nullptr);
    state_.qd = s.qd + dt * a;
    state_.q = s.q + dt * state_.qd;
  }
  ++step_index_;
  state_.t = sim_.initial_state.t + static_cast<double>(step_index_) * dt;
}

void SimEngine::step() {
  if (step_index_ % steps_per_control_ == 0) control_tick();
  integrate();
}

void SimEngine::log_row(TrajectoryLog& log) {
  std::vector<double> r;
  r.reserve(log.columns.size());
  const GeneralizedState& s = state_;

  // Contact and dynamics at the sample time.
  ContactState cs[2];
  LegKinematics kin[2] = {leg_kinematics(s, robot_, Side::Left),
                          leg_kinematics(s, robot_, Side::Right)};
  if (sim_.contact_enabled)
    for (int i = 0; i < 2; ++i) cs[i] = ground_force(kin[i].p_F, kin[i].Jv_F * s.qd, contact_);
  Vec6 gf;
  const Vec12 qdd = accel(s, assemble_input(s), &gf);

  r.push_back(s.t);
  for (int i = 0; i < 12; ++i) r.push_back(s.q[i]);
  for (int i = 0; i < 12; ++i) r.push_back(s.qd[i]);
  for (int i = 0; i < 6; ++i) r.push_back(ctrl_out_.q_des[i]);
  for (int i = 0; i < 6; ++i) r.push_back(ctrl_out_.qd_des[i]);
  for (int i = 0; i < 6; ++i) r.push_back(ctrl_out_.u_j[i]);
  // Synthetic motor current: tau = K_t_eff * i exercises the analyzer's
  // current-based torque path end to end.
  const double kt_eff = robot_.torque_constant_includes_gearbox
                            ? robot_.K_t
                            : robot_.K_t * robot_.gear_ratio;
  for (int i = 0; i < 6; ++i) r.push_back(ctrl_out_.u_j[i] / kt_eff);
  r.push_back(ctrl_out_.thrust_mag[0]);
  r.push_back(ctrl_out_.thrust_mag[1]);
  r.push_back(s.q[coord::kPitch]);
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 3; ++a) r.push_back(kin[i].p_F[a]);
  for (int i = 0; i < 2; ++i) {
    const Vec3 pb = body_frame_foot(s.joints(), robot_, static_cast<Side>(i));
    for (int a = 0; a < 3; ++a) r.push_back(pb[a]);
  }
  r.push_back(cs[0].in_contact ? 1.0 : 0.0);
  r.push_back(cs[1].in_contact ? 1.0 : 0.0);
  r.push_back(static_cast<double>(ctrl_out_.phase.jump_phase));
  r.push_back(static_cast<double>(ctrl_out_.phase.leg[0]));
  r.push_back(static_cast<double>(ctrl_out_.phase.leg[1]));
  r.push_back(qdd[coord::kPz]);
  for (int i = 0; i < 6; ++i) r.push_back(gf[i]);

  log.rows.push_back(std::move(r));
}

TrajectoryLog SimEngine::run() {
  TrajectoryLog log;
  log.columns = TrajectoryLog::schema_v1();
  log.meta.sample_rate = sim_.log_rate;

  const auto n_steps = static_cast<std::int64_t>(std::llround(sim_.duration / sim_.dt_physics));
  const double pitch_abort = 80.0 * M_PI / 180.0;

  try {
    for (std::int64_t i = 0; i <= n_steps; ++i) {
      if (std::abs(state_.q[coord::kPitch]) > pitch_abort) {
        failure_ = "pitch exceeded 80 deg at t=" + std::to_string(state_.t);
        break;
      }
      if (i % steps_per_control_ == 0 && i < n_steps) control_tick();
      if (i % steps_per_log_ == 0) log_row(log);
      if (i < n_steps) integrate();
    }
  } catch (const SimError& e) {
    failure_ = e.what();
  }
  log.meta.failure = failure_;
  return log;
}

TrajectoryLog simulate(const SimConfig& sim, const RobotParams& robot,
                       const ContactParams& contact, const GaitConfig& gait,
                       const ControllerGains& gains, Scenario scenario) {
  SimEngine engine(sim, robot, contact, gait, gains, scenario);
  return engine.run();
}

}  // namespace tbsim
