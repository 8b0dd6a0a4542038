#include "tbsim/gait.hpp"

#include "tbsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace tbsim {

namespace {

double wrap_pi(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

double smoothstep01(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Monotone C1 ramp with zero end slopes: s(0)=0, s(1)=1, s'(0)=s'(1)=0.
double cycloid_ramp(double tau) { return tau - std::sin(2.0 * M_PI * tau) / (2.0 * M_PI); }

// C1 bump: b(0)=b(1)=0, b(1/2)=1, b'(0)=b'(1)=0.
double cosine_bump(double tau) { return 0.5 * (1.0 - std::cos(2.0 * M_PI * tau)); }

double interp_knots(const std::vector<std::pair<double, double>>& knots, double t) {
  if (knots.empty()) return 0.0;
  if (t <= knots.front().first) return knots.front().second;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (t <= knots[i].first) {
      const auto& [t0, v0] = knots[i - 1];
      const auto& [t1, v1] = knots[i];
      const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 1.0;
      return v0 + w * (v1 - v0);
    }
  }
  return knots.back().second;
}

}  // namespace

void StepParams::validate(const std::string& where) const {
  if (!(z_top > z_bottom)) throw ConfigError(where, "z_top", "requires z_top > z_bottom");
  if (!(x_fore > x_hind)) throw ConfigError(where, "x_fore", "requires x_fore > x_hind");
  if (!(duty > 0.0 && duty < 1.0)) throw ConfigError(where, "duty", "requires 0 < duty < 1");
  if (!(step_period > 0.0)) throw ConfigError(where, "step_period", "must be > 0");
}

double ThrustProfile::eval(JumpPhase phase, double t_phase) const {
  switch (phase) {
    case JumpPhase::TakeOff:
      return interp_knots(takeoff, t_phase);
    case JumpPhase::Ballistic:
      return interp_knots(ballistic, t_phase);
    case JumpPhase::Idle:
    case JumpPhase::TouchDown:
      return 0.0;
  }
  return 0.0;
}

void ControllerGains::validate(const std::string& where) const {
  if ((kp_j.array() < 0).any() || (kd_j.array() < 0).any())
    throw ConfigError(where, "kp_j/kd_j", "gains must be >= 0");
  if (!(torque_limit > 0)) throw ConfigError(where, "torque_limit", "must be > 0");
  auto check_profile = [&](const std::vector<std::pair<double, double>>& knots, const char* key) {
    for (const auto& [t, v] : knots) {
      if (v < 0) throw ConfigError(where, key, "thrust must be >= 0");
      (void)t;
    }
  };
  check_profile(thrust_profile.takeoff, "thrust_profile.takeoff");
  check_profile(thrust_profile.ballistic, "thrust_profile.ballistic");
}

void GaitConfig::validate(const std::string& where) const {
  step.validate(where + ".step");
  if (!(jump.crouch_time >= 0) || !(jump.extend_time > 0) || !(jump.settle_time > 0) ||
      !(jump.takeoff_max > 0) || !(jump.retract_time > 0))
    throw ConfigError(where, "jump", "phase times must be positive");
}

Vec3 nominal_foot_point(const GaitConfig& cfg, Side side) {
  const Vec3& n = cfg.nominal_foot;
  return side == Side::Left ? n : Vec3(n.x(), -n.y(), n.z());
}

Vec3 foot_reference(const StepParams& sp, double t_phase) {
  const double T = sp.step_period;
  if (!(t_phase >= 0.0) || t_phase >= T)
    throw PhaseError("foot_reference: t_phase " + std::to_string(t_phase) +
                     " outside [0, " + std::to_string(T) + ")");
  const double T_st = sp.duty * T;
  double x, z;
  if (t_phase < T_st) {  // stance: straight drag fore -> hind at depth z_bottom
    const double tau = t_phase / T_st;
    x = sp.x_fore + (sp.x_hind - sp.x_fore) * cycloid_ramp(tau);
    z = sp.z_bottom * cosine_bump(tau);
  } else {  // swing: arc hind -> fore with apex z_top
    const double tau = (t_phase - T_st) / (T - T_st);
    x = sp.x_hind + (sp.x_fore - sp.x_hind) * cycloid_ramp(tau);
    z = sp.z_top * cosine_bump(tau);
  }
  return Vec3(x, 0.0, z);
}

Vec3 inverse_kinematics(const Vec3& target, const RobotParams& params, Side side) {
  if (!target.allFinite()) throw SimError("inverse_kinematics: non-finite target");
  const Vec3 l1 = params.link1(side);
  const Vec3& l2 = params.l2;
  const Vec3& l3 = params.l3;
  const double l4a = params.l4a, l4b = params.l4b;

  const Vec3 s = target - l1;  // pelvis -> target, body frame

  // Hip-frontal angle from the lateral plane: the post-pelvis chain has a
  // constant y-component Y0 in the pelvis frame.
  const double Y0 = l2.y() + l3.y();
  const double rho_yz = std::hypot(s.y(), s.z());
  if (rho_yz < std::abs(Y0))
    throw UnreachableTarget("inverse_kinematics: target inside the lateral dead zone",
                            std::abs(Y0) - rho_yz);
  double gamma;
  {
    const double theta0 = std::atan2(s.z(), s.y());
    const double da = std::acos(std::clamp(Y0 / std::max(rho_yz, 1e-300), -1.0, 1.0));
    const double cand[2] = {wrap_pi(theta0 + da), wrap_pi(theta0 - da)};
    // Keep the leg-down branch (negative residual z after undoing gamma).
    auto zprime = [&](double gmm) { return -std::sin(gmm) * s.y() + std::cos(gmm) * s.z(); };
    if (zprime(cand[0]) < zprime(cand[1]))
      gamma = cand[0];
    else if (zprime(cand[1]) < zprime(cand[0]))
      gamma = cand[1];
    else
      gamma = std::abs(cand[0]) <= std::abs(cand[1]) ? cand[0] : cand[1];
  }

  const Mat3 RxT = elementary_rotation(Axis::X, gamma).transpose();
  const Vec3 v = RxT * s - l2;  // = Ry(phi_h) * (l3 + Ry(phi_k) l4(phi_k))

  // Radius equation in phi_k: |w|^2 = C2 + P sin + Q cos, a single harmonic.
  const double C2 = l3.x() * l3.x() + l3.z() * l3.z() + l4a * l4a + l4b * l4b -
                    2.0 * l3.x() * l4a;
  const double P = 2.0 * l4b * (l4a - l3.x());
  const double Q = -2.0 * l4b * l3.z();
  const double A = std::hypot(P, Q);
  const double rho2 = v.x() * v.x() + v.z() * v.z();
  const double rhs = rho2 - C2;

  const LegWorkspace ws = leg_workspace(params);
  const double rho = std::sqrt(rho2);
  if (A <= 0.0 || std::abs(rhs) > A * (1.0 + 1e-9)) {
    const double dist = std::max({0.0, rho - ws.r_max, ws.r_min - rho});
    throw UnreachableTarget("inverse_kinematics: target radius " + std::to_string(rho) +
                                " outside workspace [" + std::to_string(ws.r_min) + ", " +
                                std::to_string(ws.r_max) + "]",
                            dist);
  }

  const double psi = std::atan2(Q, P);
  const double base = std::asin(std::clamp(rhs / A, -1.0, 1.0));
  const double cand_k[2] = {wrap_pi(base - psi), wrap_pi(M_PI - base - psi)};

  auto solve_phi_h = [&](double phi_k) {
    const double wx = l3.x() - (l4a + l4b * std::sin(phi_k));
    const double wz = l3.z() - l4b * std::cos(phi_k);
    return wrap_pi(std::atan2(wz, wx) - std::atan2(v.z(), v.x()));
  };
  auto fk_residual = [&](const Vec3& angles) {
    Vec6 joints = Vec6::Zero();
    joints[coord::gamma(side) - coord::kJointBase] = angles[0];
    joints[coord::phi_h(side) - coord::kJointBase] = angles[1];
    joints[coord::phi_k(side) - coord::kJointBase] = angles[2];
    return (body_frame_foot(joints, params, side) - target).norm();
  };

  Vec3 best = Vec3::Zero();
  double best_res = std::numeric_limits<double>::infinity();
  for (double pk : cand_k) {
    // Newton polish of the radius equation (exactness at the asin branch
    // edges), then the in-plane angle.
    for (int it = 0; it < 50; ++it) {
      const double f = C2 + P * std::sin(pk) + Q * std::cos(pk) - rho2;
      const double df = P * std::cos(pk) - Q * std::sin(pk);
      if (std::abs(df) < 1e-12) break;
      const double step = f / df;
      pk -= step;
      if (std::abs(step) < 1e-12) break;
    }
    pk = wrap_pi(pk);
    const Vec3 angles(gamma, solve_phi_h(pk), pk);
    const double res = fk_residual(angles);
    // Knee-forward branch: prefer the solution continuous with the zero pose.
    const bool better =
        (res < 1e-9 && best_res < 1e-9) ? std::abs(pk) < std::abs(best[2]) : res < best_res;
    if (better) {
      best = angles;
      best_res = res;
    }
  }

  if (best_res > 1e-9) {
    const double dist = std::max({0.0, rho - ws.r_max, ws.r_min - rho});
    throw UnreachableTarget("inverse_kinematics: no branch reproduces the target (residual " +
                                std::to_string(best_res) + ")",
                            dist);
  }
  return best;
}

Vec6 joint_pd(const Vec6& q_des, const Vec6& qd_des, const GeneralizedState& state,
              const ControllerGains& gains) {
  const Vec6 e = q_des - state.joints();
  const Vec6 ed = qd_des - state.joint_rates();
  Vec6 u = gains.kp_j.cwiseProduct(e) + gains.kd_j.cwiseProduct(ed);
  return u.cwiseMax(-gains.torque_limit).cwiseMin(gains.torque_limit);
}

double thruster_schedule(const PhaseLabel& phase, double t_phase, const ControllerGains& gains,
                         double max_thrust) {
  const double mag = gains.thrust_profile.eval(phase.jump_phase, t_phase);
  return std::clamp(mag, 0.0, max_thrust);
}

PhaseState phase_update(const PhaseState& prev, bool contact_L, bool contact_R, double t,
                        const PhaseSchedule& schedule, Scenario mode) {
  PhaseState next = prev;
  switch (mode) {
    case Scenario::Drop:
      next.label.jump_phase = JumpPhase::Idle;
      next.label.leg[0] = contact_L ? LegPhase::Stance : LegPhase::Swing;
      next.label.leg[1] = contact_R ? LegPhase::Stance : LegPhase::Swing;
      return next;

    case Scenario::Jump: {
      switch (prev.label.jump_phase) {
        case JumpPhase::Idle:
          if (!prev.jump_done && t >= schedule.jump_start) {
            next.label.jump_phase = JumpPhase::TakeOff;
            next.jump_entry_t = t;
          }
          break;
        case JumpPhase::TakeOff:
          if (!contact_L && !contact_R) {
            next.label.jump_phase = JumpPhase::Ballistic;
            next.jump_entry_t = t;
          } else if (t - prev.jump_entry_t > schedule.takeoff_max) {
            next.label.jump_phase = JumpPhase::TouchDown;  // failsafe: never lifted off
            next.jump_entry_t = t;
          }
          break;
        case JumpPhase::Ballistic:
          if (contact_L || contact_R) {
            next.label.jump_phase = JumpPhase::TouchDown;
            next.jump_entry_t = t;
          }
          break;
        case JumpPhase::TouchDown:
          if (t - prev.jump_entry_t >= schedule.settle_time) {
            next.label.jump_phase = JumpPhase::Idle;
            next.jump_entry_t = t;
            next.jump_done = true;
          }
          break;
      }
      if (next.label.jump_phase == JumpPhase::Ballistic) {
        next.label.leg[0] = LegPhase::Swing;
        next.label.leg[1] = LegPhase::Swing;
      } else {
        next.label.leg[0] = contact_L ? LegPhase::Stance : LegPhase::Swing;
        next.label.leg[1] = contact_R ? LegPhase::Stance : LegPhase::Swing;
      }
      return next;
    }

    case Scenario::Trot: {
      next.label.jump_phase = JumpPhase::Idle;
      const bool contact[2] = {contact_L, contact_R};
      for (int i = 0; i < 2; ++i) {
        if (t < schedule.trot_start) {
          next.label.leg[i] = LegPhase::Stance;
          next.stance_confirmed[i] = true;
          continue;
        }
        const double tc = t - schedule.trot_start +
                          (i == 1 ? 0.5 * schedule.step_period : 0.0);
        const double tau = std::fmod(tc, schedule.step_period);
        const bool clock_stance = tau < schedule.duty * schedule.step_period;
        if (!clock_stance) {
          next.label.leg[i] = LegPhase::Swing;
          next.stance_confirmed[i] = false;
        } else if (prev.stance_confirmed[i] || contact[i]) {
          next.label.leg[i] = LegPhase::Stance;
          next.stance_confirmed[i] = true;
        } else {
          next.label.leg[i] = LegPhase::Swing;  // waiting for touch-down confirmation
        }
      }
      return next;
    }
  }
  return next;
}

GaitController::GaitController(Scenario mode, const GaitConfig& gait, const ControllerGains& gains,
                               const RobotParams& params)
    : mode_(mode), gait_(gait), gains_(gains), params_(params) {
  schedule_.jump_start = gait.jump.start;
  schedule_.takeoff_max = gait.jump.takeoff_max;
  schedule_.settle_time = gait.jump.settle_time;
  schedule_.trot_start = gait.trot_start;
  schedule_.step_period = gait.step.step_period;
  schedule_.duty = gait.step.duty;
  for (int i = 0; i < 2; ++i) blend_from_[i] = nominal_foot_point(gait_, static_cast<Side>(i));
}

Vec3 GaitController::foot_target(Side side, double t) const {
  const int i = static_cast<int>(side);
  const Vec3 nominal = nominal_foot_point(gait_, side);
  const Vec3 balance(balance_shift_, 0.0, 0.0);

  switch (mode_) {
    case Scenario::Drop:
      return nominal + balance;

    case Scenario::Trot: {
      if (t < schedule_.trot_start) return nominal + balance;
      const double tc = t - schedule_.trot_start + (i == 1 ? 0.5 * schedule_.step_period : 0.0);
      double tau = std::fmod(tc, schedule_.step_period);
      if (tau < 0) tau += schedule_.step_period;
      Vec3 ref = foot_reference(gait_.step, tau);
      ref.x() += raibert_shift_[i];
      return nominal + ref + balance;
    }

    case Scenario::Jump: {
      const JumpParams& jp = gait_.jump;
      const double tau = t - phase_.jump_entry_t;
      switch (phase_.label.jump_phase) {
        case JumpPhase::Idle:
          return nominal + balance;
        case JumpPhase::TakeOff: {
          double zoff;
          if (tau < jp.crouch_time) {
            zoff = jp.crouch_depth * smoothstep01(tau / jp.crouch_time);
          } else {
            const double w = smoothstep01((tau - jp.crouch_time) / jp.extend_time);
            zoff = jp.crouch_depth - (jp.crouch_depth + jp.extend_depth) * w;
          }
          return nominal + Vec3(0.0, 0.0, zoff) + balance;
        }
        case JumpPhase::Ballistic: {
          const Vec3 flight = nominal + Vec3(jp.land_x, 0.0, jp.land_clear);
          const double w = smoothstep01(tau / jp.retract_time);
          return blend_from_[i] + w * (flight - blend_from_[i]);
        }
        case JumpPhase::TouchDown: {
          const double w = smoothstep01(tau / (0.6 * jp.settle_time));
          return blend_from_[i] + w * (nominal - blend_from_[i]) + balance;
        }
      }
      return nominal;
    }
  }
  return nominal;
}

Vec6 GaitController::desired_joints(double t) const {
  Vec6 q_des = Vec6::Zero();
  const LegWorkspace ws = leg_workspace(params_);
  for (int i = 0; i < 2; ++i) {
    const Side side = static_cast<Side>(i);
    Vec3 target = R_B_T_ * foot_target(side, t);
    // Project into the reachable annulus with a small margin; the reference
    // generator may graze the boundary during transients.
    const Vec3 hip = params_.link1(side) + params_.l2;
    Vec3 d = target - hip;
    const double r = d.norm();
    const double lo = ws.r_min + 2e-3, hi = ws.r_max - 2e-3;
    if (r > hi)
      target = hip + d * (hi / r);
    else if (r < lo && r > 0)
      target = hip + d * (lo / r);
    const Vec3 angles = inverse_kinematics(target, params_, side);
    q_des[coord::gamma(side) - coord::kJointBase] = angles[0];
    q_des[coord::phi_h(side) - coord::kJointBase] = angles[1];
    q_des[coord::phi_k(side) - coord::kJointBase] = angles[2];
  }
  return q_des;
}

GaitController::Output GaitController::update(const GeneralizedState& state, bool contact_L,
                                              bool contact_R) {
  const double t = state.t;
  R_B_T_ = body_rotation(state.body_euler()).transpose();
  const PhaseState prev = phase_;
  phase_ = phase_update(prev, contact_L, contact_R, t, schedule_, mode_);

  // Capture the current targets as the blend origin on jump-phase changes so
  // references stay continuous across transitions.
  if (phase_.label.jump_phase != prev.label.jump_phase) {
    PhaseState tmp = phase_;
    phase_ = prev;  // evaluate targets under the previous phase
    for (int i = 0; i < 2; ++i) blend_from_[i] = foot_target(static_cast<Side>(i), t);
    phase_ = tmp;
  }

  if (mode_ == Scenario::Trot) {
    // Low-pass the sagittal velocity for foot placement.
    const double a = 0.15;
    vx_filt_ = have_state_ ? (1.0 - a) * vx_filt_ + a * state.qd[coord::kPx]
                           : state.qd[coord::kPx];
    have_state_ = true;
    for (int i = 0; i < 2; ++i) {
      const Side side = static_cast<Side>(i);
      const bool now_swing = phase_.label.leg_phase(side) == LegPhase::Swing;
      const bool was_swing = prev.label.leg_phase(side) == LegPhase::Swing;
      if (now_swing && !was_swing) {
        const double v_des = gains_.v_des_x - gains_.station_gain * state.q[coord::kPx];
        const double shift = gains_.raibert_gain * (vx_filt_ - v_des);
        raibert_shift_[i] =
            std::clamp(shift, -gains_.raibert_shift_max, gains_.raibert_shift_max);
      }
    }
  }

  const LegKinematics kl = leg_kinematics(state, params_, Side::Left);
  const LegKinematics kr = leg_kinematics(state, params_, Side::Right);

  // COM-over-support balance shift, updated while any foot is grounded and
  // frozen through flight.
  if (contact_L || contact_R) {
    const Vec3 com = (params_.m_B * state.body_pos() + params_.m_H * (kl.p_H + kr.p_H) +
                      params_.m_K * (kl.p_K + kr.p_K)) /
                     params_.total_mass;
    Mat3x12 Jv_B = Mat3x12::Zero();
    Jv_B.block<3, 3>(0, 0).setIdentity();
    const Vec3 com_v = (params_.m_B * (Jv_B * state.qd) +
                        params_.m_H * ((kl.Jv_H + kr.Jv_H) * state.qd) +
                        params_.m_K * ((kl.Jv_K + kr.Jv_K) * state.qd)) /
                       params_.total_mass;
    double support = 0.0;
    int n = 0;
    if (contact_L) {
      support += kl.p_F.x();
      ++n;
    }
    if (contact_R) {
      support += kr.p_F.x();
      ++n;
    }
    support /= n;
    const double e = com.x() - support;
    balance_shift_ = std::clamp(gains_.balance_kp * e + gains_.balance_kd * com_v.x() +
                                    gains_.balance_pitch_kp * state.q[coord::kPitch] +
                                    gains_.balance_pitch_kd * state.qd[coord::kPitch],
                                -gains_.balance_shift_max, gains_.balance_shift_max);
  }

  Output out;
  out.phase = phase_.label;
  out.q_des = desired_joints(t);
  const double dt_fd = 1e-3;
  out.qd_des = (desired_joints(t + dt_fd) - desired_joints(t - dt_fd)) / (2.0 * dt_fd);
  out.u_j = joint_pd(out.q_des, out.qd_des, state, gains_);

  if (gains_.gravity_ff) {
    GeneralizedState frozen = state;
    frozen.qd.setZero();
    Vec6 u_ff = bias_forces(frozen, params_).tail<6>();
    const int n_support = (contact_L ? 1 : 0) + (contact_R ? 1 : 0);
    if (n_support > 0) {
      const Vec3 share(0.0, 0.0, params_.total_mass * params_.g / n_support);
      if (contact_L) u_ff -= (kl.Jv_F.transpose() * share).tail<6>();
      if (contact_R) u_ff -= (kr.Jv_F.transpose() * share).tail<6>();
    }
    out.u_j = (out.u_j + u_ff).cwiseMax(-gains_.torque_limit).cwiseMin(gains_.torque_limit);
  }

  // Stance-hip attitude feedback. Hip torque reacts on the torso about -y,
  // so positive pitch error asks for positive corrective torque; the COM
  // balance loop absorbs the induced foot-force disturbance.
  const bool stance[2] = {contact_L, contact_R};
  const int n_stance = (stance[0] ? 1 : 0) + (stance[1] ? 1 : 0);
  if (n_stance > 0) {
    const double corr = (gains_.pitch_kp * state.q[coord::kPitch] +
                         gains_.pitch_kd * state.qd[coord::kPitch]) /
                        n_stance;
    for (int i = 0; i < 2; ++i) {
      if (!stance[i]) continue;
      const int idx = coord::phi_h(static_cast<Side>(i)) - coord::kJointBase;
      out.u_j[idx] = std::clamp(out.u_j[idx] + corr, -gains_.torque_limit, gains_.torque_limit);
    }
  }

  const double t_phase = t - phase_.jump_entry_t;
  const double mag = mode_ == Scenario::Jump
                         ? thruster_schedule(phase_.label, t_phase, gains_,
                                             params_.max_thrust_per_side)
                         : 0.0;
  out.thrust_mag[0] = mag;
  out.thrust_mag[1] = mag;
  return out;
}

}  // namespace tbsim
