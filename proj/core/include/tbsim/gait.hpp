#pragma once

#include "tbsim/kinematics.hpp"

#include <utility>
#include <vector>

namespace tbsim {

enum class Scenario { Drop, Trot, Jump };

enum class JumpPhase { Idle = 0, TakeOff = 1, Ballistic = 2, TouchDown = 3 };
enum class LegPhase { Stance = 0, Swing = 1 };

struct PhaseLabel {
  JumpPhase jump_phase = JumpPhase::Idle;
  LegPhase leg[2] = {LegPhase::Stance, LegPhase::Stance};

  LegPhase leg_phase(Side s) const { return leg[static_cast<int>(s)]; }
};

/// Foot-trajectory parameterization: vertical excursion extrema (z_top,
/// z_bottom) and sagittal reach extrema (x_fore, x_hind), relative to the
/// nominal foot point.
struct StepParams {
  double z_top = 0.06;
  double z_bottom = -0.01;
  double x_fore = 0.08;
  double x_hind = -0.08;
  double step_period = 0.32;  // s
  double duty = 0.5;          // stance fraction of the cycle

  void validate(const std::string& where = "<gait.step>") const;
};

/// Piecewise-linear thrust magnitude vs time-in-phase, per side. Empty or
/// missing phases evaluate to zero; the value holds beyond the last knot.
struct ThrustProfile {
  std::vector<std::pair<double, double>> takeoff{{0.0, 0.0}, {0.4, 29.43}};
  std::vector<std::pair<double, double>> ballistic{{0.0, 19.62}};

  double eval(JumpPhase phase, double t_phase) const;
};

/// Affine PWM -> thrust calibration.
struct PwmMap {
  double slope = 0.049;  // N per PWM unit
  double offset = 0.0;   // N

  double thrust(double pwm) const { return slope * pwm + offset; }
  double pwm(double thrust_n) const { return (thrust_n - offset) / slope; }
};

struct ControllerGains {
  // Per-joint PD gains, layout (gam_L, gam_R, phih_L, phih_R, phik_L, phik_R).
  Vec6 kp_j = (Vec6() << 1200, 1200, 1200, 1200, 1200, 1200).finished();
  Vec6 kd_j = (Vec6() << 16, 16, 16, 16, 16, 16).finished();
  double torque_limit = 80.0;  // N m

  ThrustProfile thrust_profile;
  PwmMap pwm_map;

  double raibert_gain = 0.03;   // s; foot-placement shift per velocity error
  double v_des_x = 0.0;         // m/s, sagittal velocity setpoint
  double station_gain = 0.3;    // 1/s; x drift folded into velocity setpoint
  double raibert_shift_max = 0.02;  // m

  // COM-over-support balance: grounded-phase foot targets shift in world x by
  //   balance_kp * (com_x - support_x) + balance_kd * com_vx
  //     + balance_pitch_kp * pitch + balance_pitch_kd * pitch_rate.
  // Through the pinned feet this steers the COM relative to the support; the
  // pitch terms bias the COM off-support to torque the assembly upright.
  double balance_kp = 2.0;          // m per m of COM offset
  double balance_kd = 0.8;          // s
  double balance_pitch_kp = 0.2;    // m per rad
  double balance_pitch_kd = 0.06;   // m s per rad
  double balance_shift_max = 0.04;  // m

  // Optional raw stance-hip torque on pitch error (off by default; with
  // point feet its dominant effect is body translation, which fights the
  // balance loop).
  double pitch_kp = 0.0;  // N m / rad
  double pitch_kd = 0.0;  // N m s / rad

  // Feedforward: gravity-gradient joint torques minus the expected stance
  // support wrench. Without it the PD sags under load and the resulting foot
  // creep saturates the regularized friction.
  bool gravity_ff = true;

  void validate(const std::string& where = "<controller>") const;
};

struct JumpParams {
  double start = 0.3;          // s, crouch begin / thruster ignition
  double crouch_depth = 0.10;  // m body drop during crouch
  double crouch_time = 0.22;   // s
  double extend_time = 0.12;   // s
  double extend_depth = 0.02;  // m leg extension beyond nominal
  double takeoff_max = 0.8;    // s, failsafe cap on the TakeOff phase
  double settle_time = 0.4;    // s, TouchDown duration
  double land_x = 0.0;         // m, ballistic foot target (body frame, rel nominal)
  double land_clear = 0.08;    // m above nominal during flight
  double retract_time = 0.15;  // s, blend into the flight configuration
};

struct GaitConfig {
  StepParams step;
  Vec3 nominal_foot = Vec3(0.0, -0.05, -0.5);  // left side; y mirrors
  double trot_start = 0.2;  // s of standing before the first step
  JumpParams jump;

  void validate(const std::string& where = "<gait>") const;
};

/// Configured nominal foot point P_N in the body frame.
Vec3 nominal_foot_point(const GaitConfig& cfg, Side side);

/// Body-frame foot trajectory relative to the nominal point over one gait
/// cycle. Stance occupies [0, duty*T): a straight drag from x_fore to x_hind
/// dipping to z_bottom at its midpoint; swing occupies the rest: an arc from
/// x_hind to x_fore with apex z_top. C1 across both boundaries, extrema equal
/// the StepParams exactly. Throws PhaseError for t_phase outside [0, T).
Vec3 foot_reference(const StepParams& sp, double t_phase);

/// Closed-form leg IK: returns (gamma, phi_h, phi_k) such that the body-frame
/// foot position reproduces the target. Selects the branch containing the
/// zero pose (knee-forward). Throws UnreachableTarget with the distance to
/// the workspace annulus.
Vec3 inverse_kinematics(const Vec3& foot_target_body, const RobotParams& params, Side side);

/// Elementwise PD on the six joints, saturated at gains.torque_limit.
Vec6 joint_pd(const Vec6& q_des, const Vec6& qd_des, const GeneralizedState& state,
              const ControllerGains& gains);

/// Per-side thrust magnitude for the current phase (both sides equal).
/// Zero in Idle and TouchDown; never exceeds max_thrust.
double thruster_schedule(const PhaseLabel& phase, double t_phase, const ControllerGains& gains,
                         double max_thrust);

struct PhaseSchedule {
  double jump_start = 0.3;
  double takeoff_max = 0.8;
  double settle_time = 0.4;
  double trot_start = 0.2;
  double step_period = 0.32;
  double duty = 0.5;
};

struct PhaseState {
  PhaseLabel label;
  double jump_entry_t = 0.0;  // when the current jump phase was entered
  bool stance_confirmed[2] = {true, true};
  bool jump_done = false;  // latch: one jump per run
};

/// Advances the locomotion phase machine. Jump transitions: Idle->TakeOff on
/// the schedule clock, TakeOff->Ballistic when both feet lose contact,
/// Ballistic->TouchDown on first contact, TouchDown->Idle after settle_time.
/// Trot legs alternate on the duty-cycle clock, with a stance label granted
/// only once contact confirms it.
PhaseState phase_update(const PhaseState& prev, bool contact_L, bool contact_R, double t,
                        const PhaseSchedule& schedule, Scenario mode);

/// Closed-loop gait controller: foot references -> IK -> joint PD plus
/// stance-hip attitude feedback, and the thruster schedule. Advanced by a
/// single owner at the control rate.
class GaitController {
 public:
  GaitController(Scenario mode, const GaitConfig& gait, const ControllerGains& gains,
                 const RobotParams& params);

  struct Output {
    Vec6 u_j = Vec6::Zero();
    double thrust_mag[2] = {0.0, 0.0};  // N, along body +z (or world, per params)
    Vec6 q_des = Vec6::Zero();
    Vec6 qd_des = Vec6::Zero();
    PhaseLabel phase;
  };

  Output update(const GeneralizedState& state, bool contact_L, bool contact_R);

  Scenario mode() const { return mode_; }
  const PhaseState& phase_state() const { return phase_; }

 private:
  // Foot target as a world-aligned offset from the body origin; mapped
  // through R_B^T before IK so stance tracking lives in gravity axes.
  Vec3 foot_target(Side side, double t) const;
  Vec6 desired_joints(double t) const;

  Scenario mode_;
  GaitConfig gait_;
  ControllerGains gains_;
  RobotParams params_;
  PhaseSchedule schedule_;
  PhaseState phase_;
  Vec3 blend_from_[2];
  Mat3 R_B_T_ = Mat3::Identity();  // frozen per control tick
  double raibert_shift_[2] = {0.0, 0.0};
  double balance_shift_ = 0.0;
  double vx_filt_ = 0.0;
  bool have_state_ = false;
};

}  // namespace tbsim
