#pragma once

#include "tbsim/contact.hpp"
#include "tbsim/gait.hpp"
#include "tbsim/sim.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tbsim {

inline constexpr double kJoulePerKgfM = 9.80665;

struct AnalysisConfig {
  double K_i = 1.0;                 // energy normalization constant
  bool paper_sign = false;          // flip reported energy/acceleration signs
  double thrust_pitch_offset = 0.0; // rad, added to theta_p in F_z = F sin(theta_p + off)
  double window = 0.5;              // s, sliding window for tracking stats
  double cycle_hysteresis = 0.05;   // amplitude fraction for cycle detection
  double envelope_rel = 0.5;        // limit-cycle boundedness envelope
  bool torque_from_current = false; // use the current columns instead of tau

  void validate(const std::string& where = "<analysis>") const;
};

/// Torso->foot vectors in the body frame: actual (P_BF), nominal (P_NB) and
/// their difference (P_FN = P_BF - P_NB).
struct FootVectors {
  std::vector<double> t;
  std::vector<Vec3> P_BF;
  Vec3 P_NB;
  std::vector<Vec3> P_FN;
};

struct StepParamsEstimate {
  double z_top, z_bottom, x_fore, x_hind;
  double t_begin, t_end;
};

struct TrackingStats {
  struct Group {
    std::string name;
    double mean_deg, std_deg;                  // over the full span
    std::vector<double> window_t;              // sliding-window series
    std::vector<double> window_mean_deg, window_std_deg;
  };
  std::array<Group, 3> groups;  // frontal, sagittal, knee (L/R averaged)
};

struct EnergyBreakdown {
  std::vector<double> t;
  std::vector<double> E_leg;        // cumulative, J
  std::vector<double> E_thruster;   // cumulative, J (paper F_z v_z formula)
  std::vector<double> E_thruster_kgfm;
  struct PhaseTotal {
    JumpPhase phase;
    double t_begin, t_end;
    double leg_J, thruster_J;
  };
  std::vector<PhaseTotal> per_phase;
};

struct AccelDecomposition {
  std::vector<double> t;
  std::vector<double> a_tot, a_uth, a_l, a_g;
};

struct LimitCycleReport {
  std::string coordinate;
  int cycles = 0;
  double pos_min = 0, pos_max = 0, vel_min = 0, vel_max = 0;  // amplitude bounds
  std::vector<double> cycle_max, cycle_min;  // per-cycle position extrema
  double extrema_std = 0;                    // step-to-step std of cycle_max
  double closure_score = 0;  // mean loop-to-loop distance / loop diameter
  bool bounded = false;
};

struct PhaseInterval {
  JumpPhase phase;
  double t_begin, t_end;
  std::size_t row_begin, row_end;  // [begin, end)
};

struct EnergyAudit {
  double dE_mech;       // (K+V) end minus start, J
  double E_leg_work;    // integral of tau . qd, J
  double E_thruster_work;  // full 3-D thruster work, J
  double E_contact_work;   // work done by ground forces on the feet, J (<= 0 net)
  double residual;      // dE_mech - (E_leg + E_thruster + E_contact)
  double residual_rel;  // |residual| / max(1, |dE_mech|)
};

FootVectors foot_displacement(const TrajectoryLog& log, const RobotParams& params,
                              const GaitConfig& gait, Side side);

/// Per-cycle extrema of a P_FN series. `boundaries` are row indices delimiting
/// cycles (size >= 2). Throws InsufficientData without a complete cycle.
std::vector<StepParamsEstimate> extract_step_params(const FootVectors& fv,
                                                    const std::vector<std::size_t>& boundaries);

TrackingStats joint_tracking_stats(const TrajectoryLog& log, const AnalysisConfig& cfg);

/// tau = K_t * i (gear ratio folded into K_t per RobotParams flag).
double torque_from_current(double current, const RobotParams& params);

EnergyBreakdown leg_energy(const TrajectoryLog& log, const RobotParams& params,
                           const AnalysisConfig& cfg);

EnergyBreakdown thruster_energy(const TrajectoryLog& log, const AnalysisConfig& cfg);

/// Merges leg_energy and thruster_energy (the CLI's "energy" report).
EnergyBreakdown energy_breakdown(const TrajectoryLog& log, const RobotParams& params,
                                 const AnalysisConfig& cfg);

AccelDecomposition acceleration_decomposition(const TrajectoryLog& log, const RobotParams& params,
                                              const AnalysisConfig& cfg);

/// Cycle boundaries of a coordinate series: upward zero crossings of its
/// velocity with amplitude hysteresis.
std::vector<std::size_t> detect_cycles(const std::vector<double>& pos,
                                       const std::vector<double>& vel, double hysteresis);

LimitCycleReport limit_cycle_metrics(const std::vector<double>& t, const std::vector<double>& pos,
                                     const std::vector<double>& vel,
                                     const std::vector<std::size_t>& boundaries,
                                     const AnalysisConfig& cfg, const std::string& name);

/// Convenience: runs detect_cycles on a named log coordinate.
LimitCycleReport limit_cycle_metrics(const TrajectoryLog& log, const std::string& pos_col,
                                     const std::string& vel_col, const AnalysisConfig& cfg);

/// Contiguous intervals of equal jump-phase label. When the label column is
/// absent (foreign logs), phases are re-derived from the contact flags.
std::vector<PhaseInterval> phase_segmentation(const TrajectoryLog& log);

/// Row indices delimiting gait cycles for one leg: swing->stance transitions
/// of the leg-phase label, falling back to velocity zero crossings of the
/// body-frame foot height when the labels never alternate.
std::vector<std::size_t> step_cycle_boundaries(const TrajectoryLog& log, Side side,
                                               double hysteresis);

/// Mechanical-energy bookkeeping over the log: dE_mech vs leg work plus full
/// thruster work plus contact work. Thruster work is reconstructed from the
/// logged magnitudes and the configured thrust direction convention.
EnergyAudit energy_audit(const TrajectoryLog& log, const RobotParams& params);

}  // namespace tbsim
