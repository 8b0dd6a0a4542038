#pragma once

#include "tbsim/kinematics.hpp"

namespace tbsim {

/// Actuation and external-force inputs of the matrix-form equations of
/// motion. u_t and u_g stack the left then right 3-vectors; u_t is expressed
/// in the inertial frame at this level (frame conventions are resolved by
/// the caller, see RobotParams::thrust_frame).
struct ControlInput {
  Vec6 u_j = Vec6::Zero();  // joint torques, N m (gam_L, gam_R, phih_L, phih_R, phik_L, phik_R)
  Vec6 u_t = Vec6::Zero();  // thruster forces [f_L; f_R], N
  Vec6 u_g = Vec6::Zero();  // ground reaction forces [f_L; f_R], N

  void validate(const RobotParams& params) const;
};

struct DynamicsMatrices {
  Mat12 M;
  Vec12 h;
  Mat12x6 B_j, B_t, B_g;
};

double kinetic_energy(const GeneralizedState& state, const RobotParams& params);

/// Gravitational potential, gauged to zero at the zero pose (p_B = 0,
/// identity orientation, zero joints).
double potential_energy(const GeneralizedState& state, const RobotParams& params);

Mat12 mass_matrix(const GeneralizedState& state, const RobotParams& params);

/// Coriolis, centrifugal and gravity terms: M qdd + h = B u.
Vec12 bias_forces(const GeneralizedState& state, const RobotParams& params);

struct InputMatrices {
  Mat12x6 B_j, B_t, B_g;
};
InputMatrices input_matrices(const GeneralizedState& state, const RobotParams& params);

DynamicsMatrices dynamics_matrices(const GeneralizedState& state, const RobotParams& params);

/// qdd = M^-1 (B_j u_j + B_t u_t + B_g u_g - h). Throws LinearSolveError when
/// M is not SPD to working precision (rcond < 1e-12).
Vec12 forward_dynamics_unconstrained(const GeneralizedState& state, const ControlInput& input,
                                     const RobotParams& params);

}  // namespace tbsim
