#pragma once

#include "tbsim/dynamics.hpp"

#include <vector>

namespace tbsim {

/// Coordinate-selection holonomic constraints (the gantry locks q_y, roll and
/// yaw). The constraint Jacobian is a constant selector matrix, so
/// Jdot * qd = 0 identically. Baumgarte feedback stabilizes drift:
/// the acceleration-level constraint solved is
///   J_c qdd = -2 alpha (J_c qd) - beta f(q).
struct ConstraintSet {
  std::vector<int> coords;      // generalized-coordinate indices held at zero
  double baumgarte_alpha = 20.0;   // 1/s
  double baumgarte_beta = 100.0;   // 1/s^2

  static ConstraintSet gantry(double alpha = 20.0, double beta = 100.0);
  static ConstraintSet none();

  int rows() const { return static_cast<int>(coords.size()); }
  bool empty() const { return coords.empty(); }

  /// f(q): the constrained coordinates themselves.
  Eigen::VectorXd residual(const GeneralizedState& state) const;

  /// Constant selector matrix, rows() x 12, one unit entry per row.
  Eigen::MatrixXd jacobian() const;
};

/// Result of the simultaneous acceleration / constraint-force solve.
/// lambda follows the augmented-EoM sign convention
///   M qdd + h = B u + J_c^T lambda,
/// i.e. lambda is the force the gantry applies to the robot.
struct ConstrainedAccel {
  Vec12 qdd;
  Eigen::VectorXd lambda;
};

/// Solves the KKT block system
///   [ M  J_c^T ] [ qdd ]   [ B u - h ]
///   [ J_c  0   ] [ -lambda ] = [ rhs_c ]
/// with a pivoted LU factorization. Sufficient conditions documented for
/// invertibility: M SPD and rank(J_c) = rows. Throws LinearSolveError
/// otherwise. With an empty ConstraintSet this reduces to the unconstrained
/// forward dynamics.
ConstrainedAccel solve_constrained_dynamics(const GeneralizedState& state,
                                            const ControlInput& input, const RobotParams& params,
                                            const ConstraintSet& constraints);

/// Independent Schur-complement route (lambda from J M^-1 J^T), used as a
/// cross-check of the KKT factorization.
ConstrainedAccel solve_constrained_dynamics_schur(const GeneralizedState& state,
                                                  const ControlInput& input,
                                                  const RobotParams& params,
                                                  const ConstraintSet& constraints);

}  // namespace tbsim
