#include "tbsim/constraints.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <set>

namespace tbsim {

ConstraintSet ConstraintSet::gantry(double alpha, double beta) {
  ConstraintSet c;
  c.coords = {coord::kPy, coord::kRoll, coord::kYaw};
  c.baumgarte_alpha = alpha;
  c.baumgarte_beta = beta;
  return c;
}

ConstraintSet ConstraintSet::none() { return ConstraintSet{}; }

Eigen::VectorXd ConstraintSet::residual(const GeneralizedState& state) const {
  Eigen::VectorXd r(rows());
  for (int i = 0; i < rows(); ++i) r[i] = state.q[coords[i]];
  return r;
}

Eigen::MatrixXd ConstraintSet::jacobian() const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(rows(), coord::kNumQ);
  for (int i = 0; i < rows(); ++i) J(i, coords[i]) = 1.0;
  return J;
}

namespace {

void check_constraints(const ConstraintSet& c) {
  std::set<int> seen;
  for (int idx : c.coords) {
    if (idx < 0 || idx >= coord::kNumQ)
      throw LinearSolveError("constraint coordinate index out of range");
    if (!seen.insert(idx).second)
      throw LinearSolveError("constraint set is rank deficient (duplicate coordinate)");
  }
}

Eigen::LLT<Mat12> checked_llt(const Mat12& M, double t) {
  Eigen::LLT<Mat12> llt(M);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12)
    throw LinearSolveError("mass matrix is not SPD to working precision (cond > 1e12) at t=" +
                           std::to_string(t));
  return llt;
}

}  // namespace

ConstrainedAccel solve_constrained_dynamics(const GeneralizedState& state,
                                            const ControlInput& input, const RobotParams& params,
                                            const ConstraintSet& constraints) {
  check_constraints(constraints);
  const DynamicsMatrices dm = dynamics_matrices(state, params);
  const Vec12 rhs1 = dm.B_j * input.u_j + dm.B_t * input.u_t + dm.B_g * input.u_g - dm.h;
  const int m = constraints.rows();

  ConstrainedAccel out;
  if (m == 0) {
    out.qdd = checked_llt(dm.M, state.t).solve(rhs1);
    out.lambda.resize(0);
    return out;
  }

  const Eigen::MatrixXd Jc = constraints.jacobian();
  // Acceleration-level constraint with Baumgarte feedback; Jdot*qd = 0 for
  // the constant selector Jacobian.
  Eigen::VectorXd rhs_c(m);
  for (int i = 0; i < m; ++i) {
    const int idx = constraints.coords[i];
    rhs_c[i] = -2.0 * constraints.baumgarte_alpha * state.qd[idx] -
               constraints.baumgarte_beta * state.q[idx];
  }

  const int n = coord::kNumQ + m;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  K.topLeftCorner(12, 12) = dm.M;
  K.topRightCorner(12, m) = Jc.transpose();
  K.bottomLeftCorner(m, 12) = Jc;
  Eigen::VectorXd rhs(n);
  rhs.head<12>() = rhs1;
  rhs.tail(m) = rhs_c;

  // Guard conditioning of M before factorizing the indefinite system.
  (void)checked_llt(dm.M, state.t);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::VectorXd x = lu.solve(rhs);
  const double res = (K * x - rhs).cwiseAbs().maxCoeff();
  if (!x.allFinite() || res > 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
    throw LinearSolveError("KKT solve failed (residual " + std::to_string(res) + ") at t=" +
                           std::to_string(state.t));

  out.qdd = x.head<12>();
  // The block system solves for the multiplier of +Jc^T on the left-hand
  // side; the augmented EoM (M qdd + h = B u + Jc^T lambda) flips its sign.
  out.lambda = -x.tail(m);
  return out;
}

ConstrainedAccel solve_constrained_dynamics_schur(const GeneralizedState& state,
                                                  const ControlInput& input,
                                                  const RobotParams& params,
                                                  const ConstraintSet& constraints) {
  check_constraints(constraints);
  const DynamicsMatrices dm = dynamics_matrices(state, params);
  const Vec12 rhs1 = dm.B_j * input.u_j + dm.B_t * input.u_t + dm.B_g * input.u_g - dm.h;
  const int m = constraints.rows();
  const auto llt = checked_llt(dm.M, state.t);

  ConstrainedAccel out;
  if (m == 0) {
    out.qdd = llt.solve(rhs1);
    out.lambda.resize(0);
    return out;
  }

  const Eigen::MatrixXd Jc = constraints.jacobian();
  Eigen::VectorXd rhs_c(m);
  for (int i = 0; i < m; ++i) {
    const int idx = constraints.coords[i];
    rhs_c[i] = -2.0 * constraints.baumgarte_alpha * state.qd[idx] -
               constraints.baumgarte_beta * state.q[idx];
  }

  const Eigen::MatrixXd Minv_JcT = llt.solve(Jc.transpose());
  const Eigen::MatrixXd S = Jc * Minv_JcT;
  const Vec12 Minv_rhs1 = llt.solve(rhs1);
  Eigen::LDLT<Eigen::MatrixXd> sldlt(S);
  if (sldlt.info() != Eigen::Success)
    throw LinearSolveError("Schur complement factorization failed at t=" + std::to_string(state.t));
  const Eigen::VectorXd mu = sldlt.solve(Jc * Minv_rhs1 - rhs_c);
  out.qdd = llt.solve(rhs1 - Jc.transpose() * mu);
  out.lambda = -mu;
  return out;
}

}  // namespace tbsim
