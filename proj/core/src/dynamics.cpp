#include "tbsim/dynamics.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <cmath>

namespace tbsim {

namespace {

struct BodyRef {
  double m;
  const Mat3* I;
  const Mat3x12* Jv;
  const Mat3x12* Jw;
};

/// Kinematic quantities of the five massive bodies at one configuration.
struct BodySet {
  LegKinematics L, R;
  Mat3x12 Jv_B, Jw_B;

  explicit BodySet(const GeneralizedState& s, const RobotParams& p)
      : L(leg_kinematics(s, p, Side::Left)), R(leg_kinematics(s, p, Side::Right)) {
    Jv_B.setZero();
    Jv_B.block<3, 3>(0, 0).setIdentity();
    Jw_B = L.Jw_B;
  }

  std::array<BodyRef, 5> bodies(const RobotParams& p) const {
    return {BodyRef{p.m_B, &p.I_B, &Jv_B, &Jw_B}, BodyRef{p.m_H, &p.I_H, &L.Jv_H, &L.Jw_H},
            BodyRef{p.m_K, &p.I_K, &L.Jv_K, &L.Jw_K}, BodyRef{p.m_H, &p.I_H, &R.Jv_H, &R.Jw_H},
            BodyRef{p.m_K, &p.I_K, &R.Jv_K, &R.Jw_K}};
  }
};

Mat12 assemble_mass_matrix(const BodySet& bs, const RobotParams& p) {
  Mat12 M = Mat12::Zero();
  // The translational block of a free-floating chain is total_mass * I3.
  M.block<3, 3>(0, 0) = p.total_mass * Mat3::Identity();
  for (const BodyRef& b : bs.bodies(p)) {
    const auto Jr = b.Jv->rightCols<9>();
    const auto Jwr = b.Jw->rightCols<9>();
    M.block<3, 9>(0, 3) += b.m * Jr;
    M.block<9, 9>(3, 3) += b.m * (Jr.transpose() * Jr);
    const Eigen::Matrix<double, 9, 9> T = Jwr.transpose() * ((*b.I) * Jwr);
    M.block<9, 9>(3, 3) += 0.5 * (T + T.transpose());
  }
  // Reflected rotor inertia of the geared joint actuators.
  for (int j = 0; j < coord::kNumJoints; ++j)
    M(coord::kJointBase + j, coord::kJointBase + j) += p.rotor_inertia;
  M.block<9, 3>(3, 0) = M.block<3, 9>(0, 3).transpose();
  return M;
}

Vec12 assemble_bias(const BodySet& bs, const GeneralizedState& state, const RobotParams& p) {
  Vec12 h = Vec12::Zero();
  // Gravity gradient dV/dq = g * sum_i m_i Jv_i^T ez.
  for (const BodyRef& b : bs.bodies(p)) h += (b.m * p.g) * b.Jv->row(2).transpose();

  const double qd_norm = state.qd.norm();
  if (qd_norm == 0.0) return h;

  // Jdot * qd via a central difference of the Jacobians along qd.
  const double eps = 1e-6;
  const Vec12 dir = state.qd / qd_norm;
  GeneralizedState sp = state, sm = state;
  sp.q += eps * dir;
  sm.q -= eps * dir;
  const BodySet bp(sp, p), bm(sm, p);
  const double scale = qd_norm / (2.0 * eps);

  const auto plus = bp.bodies(p);
  const auto minus = bm.bodies(p);
  const auto here = bs.bodies(p);
  for (std::size_t i = 0; i < here.size(); ++i) {
    const BodyRef& b = here[i];
    const Vec3 jdot_qd_v = scale * ((*plus[i].Jv - *minus[i].Jv) * state.qd);
    h += b.m * (b.Jv->transpose() * jdot_qd_v);

    const Vec3 omega = (*b.Jw) * state.qd;
    const Vec3 jdot_qd_w = scale * ((*plus[i].Jw - *minus[i].Jw) * state.qd);
    h += b.Jw->transpose() * ((*b.I) * jdot_qd_w + omega.cross((*b.I) * omega));
  }
  return h;
}

void assemble_inputs(const BodySet& bs, Mat12x6& B_j, Mat12x6& B_t, Mat12x6& B_g) {
  B_j.setZero();
  B_j.block<6, 6>(6, 0).setIdentity();
  B_t.leftCols<3>() = bs.L.Jv_T.transpose();
  B_t.rightCols<3>() = bs.R.Jv_T.transpose();
  B_g.leftCols<3>() = bs.L.Jv_F.transpose();
  B_g.rightCols<3>() = bs.R.Jv_F.transpose();
}

}  // namespace

void ControlInput::validate(const RobotParams& params) const {
  if (!u_j.allFinite() || !u_t.allFinite() || !u_g.allFinite())
    throw SimError("control input has non-finite entries");
  for (int s = 0; s < 2; ++s) {
    const double mag = u_t.segment<3>(3 * s).norm();
    if (mag > params.max_thrust_per_side + 1e-9)
      throw SimError("thruster force " + std::to_string(mag) + " N exceeds per-side maximum " +
                     std::to_string(params.max_thrust_per_side));
  }
}

double kinetic_energy(const GeneralizedState& state, const RobotParams& params) {
  const BodySet bs(state, params);
  double K = 0.0;
  for (const BodyRef& b : bs.bodies(params)) {
    const Vec3 v = (*b.Jv) * state.qd;
    const Vec3 w = (*b.Jw) * state.qd;
    K += b.m * v.squaredNorm() + w.dot((*b.I) * w);
  }
  K += params.rotor_inertia * state.joint_rates().squaredNorm();
  return 0.5 * K;
}

double potential_energy(const GeneralizedState& state, const RobotParams& params) {
  const BodySet bs(state, params);
  double V = params.m_B * state.q[coord::kPz] + params.m_H * (bs.L.p_H.z() + bs.R.p_H.z()) +
             params.m_K * (bs.L.p_K.z() + bs.R.p_K.z());
  // Gauge: V = 0 at the zero pose.
  const double hip_z = params.l1.z() + params.l2.z();
  const double ref = 2.0 * params.m_H * hip_z + 2.0 * params.m_K * (hip_z + params.l3.z());
  return params.g * (V - ref);
}

Mat12 mass_matrix(const GeneralizedState& state, const RobotParams& params) {
  return assemble_mass_matrix(BodySet(state, params), params);
}

Vec12 bias_forces(const GeneralizedState& state, const RobotParams& params) {
  return assemble_bias(BodySet(state, params), state, params);
}

InputMatrices input_matrices(const GeneralizedState& state, const RobotParams& params) {
  InputMatrices im;
  assemble_inputs(BodySet(state, params), im.B_j, im.B_t, im.B_g);
  return im;
}

DynamicsMatrices dynamics_matrices(const GeneralizedState& state, const RobotParams& params) {
  const BodySet bs(state, params);
  DynamicsMatrices dm;
  dm.M = assemble_mass_matrix(bs, params);
  dm.h = assemble_bias(bs, state, params);
  assemble_inputs(bs, dm.B_j, dm.B_t, dm.B_g);
  return dm;
}

Vec12 forward_dynamics_unconstrained(const GeneralizedState& state, const ControlInput& input,
                                     const RobotParams& params) {
  const DynamicsMatrices dm = dynamics_matrices(state, params);
  const Vec12 rhs = dm.B_j * input.u_j + dm.B_t * input.u_t + dm.B_g * input.u_g - dm.h;
  Eigen::LLT<Mat12> llt(dm.M);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12)
    throw LinearSolveError("mass matrix is not SPD to working precision (cond > 1e12) at t=" +
                           std::to_string(state.t));
  return llt.solve(rhs);
}

}  // namespace tbsim
