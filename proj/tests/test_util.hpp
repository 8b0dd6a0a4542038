#pragma once

#include "tbsim/kinematics.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace tbsim::test {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random non-singular state: pitch held inside the Euler guard.
inline GeneralizedState random_state(std::mt19937_64& rng, double vel_scale = 2.0) {
  GeneralizedState s;
  for (int i = 0; i < 3; ++i) s.q[i] = uniform(rng, -0.5, 0.5);
  s.q[3] = uniform(rng, -1.2, 1.2);
  s.q[4] = uniform(rng, -1.3, 1.3);  // pitch, guard at pi/2 - 1e-3
  s.q[5] = uniform(rng, -1.2, 1.2);
  for (int i = 6; i < 12; ++i) s.q[i] = uniform(rng, -2.0, 2.0);
  for (int i = 0; i < 12; ++i) s.qd[i] = uniform(rng, -vel_scale, vel_scale);
  return s;
}

// ---------------------------------------------------------------------------
// Independent homogeneous-transform-chain oracle. Composes 4x4 matrices only;
// shares nothing with the production point-arithmetic path.
// ---------------------------------------------------------------------------

inline Eigen::Matrix4d h_trans(const Vec3& v) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 1>(0, 3) = v;
  return T;
}

inline Eigen::Matrix4d h_rot(const Mat3& R) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 3>(0, 0) = R;
  return T;
}

inline Mat3 h_rx(double a) {
  Mat3 R;
  R << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return R;
}
inline Mat3 h_ry(double a) {
  Mat3 R;
  R << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return R;
}
inline Mat3 h_rz(double a) {
  Mat3 R;
  R << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return R;
}

struct OracleFrames {
  Vec3 p_P, p_H, p_K, p_F, p_T;
  Mat3 R_B;
};

// Exact velocity oracle: product-rule differentiation of the homogeneous
// chain, independent of the production Jacobian construction.

inline Mat3 dh_rx(double a) {
  Mat3 R;
  R << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
  return R;
}
inline Mat3 dh_ry(double a) {
  Mat3 R;
  R << -std::sin(a), 0, std::cos(a), 0, 0, 0, -std::cos(a), 0, -std::sin(a);
  return R;
}
inline Mat3 dh_rz(double a) {
  Mat3 R;
  R << -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a), 0, 0, 0, 0;
  return R;
}

struct ChainFactor {
  Eigen::Matrix4d M;
  Eigen::Matrix4d Mdot;  // time derivative (parameter derivative times rate)
};

inline ChainFactor f_rot(const Mat3& R, const Mat3& dR, double rate) {
  ChainFactor f;
  f.M = h_rot(R);
  f.Mdot = Eigen::Matrix4d::Zero();
  f.Mdot.block<3, 3>(0, 0) = dR * rate;
  return f;
}
inline ChainFactor f_trans(const Vec3& v, const Vec3& vdot = Vec3::Zero()) {
  ChainFactor f;
  f.M = h_trans(v);
  f.Mdot = Eigen::Matrix4d::Zero();
  f.Mdot.block<3, 1>(0, 3) = vdot;
  return f;
}

struct ChainVel {
  Vec3 pos;
  Vec3 vel;
  Vec3 omega_local;  // angular velocity in the frame of the chain tip
};

inline ChainVel chain_velocity(const std::vector<ChainFactor>& chain) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (const auto& f : chain) T = T * f.M;
  Eigen::Matrix4d Tdot = Eigen::Matrix4d::Zero();
  for (std::size_t k = 0; k < chain.size(); ++k) {
    Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
    for (std::size_t j = 0; j < chain.size(); ++j) term = term * (j == k ? chain[j].Mdot : chain[j].M);
    Tdot += term;
  }
  ChainVel cv;
  cv.pos = T.block<3, 1>(0, 3);
  cv.vel = Tdot.block<3, 1>(0, 3);
  const Mat3 R = T.block<3, 3>(0, 0);
  const Mat3 W = R.transpose() * Tdot.block<3, 3>(0, 0);
  cv.omega_local = Vec3(W(2, 1), W(0, 2), W(1, 0));
  return cv;
}

/// Per-body positions, velocities and local angular velocities for the five
/// massive bodies, derived purely from the 4x4 chain.
struct OracleBodies {
  ChainVel B, H[2], K[2];
};

inline OracleBodies oracle_body_velocities(const GeneralizedState& s, const RobotParams& p) {
  const Vec3 e = s.body_euler();
  const Vec3 ed = s.euler_rates();
  OracleBodies ob;
  const std::vector<ChainFactor> base = {
      f_trans(s.body_pos(), s.body_vel()),
      f_rot(h_rx(e[0]), dh_rx(e[0]), ed[0]),
      f_rot(h_ry(e[1]), dh_ry(e[1]), ed[1]),
      f_rot(h_rz(e[2]), dh_rz(e[2]), ed[2]),
  };
  ob.B = chain_velocity(base);
  for (Side side : {Side::Left, Side::Right}) {
    const int i = static_cast<int>(side);
    const double sgn = side == Side::Left ? 1.0 : -1.0;
    const Vec3 l1(p.l1.x(), sgn * p.l1.y(), p.l1.z());
    const double gam = s.q[coord::gamma(side)];
    const double gd = s.qd[coord::gamma(side)];
    const double phh = s.q[coord::phi_h(side)];
    const double phd = s.qd[coord::phi_h(side)];

    std::vector<ChainFactor> hip = base;
    hip.push_back(f_trans(l1));
    hip.push_back(f_rot(h_rx(gam), dh_rx(gam), gd));
    hip.push_back(f_trans(p.l2));
    ob.H[i] = chain_velocity(hip);

    std::vector<ChainFactor> knee = hip;
    knee.push_back(f_rot(h_ry(phh), dh_ry(phh), phd));
    knee.push_back(f_trans(p.l3));
    ob.K[i] = chain_velocity(knee);
  }
  return ob;
}

inline OracleFrames oracle_fk(const GeneralizedState& s, const RobotParams& p, Side side) {
  const Vec3 e = s.body_euler();
  const double sgn = side == Side::Left ? 1.0 : -1.0;
  const Vec3 l1(p.l1.x(), sgn * p.l1.y(), p.l1.z());
  const Vec3 lt(p.lt.x(), sgn * p.lt.y(), p.lt.z());
  const double gam = s.q[coord::gamma(side)];
  const double phh = s.q[coord::phi_h(side)];
  const double phk = s.q[coord::phi_k(side)];
  const Vec3 l4(-p.l4a * std::cos(phk), 0.0, -(p.l4b + p.l4a * std::sin(phk)));

  const Eigen::Matrix4d T_B =
      h_trans(s.body_pos()) * h_rot(h_rx(e[0])) * h_rot(h_ry(e[1])) * h_rot(h_rz(e[2]));
  const Eigen::Matrix4d T_P = T_B * h_trans(l1);
  const Eigen::Matrix4d T_H = T_P * h_rot(h_rx(gam)) * h_trans(p.l2);
  const Eigen::Matrix4d T_K = T_H * h_rot(h_ry(phh)) * h_trans(p.l3);
  const Eigen::Matrix4d T_F = T_K * h_rot(h_ry(phk)) * h_trans(l4);
  const Eigen::Matrix4d T_T = T_B * h_trans(lt);

  OracleFrames f;
  f.p_P = T_P.block<3, 1>(0, 3);
  f.p_H = T_H.block<3, 1>(0, 3);
  f.p_K = T_K.block<3, 1>(0, 3);
  f.p_F = T_F.block<3, 1>(0, 3);
  f.p_T = T_T.block<3, 1>(0, 3);
  f.R_B = T_B.block<3, 3>(0, 0);
  return f;
}

}  // namespace tbsim::test
