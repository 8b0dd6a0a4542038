#include "tbsim/kinematics.hpp"

#include <cmath>

namespace tbsim {

namespace {

const Vec3 kEx(1.0, 0.0, 0.0);
const Vec3 kEy(0.0, 1.0, 0.0);
const Vec3 kEz(0.0, 0.0, 1.0);

}  // namespace

Mat3 elementary_rotation(Axis axis, double angle) {
  if (!std::isfinite(angle)) throw SimError("elementary_rotation: non-finite angle");
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 R;
  switch (axis) {
    case Axis::X:
      R << 1, 0, 0, 0, c, -s, 0, s, c;
      break;
    case Axis::Y:
      R << c, 0, s, 0, 1, 0, -s, 0, c;
      break;
    case Axis::Z:
      R << c, -s, 0, s, c, 0, 0, 0, 1;
      break;
  }
  return R;
}

Mat3 body_rotation(const Vec3& e) {
  if (!e.allFinite()) throw SimError("body_rotation: non-finite euler angles");
  if (std::abs(e[1]) >= kPitchGuard)
    throw SingularityError("pitch " + std::to_string(e[1]) + " rad violates the XYZ Euler guard");
  return elementary_rotation(Axis::X, e[0]) * elementary_rotation(Axis::Y, e[1]) *
         elementary_rotation(Axis::Z, e[2]);
}

Mat3 euler_rate_matrix(const Vec3& e) {
  const double cb = std::cos(e[1]), sb = std::sin(e[1]);
  const double cc = std::cos(e[2]), sc = std::sin(e[2]);
  Mat3 E;
  E << cb * cc, sc, 0, -cb * sc, cc, 0, sb, 0, 1;
  return E;
}

Vec3 lower_leg_offset(double phi_k, const RobotParams& params) {
  return Vec3(-params.l4a * std::cos(phi_k), 0.0,
              -(params.l4b + params.l4a * std::sin(phi_k)));
}

LegKinematics leg_kinematics(const GeneralizedState& state, const RobotParams& params, Side side) {
  state.validate();
  LegKinematics k;

  const Vec3 euler = state.body_euler();
  k.R_B = body_rotation(euler);

  const double gamma = state.q[coord::gamma(side)];
  const double phi_h = state.q[coord::phi_h(side)];
  const double phi_k = state.q[coord::phi_k(side)];
  const Mat3 Rx = elementary_rotation(Axis::X, gamma);
  const Mat3 Ry = elementary_rotation(Axis::Y, phi_h);
  k.R_P = k.R_B * Rx;
  k.R_H = k.R_P * Ry;

  const Vec3 l1 = params.link1(side);
  const Vec3 lt = params.thruster_offset(side);

  // Ry(phi_k) * l4(phi_k) collapses to this closed form.
  const double sk = std::sin(phi_k), ck = std::cos(phi_k);
  const Vec3 u(-(params.l4a + params.l4b * sk), 0.0, -params.l4b * ck);
  const Vec3 du(-params.l4b * ck, 0.0, params.l4b * sk);

  // Body-frame chain offsets.
  const Vec3 c_P = l1;
  const Vec3 c_H = l1 + Rx * params.l2;
  const Vec3 c_K = c_H + Rx * (Ry * params.l3);
  const Vec3 c_F = c_K + Rx * (Ry * u);

  const Vec3 p_B = state.body_pos();
  k.p_P = p_B + k.R_B * c_P;
  k.p_H = p_B + k.R_B * c_H;
  k.p_K = p_B + k.R_B * c_K;
  k.p_F = p_B + k.R_B * c_F;
  k.p_T = p_B + k.R_B * lt;

  // World-frame Euler rotation axes of R_B = Rx(e0) Ry(e1) Rz(e2).
  const Mat3 Rx_e = elementary_rotation(Axis::X, euler[0]);
  const Mat3 Ry_e = elementary_rotation(Axis::Y, euler[1]);
  const Vec3 a1 = kEx;
  const Vec3 a2 = Rx_e * kEy;
  const Vec3 a3 = Rx_e * (Ry_e * kEz);

  const int ig = coord::gamma(side);
  const int ih = coord::phi_h(side);
  const int ik = coord::phi_k(side);

  auto point_jac = [&](const Vec3& c, Mat3x12& J) {
    J.setZero();
    J.block<3, 3>(0, 0).setIdentity();
    const Vec3 wc = k.R_B * c;
    J.col(3) = a1.cross(wc);
    J.col(4) = a2.cross(wc);
    J.col(5) = a3.cross(wc);
  };

  point_jac(c_H, k.Jv_H);
  k.Jv_H.col(ig) = k.R_B * (kEx.cross(c_H - l1));

  point_jac(c_K, k.Jv_K);
  k.Jv_K.col(ig) = k.R_B * (kEx.cross(c_K - l1));
  k.Jv_K.col(ih) = k.R_P * (kEy.cross(Ry * params.l3));

  point_jac(c_F, k.Jv_F);
  k.Jv_F.col(ig) = k.R_B * (kEx.cross(c_F - l1));
  k.Jv_F.col(ih) = k.R_P * (kEy.cross(Ry * (params.l3 + u)));
  k.Jv_F.col(ik) = k.R_H * du;

  point_jac(lt, k.Jv_T);

  // Angular-velocity Jacobians, each segment's own frame.
  const Mat3 E = euler_rate_matrix(euler);
  k.Jw_B.setZero();
  k.Jw_B.block<3, 3>(0, 3) = E;

  k.Jw_H.setZero();
  k.Jw_H.block<3, 3>(0, 3) = Rx.transpose() * E;
  k.Jw_H.col(ig) = kEx;  // Rx^T ex = ex

  k.Jw_K.setZero();
  k.Jw_K.block<3, 3>(0, 3) = Ry.transpose() * (Rx.transpose() * E);
  k.Jw_K.col(ig) = Ry.transpose() * kEx;
  k.Jw_K.col(ih) = kEy;  // Ry^T ey = ey

  return k;
}

FrameSet forward_kinematics(const GeneralizedState& state, const RobotParams& params, Side side) {
  const LegKinematics k = leg_kinematics(state, params, side);
  return FrameSet{k.p_P, k.p_H, k.p_K, k.p_F, k.p_T, k.R_B};
}

AngularVelocities angular_velocities(const GeneralizedState& state, const RobotParams& params,
                                     Side side) {
  state.validate();
  (void)params;
  const Mat3 E = euler_rate_matrix(state.body_euler());
  const double gamma = state.q[coord::gamma(side)];
  const double gd = state.qd[coord::gamma(side)];
  const double phd = state.qd[coord::phi_h(side)];

  AngularVelocities w;
  w.omega_B_B = E * state.euler_rates();
  w.omega_H_B = Vec3(gd, 0.0, 0.0) + w.omega_B_B;
  const Vec3 omega_H_H = elementary_rotation(Axis::X, gamma).transpose() * w.omega_H_B;
  w.omega_K_H = Vec3(0.0, phd, 0.0) + omega_H_H;
  return w;
}

Mat3x12 point_jacobian(const GeneralizedState& state, const RobotParams& params, PointId point) {
  switch (point) {
    case PointId::FootLeft:
      return leg_kinematics(state, params, Side::Left).Jv_F;
    case PointId::FootRight:
      return leg_kinematics(state, params, Side::Right).Jv_F;
    case PointId::ThrusterLeft:
      return leg_kinematics(state, params, Side::Left).Jv_T;
    case PointId::ThrusterRight:
      return leg_kinematics(state, params, Side::Right).Jv_T;
  }
  throw SimError("point_jacobian: bad point id");
}

Vec3 body_frame_foot(const Vec6& joints, const RobotParams& params, Side side) {
  GeneralizedState s;
  s.q.segment<6>(coord::kJointBase) = joints;
  return leg_kinematics(s, params, side).p_F;
}

LegWorkspace leg_workspace(const RobotParams& params) {
  const double l3x = params.l3.x(), l3z = params.l3.z();
  const double C = params.l3.squaredNorm() + params.l4a * params.l4a +
                   params.l4b * params.l4b - 2.0 * l3x * params.l4a - params.l3.y() * params.l3.y();
  const double A = 2.0 * params.l4b * std::hypot(params.l4a - l3x, l3z);
  LegWorkspace ws;
  ws.r_min = std::sqrt(std::max(0.0, C - A));
  ws.r_max = std::sqrt(std::max(0.0, C + A));
  return ws;
}

}  // namespace tbsim
