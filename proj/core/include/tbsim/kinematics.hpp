#pragma once

#include "tbsim/robot_params.hpp"
#include "tbsim/state.hpp"

namespace tbsim {

enum class Axis { X, Y, Z };

enum class PointId { FootLeft, FootRight, ThrusterLeft, ThrusterRight };

/// Inertial-frame positions of the frame-chain points for one leg side,
/// plus the body rotation.
struct FrameSet {
  Vec3 p_P, p_H, p_K, p_F, p_T;
  Mat3 R_B;
};

/// Angular velocities in the paper-chain recursion conventions:
/// omega_B_B is the body's angular velocity in its own frame, omega_H_B the
/// pelvis segment's in body coordinates, omega_K_H the thigh segment's in
/// pelvis-segment coordinates.
struct AngularVelocities {
  Vec3 omega_B_B;
  Vec3 omega_H_B;
  Vec3 omega_K_H;
};

/// Everything the dynamics assembly needs for one leg side, world frame.
/// Jw_* map qd to each segment's angular velocity expressed in that
/// segment's local frame.
struct LegKinematics {
  Vec3 p_P, p_H, p_K, p_F, p_T;
  Mat3 R_B;  // body -> inertial
  Mat3 R_P;  // pelvis segment (R_B * Rx(gamma))
  Mat3 R_H;  // thigh segment (R_P * Ry(phi_h))
  Mat3x12 Jv_H, Jv_K, Jv_F, Jv_T;
  Mat3x12 Jw_B, Jw_H, Jw_K;
};

Mat3 elementary_rotation(Axis axis, double angle);

/// R = Rx(e0) * Ry(e1) * Rz(e2). Throws SingularityError when |pitch|
/// exceeds the guard.
Mat3 body_rotation(const Vec3& euler_xyz);

/// E(euler) mapping XYZ Euler rates to the body-frame angular velocity,
/// omega_B^B = E * euler_dot. Columns: [Rz^T Ry^T ex, Rz^T ey, ez].
/// det(E) = cos(pitch); singular exactly at the pitch guard.
Mat3 euler_rate_matrix(const Vec3& euler_xyz);

/// Knee-frame lower-leg vector of the parallel linkage:
/// [-l4a cos(phi_k), 0, -(l4b + l4a sin(phi_k))].
Vec3 lower_leg_offset(double phi_k, const RobotParams& params);

FrameSet forward_kinematics(const GeneralizedState& state, const RobotParams& params, Side side);

AngularVelocities angular_velocities(const GeneralizedState& state, const RobotParams& params,
                                     Side side);

/// 3x12 inertial-frame point Jacobian: J * qd = point velocity.
Mat3x12 point_jacobian(const GeneralizedState& state, const RobotParams& params, PointId point);

LegKinematics leg_kinematics(const GeneralizedState& state, const RobotParams& params, Side side);

/// Body-frame foot position from joint angles alone (torso at origin,
/// identity orientation). This is the analyzer's P_BF.
Vec3 body_frame_foot(const Vec6& joints, const RobotParams& params, Side side);

/// Leg workspace described as a radius annulus about the hip point: the set
/// of body-frame targets T with |T - (l1+l2)| in [r_min, r_max] (and matching
/// lateral plane) is reachable.
struct LegWorkspace {
  double r_min, r_max;
};
LegWorkspace leg_workspace(const RobotParams& params);

}  // namespace tbsim
