#pragma once

#include "tbsim/types.hpp"

namespace tbsim {

enum class ThrustFrame { Body, World };

/// Geometric, inertial, actuation and environment constants of the biped.
///
/// Per-side vectors (l1, lt) are stored as their LEFT-side values; the right
/// side mirrors the y-component (see side_sign). All values are overridable
/// through the config file; the defaults are assumptions calibrated so that
/// the zero-pose foot sits exactly nominal_stance_depth below the torso and
/// 0.05 m to the side, and the zero-pose COM has no sagittal offset.
struct RobotParams {
  // Masses, kg. m_H and m_K are per leg side.
  double m_B = 4.5;
  double m_H = 0.6;
  double m_K = 0.4;
  double total_mass = 6.5;

  // Inertia tensors in each body's local frame, kg m^2.
  Mat3 I_B = (Eigen::Vector3d(0.0422, 0.0488, 0.0234)).asDiagonal();
  Mat3 I_H = (Eigen::Vector3d(3.6e-4, 3.6e-4, 3.6e-4)).asDiagonal();
  Mat3 I_K = (Eigen::Vector3d(1.7e-4, 1.7e-4, 1.7e-4)).asDiagonal();

  // Link vectors, m (left side; y mirrors). See class comment.
  Vec3 l1 = Vec3(0.0, -0.05, -0.05);   // torso -> pelvis (hip frontal axis)
  Vec3 l2 = Vec3(-0.10, 0.0, -0.15);   // pelvis -> hip sagittal actuator
  Vec3 l3 = Vec3(0.25, 0.0, -0.03);    // hip -> knee actuator
  double l4a = 0.15;                   // lower-leg linkage lengths
  double l4b = 0.27;
  Vec3 lt = Vec3(0.0, -0.08, 0.05);    // torso -> thruster

  // Actuation.
  double K_t = 0.12;        // joint torque constant, N m / A
  double gear_ratio = 50.0;
  bool torque_constant_includes_gearbox = true;
  // Reflected rotor inertia per joint (I_rotor * gear^2), kg m^2. The lower
  // leg is massless, so this is what gives the knee coordinate its inertia.
  double rotor_inertia = 0.03;
  double max_thrust_per_side = 49.05;  // 5 kgf
  ThrustFrame thrust_frame = ThrustFrame::Body;

  // Environment.
  double g = 9.81;

  // Standing foot depth below the torso at zero joint angles, m.
  double nominal_stance_depth = 0.5;

  /// Throws ConfigError when an invariant is violated. `where` names the
  /// config file (or context) for error messages.
  void validate(const std::string& where = "<params>") const;

  Vec3 link1(Side s) const { return mirrored(l1, s); }
  Vec3 thruster_offset(Side s) const { return mirrored(lt, s); }

  /// Body-frame foot position at zero joint angles (left side; y mirrors).
  Vec3 zero_pose_foot() const;

 private:
  // Stored vectors hold left-side values; the right side mirrors y.
  static Vec3 mirrored(const Vec3& v, Side s) {
    return s == Side::Left ? v : Vec3(v.x(), -v.y(), v.z());
  }
};

}  // namespace tbsim
