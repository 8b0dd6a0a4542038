#pragma once

#include "tbsim/types.hpp"

namespace tbsim {

/// Unilateral compliant ground model: spring-damper normal force plus
/// velocity-regularized Coulomb friction against the plane z = ground_height.
struct ContactParams {
  double k_g = 2.0e4;   // normal stiffness, N/m
  double b_g = 200.0;   // normal damping, N s/m
  double mu = 0.8;      // Coulomb friction coefficient
  double v_slip = 1e-3; // tangential regularization velocity, m/s
  double ground_height = 0.0;  // m
  Vec3 n = Vec3(0.0, 0.0, 1.0);  // contact normal, unit

  void validate(const std::string& where = "<contact>") const;
};

struct ContactState {
  double delta_n = 0.0;      // penetration depth, m (positive below ground)
  double delta_n_dot = 0.0;  // penetration rate, m/s
  bool in_contact = false;
  Vec3 force = Vec3::Zero(); // force on the foot, inertial frame, N
};

/// Piecewise contact law: zero force for delta_n <= 0; otherwise
///   F = max(0, k_g delta_n + b_g delta_n_dot) n + f_f,
///   f_f = -mu F_n tanh(|v_t| / v_slip) v_t_hat.
/// The normal force is clamped at zero from below (no adhesion).
ContactState ground_force(const Vec3& foot_pos, const Vec3& foot_vel, const ContactParams& cp);

}  // namespace tbsim
