#include "tbsim/robot_params.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace tbsim {

namespace {

void check_inertia(const Mat3& I, const std::string& where, const std::string& key) {
  if (!I.allFinite()) throw ConfigError(where, key, "inertia tensor has non-finite entries");
  if ((I - I.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError(where, key, "inertia tensor must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(I);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw ConfigError(where, key, "inertia tensor must be positive definite");
}

}  // namespace

void RobotParams::validate(const std::string& where) const {
  if (!(m_B > 0) || !(m_H > 0) || !(m_K > 0))
    throw ConfigError(where, "robot.m_*", "all masses must be > 0");
  const double mass_sum = m_B + 2.0 * m_H + 2.0 * m_K;
  if (std::abs(mass_sum - total_mass) > 1e-9)
    throw ConfigError(where, "robot.total_mass",
                      "component masses sum to " + std::to_string(mass_sum) +
                          ", expected total_mass = " + std::to_string(total_mass));
  check_inertia(I_B, where, "robot.I_B");
  check_inertia(I_H, where, "robot.I_H");
  check_inertia(I_K, where, "robot.I_K");
  if (!(l4a > 0) || !(l4b > 0)) throw ConfigError(where, "robot.l4a/l4b", "must be > 0");
  if (!l1.allFinite() || !l2.allFinite() || !l3.allFinite() || !lt.allFinite())
    throw ConfigError(where, "robot.l*", "link vectors must be finite");
  const double depth = -zero_pose_foot().z();
  if (std::abs(depth - nominal_stance_depth) > 1e-9)
    throw ConfigError(where, "robot.nominal_stance_depth",
                      "zero-pose foot depth " + std::to_string(depth) +
                          " does not match configured stance depth " +
                          std::to_string(nominal_stance_depth));
  if (!(K_t > 0)) throw ConfigError(where, "robot.K_t", "must be > 0");
  if (!(gear_ratio > 0)) throw ConfigError(where, "robot.gear_ratio", "must be > 0");
  if (!(rotor_inertia > 0))
    throw ConfigError(where, "robot.rotor_inertia",
                      "must be > 0 (the massless lower leg leaves the knee coordinate "
                      "without inertia otherwise)");
  if (!(g > 0)) throw ConfigError(where, "robot.g", "must be > 0");
  if (!(max_thrust_per_side > 0)) throw ConfigError(where, "robot.max_thrust_per_side", "must be > 0");
}

Vec3 RobotParams::zero_pose_foot() const {
  // Chain at zero joint angles: Ry(0) * l4(0) = [-l4a, 0, -l4b].
  return l1 + l2 + l3 + Vec3(-l4a, 0.0, -l4b);
}

}  // namespace tbsim
