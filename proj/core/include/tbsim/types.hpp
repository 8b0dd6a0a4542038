#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace tbsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat3x12 = Eigen::Matrix<double, 3, 12>;
using Mat12x6 = Eigen::Matrix<double, 12, 6>;

enum class Side { Left = 0, Right = 1 };

/// Mirror sign applied to the y-components of per-side geometry vectors.
/// The left leg sits on the -y side of the torso.
inline double side_sign(Side s) { return s == Side::Left ? -1.0 : 1.0; }

/// Generalized-coordinate layout:
///   q = [p_B(3), body Euler XYZ(3), gam_L, gam_R, phih_L, phih_R, phik_L, phik_R]
namespace coord {
inline constexpr int kPx = 0;
inline constexpr int kPy = 1;
inline constexpr int kPz = 2;
inline constexpr int kRoll = 3;
inline constexpr int kPitch = 4;
inline constexpr int kYaw = 5;
inline constexpr int kJointBase = 6;
inline constexpr int kNumQ = 12;
inline constexpr int kNumJoints = 6;

inline int gamma(Side s) { return 6 + static_cast<int>(s); }   // hip frontal
inline int phi_h(Side s) { return 8 + static_cast<int>(s); }   // hip sagittal
inline int phi_k(Side s) { return 10 + static_cast<int>(s); }  // knee
}  // namespace coord

/// Pitch magnitude beyond which the XYZ Euler parameterization is rejected.
inline constexpr double kPitchGuard = M_PI / 2.0 - 1e-3;

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public SimError {
 public:
  using SimError::SimError;
};

class LinearSolveError : public SimError {
 public:
  using SimError::SimError;
};

class ConfigError : public SimError {
 public:
  ConfigError(std::string path, std::string key, std::string reason)
      : SimError("config error [" + path + "] key '" + key + "': " + reason),
        path_(std::move(path)),
        key_(std::move(key)),
        reason_(std::move(reason)) {}

  const std::string& path() const { return path_; }
  const std::string& key() const { return key_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string path_, key_, reason_;
};

class UnreachableTarget : public SimError {
 public:
  UnreachableTarget(const std::string& what, double distance_to_workspace)
      : SimError(what), distance_(distance_to_workspace) {}

  /// How far the requested point lies outside the reachable set, m.
  double distance_to_workspace() const { return distance_; }

 private:
  double distance_;
};

class PhaseError : public SimError {
 public:
  using SimError::SimError;
};

class IoError : public SimError {
 public:
  using SimError::SimError;
};

class SchemaError : public SimError {
 public:
  using SimError::SimError;
};

class InsufficientData : public SimError {
 public:
  using SimError::SimError;
};

}  // namespace tbsim
