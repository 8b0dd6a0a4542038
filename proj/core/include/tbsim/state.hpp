#pragma once

#include "tbsim/types.hpp"

namespace tbsim {

/// Generalized state (q, qd) in the 12-coordinate layout of coord::.
struct GeneralizedState {
  Vec12 q = Vec12::Zero();
  Vec12 qd = Vec12::Zero();
  double t = 0.0;

  Vec3 body_pos() const { return q.segment<3>(0); }
  Vec3 body_euler() const { return q.segment<3>(3); }
  Vec3 body_vel() const { return qd.segment<3>(0); }
  Vec3 euler_rates() const { return qd.segment<3>(3); }
  Vec6 joints() const { return q.segment<6>(coord::kJointBase); }
  Vec6 joint_rates() const { return qd.segment<6>(coord::kJointBase); }

  double pitch() const { return q[coord::kPitch]; }

  /// Throws SingularityError on pitch-guard violation, SimError on non-finite
  /// entries.
  void validate() const;
};

}  // namespace tbsim
