#include "tbsim/state.hpp"

#include <cmath>

namespace tbsim {

void GeneralizedState::validate() const {
  if (!q.allFinite() || !qd.allFinite() || !std::isfinite(t))
    throw SimError("state has non-finite entries at t=" + std::to_string(t));
  if (std::abs(q[coord::kPitch]) >= kPitchGuard)
    throw SingularityError("pitch " + std::to_string(q[coord::kPitch]) +
                           " rad violates the XYZ Euler guard at t=" + std::to_string(t));
}

}  // namespace tbsim
