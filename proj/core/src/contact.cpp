#include "tbsim/contact.hpp"

#include <cmath>

namespace tbsim {

void ContactParams::validate(const std::string& where) const {
  if (!(k_g > 0)) throw ConfigError(where, "contact.k_g", "must be > 0");
  if (!(b_g >= 0)) throw ConfigError(where, "contact.b_g", "must be >= 0");
  if (!(mu >= 0)) throw ConfigError(where, "contact.mu", "must be >= 0");
  if (!(v_slip > 0)) throw ConfigError(where, "contact.v_slip", "must be > 0");
  if (!std::isfinite(ground_height)) throw ConfigError(where, "contact.ground_height", "must be finite");
  if (std::abs(n.norm() - 1.0) > 1e-9) throw ConfigError(where, "contact.normal", "must be a unit vector");
}

ContactState ground_force(const Vec3& foot_pos, const Vec3& foot_vel, const ContactParams& cp) {
  if (!foot_pos.allFinite() || !foot_vel.allFinite())
    throw SimError("ground_force: non-finite foot state");

  ContactState cs;
  cs.delta_n = cp.n.dot(Vec3(0.0, 0.0, cp.ground_height)) - cp.n.dot(foot_pos);
  cs.delta_n_dot = -cp.n.dot(foot_vel);
  if (cs.delta_n <= 0.0) return cs;  // out of contact, zero force

  cs.in_contact = true;
  // Spring-damper normal force, clamped: no adhesion during fast separation.
  double Fn = cp.k_g * cs.delta_n + cp.b_g * cs.delta_n_dot;
  if (Fn < 0.0) Fn = 0.0;

  Vec3 force = Fn * cp.n;
  const Vec3 v_t = foot_vel - foot_vel.dot(cp.n) * cp.n;
  const double v_t_norm = v_t.norm();
  if (v_t_norm > 0.0 && cp.mu > 0.0 && Fn > 0.0)
    force -= cp.mu * Fn * std::tanh(v_t_norm / cp.v_slip) * (v_t / v_t_norm);

  cs.force = force;
  return cs;
}

}  // namespace tbsim
