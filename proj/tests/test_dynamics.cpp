#include "tbsim/dynamics.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace tbsim;
using test::make_rng;
using test::oracle_body_velocities;
using test::random_state;

namespace {

// Independent per-body energy oracle from the 4x4 chain derivatives.
double oracle_kinetic(const GeneralizedState& s, const RobotParams& p) {
  const auto ob = oracle_body_velocities(s, p);
  double K = p.m_B * ob.B.vel.squaredNorm() + ob.B.omega_local.dot(p.I_B * ob.B.omega_local);
  for (int i = 0; i < 2; ++i) {
    K += p.m_H * ob.H[i].vel.squaredNorm() + ob.H[i].omega_local.dot(p.I_H * ob.H[i].omega_local);
    K += p.m_K * ob.K[i].vel.squaredNorm() + ob.K[i].omega_local.dot(p.I_K * ob.K[i].omega_local);
  }
  K += p.rotor_inertia * s.joint_rates().squaredNorm();
  return 0.5 * K;
}

double oracle_potential(const GeneralizedState& s, const RobotParams& p) {
  const auto ob = oracle_body_velocities(s, p);
  double V = p.m_B * ob.B.pos.z();
  for (int i = 0; i < 2; ++i) V += p.m_H * ob.H[i].pos.z() + p.m_K * ob.K[i].pos.z();
  GeneralizedState zero;
  const auto ob0 = oracle_body_velocities(zero, p);
  double V0 = p.m_B * ob0.B.pos.z();
  for (int i = 0; i < 2; ++i) V0 += p.m_H * ob0.H[i].pos.z() + p.m_K * ob0.K[i].pos.z();
  return p.g * (V - V0);
}

}  // namespace

TEST_CASE("kinetic energy") {
  RobotParams p;

  GeneralizedState rest;
  CHECK(kinetic_energy(rest, p) == 0.0);

  GeneralizedState vert;
  vert.qd[coord::kPz] = 0.8;
  CHECK(kinetic_energy(vert, p) == doctest::Approx(0.5 * 6.5 * 0.8 * 0.8).epsilon(1e-12));

  auto rng = make_rng(31);
  for (int i = 0; i < 100; ++i) {
    const GeneralizedState s = random_state(rng);
    const double K = kinetic_energy(s, p);
    const double K_oracle = oracle_kinetic(s, p);
    CHECK(std::abs(K - K_oracle) < 1e-10 * std::max(1.0, std::abs(K_oracle)));
    CHECK(K >= 0.0);
  }
}

TEST_CASE("potential energy") {
  RobotParams p;

  GeneralizedState zero;
  CHECK(potential_energy(zero, p) == doctest::Approx(0.0).epsilon(1e-14));

  GeneralizedState raised;
  raised.q[coord::kPz] = 0.1;
  CHECK(potential_energy(raised, p) == doctest::Approx(6.5 * 9.81 * 0.1).epsilon(1e-12));

  auto rng = make_rng(32);
  for (int i = 0; i < 100; ++i) {
    const GeneralizedState s = random_state(rng);
    CHECK(std::abs(potential_energy(s, p) - oracle_potential(s, p)) < 1e-10);
  }
}

TEST_CASE("mass matrix") {
  RobotParams p;
  auto rng = make_rng(33);

  for (int i = 0; i < 100; ++i) {
    const GeneralizedState s = random_state(rng);
    const Mat12 M = mass_matrix(s, p);

    // Translational block is exactly total_mass * I at every configuration.
    CHECK((M.block<3, 3>(0, 0) - p.total_mass * Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);

    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::SelfAdjointEigenSolver<Mat12> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    // Energy quadratic form: qd^T M qd = 2K for arbitrary velocities.
    for (int k = 0; k < 20; ++k) {
      GeneralizedState sv = s;
      for (int j = 0; j < 12; ++j) sv.qd[j] = test::uniform(rng, -2, 2);
      const double quad = sv.qd.dot(M * sv.qd);
      const double K2 = 2.0 * kinetic_energy(sv, p);
      CHECK(std::abs(quad - K2) < 1e-9 * std::max(1.0, std::abs(K2)));
    }
  }
}

TEST_CASE("bias forces: statics equals the gravity gradient") {
  RobotParams p;

  GeneralizedState zero;
  const Vec12 h0 = bias_forces(zero, p);
  CHECK(h0[coord::kPz] == doctest::Approx(6.5 * 9.81).epsilon(1e-12));
  CHECK(h0[coord::kPx] == doctest::Approx(0.0).epsilon(1e-12));

  auto rng = make_rng(34);
  for (int i = 0; i < 50; ++i) {
    GeneralizedState s = random_state(rng);
    s.qd.setZero();
    const Vec12 h = bias_forces(s, p);
    Vec12 dV;
    const double eps = 1e-6;
    for (int k = 0; k < 12; ++k) {
      GeneralizedState sp = s, sm = s;
      sp.q[k] += eps;
      sm.q[k] -= eps;
      dV[k] = (potential_energy(sp, p) - potential_energy(sm, p)) / (2 * eps);
    }
    CHECK((h - dV).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("bias forces: Coriolis skew identity") {
  RobotParams p;
  auto rng = make_rng(35);
  for (int i = 0; i < 50; ++i) {
    const GeneralizedState s = random_state(rng);

    // Mdot along the trajectory direction by central differences.
    const double eps = 1e-7;
    GeneralizedState sp = s, sm = s;
    sp.q += eps * s.qd;
    sm.q -= eps * s.qd;
    const Mat12 Mdot = (mass_matrix(sp, p) - mass_matrix(sm, p)) / (2 * eps);

    GeneralizedState s0 = s;
    s0.qd.setZero();
    const Vec12 Cqd = bias_forces(s, p) - bias_forces(s0, p);

    const double lhs = s.qd.dot(Mdot * s.qd) - 2.0 * s.qd.dot(Cqd);
    CHECK(std::abs(lhs) < 1e-8 * std::max(1.0, std::abs(s.qd.dot(Mdot * s.qd))));
  }
}

TEST_CASE("input matrices") {
  RobotParams p;
  auto rng = make_rng(36);

  for (int i = 0; i < 50; ++i) {
    const GeneralizedState s = random_state(rng);
    const InputMatrices im = input_matrices(s, p);

    // B_j = [0; I] exactly.
    Mat12x6 bj_expected = Mat12x6::Zero();
    bj_expected.block<6, 6>(6, 0).setIdentity();
    CHECK((im.B_j - bj_expected).cwiseAbs().maxCoeff() == 0.0);

    // Virtual-work identities for thruster and ground-force inputs.
    const Mat3x12 J_TL = point_jacobian(s, p, PointId::ThrusterLeft);
    const Mat3x12 J_TR = point_jacobian(s, p, PointId::ThrusterRight);
    const Mat3x12 J_FL = point_jacobian(s, p, PointId::FootLeft);
    const Mat3x12 J_FR = point_jacobian(s, p, PointId::FootRight);
    Vec6 u_t, u_g;
    for (int k = 0; k < 6; ++k) {
      u_t[k] = test::uniform(rng, -10, 10);
      u_g[k] = test::uniform(rng, -20, 20);
    }
    const double lhs_t = (im.B_t * u_t).dot(s.qd);
    const double rhs_t = u_t.head<3>().dot(J_TL * s.qd) + u_t.tail<3>().dot(J_TR * s.qd);
    CHECK(std::abs(lhs_t - rhs_t) < 1e-10 * std::max(1.0, std::abs(rhs_t)));
    const double lhs_g = (im.B_g * u_g).dot(s.qd);
    const double rhs_g = u_g.head<3>().dot(J_FL * s.qd) + u_g.tail<3>().dot(J_FR * s.qd);
    CHECK(std::abs(lhs_g - rhs_g) < 1e-10 * std::max(1.0, std::abs(rhs_g)));
  }

  // A unit vertical force on the left foot at rest maps to a generalized
  // force with unit vertical-translation component.
  GeneralizedState rest;
  const InputMatrices im = input_matrices(rest, p);
  Vec6 u_g = Vec6::Zero();
  u_g[2] = 1.0;
  const Vec12 gen = im.B_g * u_g;
  CHECK(gen[coord::kPz] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("forward dynamics") {
  RobotParams p;

  SUBCASE("free fall") {
    GeneralizedState s;
    ControlInput u;
    const Vec12 qdd = forward_dynamics_unconstrained(s, u, p);
    CHECK(qdd[coord::kPz] == doctest::Approx(-9.81).epsilon(1e-9));
    CHECK(std::abs(qdd[coord::kPx]) < 1e-9);
  }

  SUBCASE("hovering thrust balances the weight at the COM") {
    GeneralizedState s;
    ControlInput u;
    RobotParams pw = p;
    pw.thrust_frame = ThrustFrame::World;
    const double mg = pw.total_mass * pw.g;
    u.u_t << 0, 0, mg / 2, 0, 0, mg / 2;
    const Vec12 qdd = forward_dynamics_unconstrained(s, u, pw);

    // The COM acceleration vanishes; the body coordinate reacts only to the
    // legs swinging under joint gravity torques.
    const LegKinematics kl = leg_kinematics(s, pw, Side::Left);
    const LegKinematics kr = leg_kinematics(s, pw, Side::Right);
    Mat3x12 Jv_B = Mat3x12::Zero();
    Jv_B.block<3, 3>(0, 0).setIdentity();
    const Vec3 com_acc = (pw.m_B * (Jv_B * qdd) + pw.m_H * (kl.Jv_H * qdd) +
                          pw.m_K * (kl.Jv_K * qdd) + pw.m_H * (kr.Jv_H * qdd) +
                          pw.m_K * (kr.Jv_K * qdd)) /
                         pw.total_mass;
    CHECK(com_acc.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(qdd[coord::kPz]) < 1.5);
  }

  SUBCASE("residual of the solve") {
    auto rng = make_rng(37);
    for (int i = 0; i < 50; ++i) {
      const GeneralizedState s = random_state(rng);
      ControlInput u;
      for (int k = 0; k < 6; ++k) {
        u.u_j[k] = test::uniform(rng, -5, 5);
        u.u_t[k] = test::uniform(rng, -8, 8);
        u.u_g[k] = test::uniform(rng, -20, 20);
      }
      const DynamicsMatrices dm = dynamics_matrices(s, p);
      const Vec12 qdd = forward_dynamics_unconstrained(s, u, p);
      const Vec12 res = dm.M * qdd + dm.h - (dm.B_j * u.u_j + dm.B_t * u.u_t + dm.B_g * u.u_g);
      CHECK(res.cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("control input validation") {
  RobotParams p;
  ControlInput u;
  u.u_t << 0, 0, 60.0, 0, 0, 0;  // above the 49.05 N per-side maximum
  CHECK_THROWS_AS(u.validate(p), SimError);
  u.u_t << 0, 0, 49.0, 0, 0, 49.0;
  CHECK_NOTHROW(u.validate(p));
}

TEST_CASE("energy rate theorem on a short passive trajectory") {
  RobotParams p;
  GeneralizedState s;
  s.q[coord::kPz] = 1.0;
  s.qd[coord::phi_h(Side::Left)] = 1.5;
  s.qd[coord::phi_h(Side::Right)] = -1.5;
  s.qd[coord::phi_k(Side::Left)] = 0.8;

  ControlInput u;  // passive
  const double dt = 1e-4;
  const double E0 = kinetic_energy(s, p) + potential_energy(s, p);
  for (int i = 0; i < 3000; ++i) {
    auto f = [&](const GeneralizedState& st) { return forward_dynamics_unconstrained(st, u, p); };
    const Vec12 k1q = s.qd, k1v = f(s);
    GeneralizedState s2 = s;
    s2.q += 0.5 * dt * k1q;
    s2.qd += 0.5 * dt * k1v;
    const Vec12 k2q = s2.qd, k2v = f(s2);
    GeneralizedState s3 = s;
    s3.q += 0.5 * dt * k2q;
    s3.qd += 0.5 * dt * k2v;
    const Vec12 k3q = s3.qd, k3v = f(s3);
    GeneralizedState s4 = s;
    s4.q += dt * k3q;
    s4.qd += dt * k3v;
    const Vec12 k4q = s4.qd, k4v = f(s4);
    s.q += (dt / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q);
    s.qd += (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  const double E1 = kinetic_energy(s, p) + potential_energy(s, p);
  CHECK(std::abs(E1 - E0) < 1e-6);  // 0.3 s of passive swing
}
