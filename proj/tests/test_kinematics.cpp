#include "tbsim/kinematics.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace tbsim;
using test::make_rng;
using test::oracle_fk;
using test::random_state;

TEST_CASE("elementary rotations") {
  CHECK((elementary_rotation(Axis::X, 0.0) - Mat3::Identity()).norm() == doctest::Approx(0.0));

  // Right-handed quarter turn about y maps ex to -ez.
  const Vec3 v = elementary_rotation(Axis::Y, M_PI / 2) * Vec3(1, 0, 0);
  CHECK(v.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.z() == doctest::Approx(-1.0).epsilon(1e-12));

  const Mat3 composed =
      elementary_rotation(Axis::X, 0.3) * elementary_rotation(Axis::X, -0.3);
  CHECK((composed - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  auto rng = make_rng(11);
  for (int i = 0; i < 50; ++i) {
    const Mat3 R = elementary_rotation(Axis::Z, test::uniform(rng, -5, 5));
    CHECK((R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("body rotation and euler rate matrix") {
  CHECK((body_rotation(Vec3::Zero()) - Mat3::Identity()).norm() == doctest::Approx(0.0));
  CHECK((body_rotation(Vec3(0, 0.2, 0)) - elementary_rotation(Axis::Y, 0.2))
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  auto rng = make_rng(12);
  for (int i = 0; i < 100; ++i) {
    const Vec3 e(test::uniform(rng, -1.2, 1.2), test::uniform(rng, -1.3, 1.3),
                 test::uniform(rng, -1.2, 1.2));
    const Mat3 R = body_rotation(e);
    CHECK((R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-10));
  }

  CHECK_THROWS_AS(body_rotation(Vec3(0, M_PI / 2, 0)), SingularityError);

  // Finite-difference check of omega = E(e) * edot in the body frame.
  for (int i = 0; i < 50; ++i) {
    const Vec3 e(test::uniform(rng, -1.0, 1.0), test::uniform(rng, -1.1, 1.1),
                 test::uniform(rng, -1.0, 1.0));
    const Vec3 ed(test::uniform(rng, -2, 2), test::uniform(rng, -2, 2),
                  test::uniform(rng, -2, 2));
    const double h = 1e-6;
    const Mat3 Rp = body_rotation(e + h * ed);
    const Mat3 Rm = body_rotation(e - h * ed);
    const Mat3 R = body_rotation(e);
    const Mat3 omega_hat = R.transpose() * ((Rp - Rm) / (2 * h));
    const Vec3 omega_fd(omega_hat(2, 1), omega_hat(0, 2), omega_hat(1, 0));
    const Vec3 omega = euler_rate_matrix(e) * ed;
    CHECK((omega - omega_fd).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("lower leg offset formula") {
  RobotParams p;
  p.l4a = 0.05;
  p.l4b = 0.20;
  const Vec3 a = lower_leg_offset(0.0, p);
  CHECK(a.x() == doctest::Approx(-0.05).epsilon(1e-15));
  CHECK(a.y() == 0.0);
  CHECK(a.z() == doctest::Approx(-0.20).epsilon(1e-15));

  const Vec3 b = lower_leg_offset(M_PI / 2, p);
  CHECK(b.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.z() == doctest::Approx(-0.25).epsilon(1e-12));

  // Direct formula oracle at an arbitrary angle.
  const double phi = 0.4;
  const Vec3 c = lower_leg_offset(phi, p);
  CHECK(c.x() == doctest::Approx(-0.05 * std::cos(phi)).epsilon(1e-15));
  CHECK(c.z() == doctest::Approx(-(0.20 + 0.05 * std::sin(phi))).epsilon(1e-15));
}

TEST_CASE("zero-pose geometry invariants") {
  RobotParams p;
  p.validate();
  const Vec3 foot = p.zero_pose_foot();
  CHECK(foot.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(foot.y() == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(foot.z() == doctest::Approx(-0.5).epsilon(1e-12));

  // Zero-pose COM has no sagittal offset: symmetric thrust cannot pitch it.
  const double hip_x = p.l1.x() + p.l2.x();
  const double knee_x = hip_x + p.l3.x();
  CHECK(2 * p.m_H * hip_x + 2 * p.m_K * knee_x == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("forward kinematics examples") {
  RobotParams params;

  GeneralizedState s;
  s.q[coord::kPz] = 0.65;
  const FrameSet f = forward_kinematics(s, params, Side::Left);
  CHECK(f.p_F.z() == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(f.p_F.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.p_F.y() == doctest::Approx(-0.05).epsilon(1e-12));

  GeneralizedState origin;
  const FrameSet f0 = forward_kinematics(origin, params, Side::Left);
  CHECK((f0.p_P - params.l1).cwiseAbs().maxCoeff() < 1e-15);
  const FrameSet f0r = forward_kinematics(origin, params, Side::Right);
  CHECK(f0r.p_P.y() == doctest::Approx(0.05).epsilon(1e-15));

  auto rng = make_rng(21);
  for (int i = 0; i < 200; ++i) {
    const GeneralizedState st = random_state(rng);
    for (Side side : {Side::Left, Side::Right}) {
      const FrameSet fk = forward_kinematics(st, params, side);
      const auto orc = oracle_fk(st, params, side);
      CHECK((fk.p_P - orc.p_P).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fk.p_H - orc.p_H).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fk.p_K - orc.p_K).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fk.p_F - orc.p_F).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fk.p_T - orc.p_T).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fk.R_B - orc.R_B).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fk.R_B * fk.R_B.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("chain consistency: pelvis-to-hip vector is rigid") {
  RobotParams params;
  auto rng = make_rng(22);
  Vec3 ref = Vec3::Zero();
  for (int i = 0; i < 100; ++i) {
    GeneralizedState s = random_state(rng);
    // Joints fixed, body pose random.
    s.q.segment<6>(6).setConstant(0.3);
    const FrameSet f = forward_kinematics(s, params, Side::Left);
    const Vec3 local = f.R_B.transpose() * (f.p_H - f.p_P);
    if (i == 0)
      ref = local;
    else
      CHECK((local - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("angular velocities") {
  RobotParams params;

  GeneralizedState rest;
  const auto w0 = angular_velocities(rest, params, Side::Left);
  CHECK(w0.omega_B_B.norm() == 0.0);
  CHECK(w0.omega_H_B.norm() == 0.0);
  CHECK(w0.omega_K_H.norm() == 0.0);

  GeneralizedState s;
  s.qd[coord::gamma(Side::Left)] = 1.0;
  const auto w1 = angular_velocities(s, params, Side::Left);
  CHECK((w1.omega_H_B - Vec3(1, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);

  // Finite differences of the segment rotations vs the recursion.
  auto rng = make_rng(23);
  for (int i = 0; i < 50; ++i) {
    const GeneralizedState st = random_state(rng);
    const double h = 1e-6;
    GeneralizedState sp = st, sm = st;
    sp.q += h * st.qd;
    sm.q -= h * st.qd;
    for (Side side : {Side::Left, Side::Right}) {
      const LegKinematics k = leg_kinematics(st, params, side);
      const LegKinematics kp = leg_kinematics(sp, params, side);
      const LegKinematics km = leg_kinematics(sm, params, side);
      const auto w = angular_velocities(st, params, side);

      const Mat3 wB_hat = k.R_B.transpose() * ((kp.R_B - km.R_B) / (2 * h));
      const Vec3 wB(wB_hat(2, 1), wB_hat(0, 2), wB_hat(1, 0));
      CHECK((w.omega_B_B - wB).cwiseAbs().maxCoeff() < 1e-6);

      // omega_H expressed in B coordinates from the pelvis segment rotation.
      const Mat3 wP_hat = k.R_P.transpose() * ((kp.R_P - km.R_P) / (2 * h));
      const Vec3 wP_local(wP_hat(2, 1), wP_hat(0, 2), wP_hat(1, 0));
      const Mat3 Rx = elementary_rotation(Axis::X, st.q[coord::gamma(side)]);
      CHECK((w.omega_H_B - Rx * wP_local).cwiseAbs().maxCoeff() < 1e-6);

      // omega_K expressed in pelvis-segment coordinates from the thigh.
      const Mat3 wH_hat = k.R_H.transpose() * ((kp.R_H - km.R_H) / (2 * h));
      const Vec3 wH_local(wH_hat(2, 1), wH_hat(0, 2), wH_hat(1, 0));
      const Mat3 Ry = elementary_rotation(Axis::Y, st.q[coord::phi_h(side)]);
      CHECK((w.omega_K_H - Ry * wH_local).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("point jacobians match finite differences") {
  RobotParams params;
  auto rng = make_rng(24);

  GeneralizedState rest;
  for (PointId pt : {PointId::FootLeft, PointId::FootRight, PointId::ThrusterLeft,
                     PointId::ThrusterRight}) {
    CHECK((point_jacobian(rest, params, pt) * Vec12::Zero()).norm() == 0.0);
  }

  // Pure body translation: foot velocity equals the body velocity.
  GeneralizedState trans;
  trans.qd[coord::kPx] = 0.7;
  const Vec3 v = point_jacobian(trans, params, PointId::FootLeft) * trans.qd;
  CHECK((v - Vec3(0.7, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);

  double max_err = 0.0;
  for (int i = 0; i < 120; ++i) {
    const GeneralizedState st = random_state(rng);
    for (PointId pt : {PointId::FootLeft, PointId::FootRight, PointId::ThrusterLeft,
                       PointId::ThrusterRight}) {
      const Mat3x12 J = point_jacobian(st, params, pt);
      Mat3x12 J_fd;
      const double h = 1e-6;
      for (int c = 0; c < 12; ++c) {
        GeneralizedState sp = st, sm = st;
        sp.q[c] += h;
        sm.q[c] -= h;
        auto pos = [&](const GeneralizedState& q_state) -> Vec3 {
          const FrameSet f = forward_kinematics(q_state, params,
                                                (pt == PointId::FootLeft ||
                                                 pt == PointId::ThrusterLeft)
                                                    ? Side::Left
                                                    : Side::Right);
          return (pt == PointId::FootLeft || pt == PointId::FootRight) ? f.p_F : f.p_T;
        };
        J_fd.col(c) = (pos(sp) - pos(sm)) / (2 * h);
      }
      max_err = std::max(max_err, (J - J_fd).cwiseAbs().maxCoeff());
    }
  }
  CHECK(max_err < 1e-5);
}

TEST_CASE("zero velocity gives zero point and angular velocities") {
  RobotParams params;
  auto rng = make_rng(25);
  for (int i = 0; i < 50; ++i) {
    GeneralizedState s = random_state(rng);
    s.qd.setZero();
    for (Side side : {Side::Left, Side::Right}) {
      const LegKinematics k = leg_kinematics(s, params, side);
      CHECK((k.Jv_F * s.qd).norm() == 0.0);
      CHECK((k.Jw_K * s.qd).norm() == 0.0);
    }
  }
}

TEST_CASE("state validation guards") {
  GeneralizedState s;
  s.q[coord::kPitch] = M_PI / 2;
  CHECK_THROWS_AS(s.validate(), SingularityError);
  GeneralizedState nan_state;
  nan_state.q[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nan_state.validate(), SimError);
}
