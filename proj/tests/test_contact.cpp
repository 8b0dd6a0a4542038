#include "tbsim/contact.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace tbsim;
using test::make_rng;

TEST_CASE("contact branch examples") {
  ContactParams cp;
  cp.k_g = 20000.0;
  cp.b_g = 50.0;
  cp.mu = 0.8;
  cp.v_slip = 1e-3;

  SUBCASE("above ground: zero force") {
    const ContactState cs = ground_force(Vec3(0.2, 0, 0.01), Vec3(1, 0, -2), cp);
    CHECK(!cs.in_contact);
    CHECK(cs.force.norm() == 0.0);
    const ContactState boundary = ground_force(Vec3(0, 0, 0.0), Vec3(0, 0, 0), cp);
    CHECK(!boundary.in_contact);
    CHECK(boundary.force.norm() == 0.0);
  }

  SUBCASE("pure spring term") {
    const ContactState cs = ground_force(Vec3(0, 0, -0.001), Vec3::Zero(), cp);
    CHECK(cs.in_contact);
    CHECK(cs.delta_n == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(cs.force.x() == 0.0);
    CHECK(cs.force.y() == 0.0);
    CHECK(cs.force.z() == doctest::Approx(20.0).epsilon(1e-12));
  }

  SUBCASE("full piecewise law vs scripted oracle") {
    // Penetrating at 0.5 m/s with tangential slip (0.1, 0) m/s.
    const Vec3 pos(0.3, -0.1, -0.001);
    const Vec3 vel(0.1, 0.0, -0.5);
    const ContactState cs = ground_force(pos, vel, cp);

    const double delta = 0.001, delta_dot = 0.5;
    const double Fn = cp.k_g * delta + cp.b_g * delta_dot;  // 45 N
    const double vt = 0.1;
    const double ff = -cp.mu * Fn * std::tanh(vt / cp.v_slip);
    CHECK(cs.delta_n_dot == doctest::Approx(delta_dot).epsilon(1e-15));
    CHECK(cs.force.z() == doctest::Approx(Fn).epsilon(1e-12));
    CHECK(cs.force.x() == doctest::Approx(ff).epsilon(1e-12));
    CHECK(cs.force.y() == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("fast separation clamps to zero normal force") {
    const ContactState cs = ground_force(Vec3(0, 0, -0.0001), Vec3(0, 0, 1.0), cp);
    CHECK(cs.in_contact);
    CHECK(cs.force.z() == 0.0);
    CHECK(cs.force.norm() == 0.0);  // no friction without normal load
  }
}

TEST_CASE("contact properties on random inputs") {
  ContactParams cp;
  auto rng = make_rng(51);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 pos(test::uniform(rng, -1, 1), test::uniform(rng, -1, 1),
                   test::uniform(rng, -0.02, 0.02));
    const Vec3 vel(test::uniform(rng, -3, 3), test::uniform(rng, -3, 3),
                   test::uniform(rng, -3, 3));
    const ContactState cs = ground_force(pos, vel, cp);

    const double Fn = cs.force.z();
    const Vec3 ff(cs.force.x(), cs.force.y(), 0.0);
    if (cs.delta_n <= 0.0) {
      REQUIRE(cs.force.norm() == 0.0);
      REQUIRE(!cs.in_contact);
    } else {
      REQUIRE(cs.in_contact);
      REQUIRE(Fn >= 0.0);
      REQUIRE(ff.norm() <= cp.mu * Fn + 1e-12);  // friction cone
      const Vec3 vt(vel.x(), vel.y(), 0.0);
      REQUIRE(ff.dot(vt) <= 1e-15);  // dissipativity under slip
    }
  }
}

TEST_CASE("contact parameter validation") {
  ContactParams bad;
  bad.k_g = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  ContactParams bad_n;
  bad_n.n = Vec3(0, 0, 2);
  CHECK_THROWS_AS(bad_n.validate(), ConfigError);
  ContactParams ok;
  CHECK_NOTHROW(ok.validate());
}
