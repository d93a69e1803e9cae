#include <doctest.h>

#include <cmath>
#include <numbers>

#include "quadjump/math/kernel.hpp"
#include "quadjump/math/quaternion.hpp"
#include "quadjump/math/rng.hpp"

using qj::math::exp_kernel;
using qj::math::quat_integrate;
using qj::math::quat_log_error;
using qj::math::RngStream;
using qj::math::UnitQuaternion;

namespace {

UnitQuaternion random_quat(RngStream& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  return UnitQuaternion::from_rotvec(axis * rng.uniform(0.0, 3.0));
}

}  // namespace

TEST_CASE("quat_log_error identity and double cover") {
  RngStream rng(7, 0);
  for (int i = 0; i < 50; ++i) {
    const UnitQuaternion q = random_quat(rng);
    CHECK(quat_log_error(q, q).norm() == doctest::Approx(0.0).epsilon(1e-12));
    const UnitQuaternion neg(-q.w, -q.x, -q.y, -q.z);
    CHECK(quat_log_error(q, neg).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("quat_log_error 90 degree yaw matches axis-angle oracle") {
  const UnitQuaternion yaw90 = UnitQuaternion::from_yaw(std::numbers::pi / 2);
  const Eigen::Vector3d err = quat_log_error(UnitQuaternion::identity(), yaw90);
  CHECK(err.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(err.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(err.z() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));

  // oracle: rotation matrix -> angle via trace, axis via skew part
  RngStream rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    const UnitQuaternion a = random_quat(rng);
    const UnitQuaternion b = random_quat(rng);
    const Eigen::Matrix3d rel = a.rotation_matrix().transpose() * b.rotation_matrix();
    const double angle = std::acos(std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0));
    CHECK(quat_log_error(a, b).norm() == doctest::Approx(angle).epsilon(1e-7));
    CHECK(quat_log_error(a, b).norm() <= std::numbers::pi + 1e-12);
  }
}

TEST_CASE("quat_log_error magnitude symmetric under swap") {
  RngStream rng(13, 0);
  for (int i = 0; i < 200; ++i) {
    const UnitQuaternion a = random_quat(rng);
    const UnitQuaternion b = random_quat(rng);
    CHECK(quat_log_error(a, b).norm() ==
          doctest::Approx(quat_log_error(b, a).norm()).epsilon(1e-10));
  }
}

TEST_CASE("quat_log_error rejects non-unit input") {
  UnitQuaternion q;
  q.w = 1.1;  // bypass normalizing constructor
  CHECK_THROWS_AS(quat_log_error(q, UnitQuaternion::identity()), std::invalid_argument);
}

TEST_CASE("quat_integrate zero rate and closed-form rotation") {
  RngStream rng(17, 0);
  const UnitQuaternion q = random_quat(rng);
  const UnitQuaternion same = quat_integrate(q, Eigen::Vector3d::Zero(), 0.005);
  CHECK(same.w == q.w);
  CHECK(same.x == q.x);

  const UnitQuaternion half_turn =
      quat_integrate(UnitQuaternion::identity(), {0, 0, std::numbers::pi}, 1.0);
  CHECK(quat_log_error(half_turn, UnitQuaternion::from_yaw(std::numbers::pi)).norm() <= 1e-6);
}

TEST_CASE("quat_integrate inverse composition returns to start") {
  RngStream rng(19, 0);
  for (int i = 0; i < 100; ++i) {
    const UnitQuaternion q = random_quat(rng);
    const Eigen::Vector3d w(rng.normal(), rng.normal(), rng.normal());
    const UnitQuaternion back = quat_integrate(quat_integrate(q, w, 0.01), -w, 0.01);
    CHECK(quat_log_error(q, back).norm() <= 1e-9);
  }
}

TEST_CASE("exp_kernel values and errors") {
  CHECK(exp_kernel(0.0, 0.5) == 1.0);
  CHECK(exp_kernel(0.25, 0.25) == doctest::Approx(0.36788).epsilon(1e-4));
  CHECK(exp_kernel(1e12, 1.0) == 0.0);
  CHECK_THROWS_AS(exp_kernel(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(exp_kernel(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("exp_kernel is multiplicative and monotone") {
  RngStream rng(23, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(0.0, 10.0);
    const double y = rng.uniform(0.0, 10.0);
    const double s = rng.uniform(0.1, 5.0);
    CHECK(std::abs(exp_kernel(x, s) * exp_kernel(y, s) - exp_kernel(x + y, s)) <= 1e-12);
    if (x < y) CHECK(exp_kernel(x, s) >= exp_kernel(y, s));
  }
}

TEST_CASE("rng replay is exact and streams differ") {
  RngStream a(42, 3);
  RngStream b(42, 3);
  for (int i = 0; i < 1000000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
    if (a.counter() != b.counter()) break;  // avoid 1e6 failure spam
  }

  RngStream c(42, 4);
  int same = 0;
  RngStream a2(42, 3);
  for (int i = 0; i < 1000; ++i) same += (a2.next_u64() == c.next_u64());
  CHECK(same == 0);
}

TEST_CASE("rng counter seek reproduces draws") {
  RngStream a(1, 2);
  for (int i = 0; i < 100; ++i) a.uniform();
  const double at_100 = a.uniform();
  RngStream b(1, 2);
  b.set_counter(100);
  CHECK(b.uniform() == at_100);
}

TEST_CASE("rng uniform range and normal moments") {
  RngStream rng(5, 1);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
    const double n = rng.normal();
    sum += n;
    sumsq += n * n;
  }
  CHECK(sum / 100000 == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sumsq / 100000 == doctest::Approx(1.0).epsilon(0.02));
}
