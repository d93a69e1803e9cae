#include <doctest.h>

#include <Eigen/Geometry>

#include <fstream>
#include <sstream>

#include "quadjump/math/rng.hpp"
#include "quadjump/robot/model.hpp"

using namespace qj;
using robot::BasePose;
using robot::RobotModel;

namespace {

const char* kModelPath = QJ_SOURCE_DIR "/assets/quadruped_12kg.json";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vector12d random_q(const RobotModel& model, math::RngStream& rng) {
  Vector12d q;
  for (int i = 0; i < 12; ++i) q[i] = rng.uniform(model.links[i].lower, model.links[i].upper);
  return q;
}

// independent per-joint transform composition, kept deliberately naive
Eigen::Vector3d oracle_foot(const RobotModel& model, const BasePose& base, const Vector12d& q,
                            int leg) {
  auto rot = [](const Eigen::Vector3d& axis, double a) {
    return Eigen::Matrix3d(Eigen::AngleAxisd(a, axis));
  };
  Eigen::Matrix3d r = base.orientation.rotation_matrix();
  Eigen::Vector3d p = base.position;
  for (int depth = 0; depth < 3; ++depth) {
    const auto& link = model.links[3 * leg + depth];
    p = p + r * link.joint_origin;
    r = r * rot(link.axis, q[3 * leg + depth]);
  }
  return p + r * model.foot_offset;
}

}  // namespace

TEST_CASE("bundled model loads with total mass 12 kg") {
  const RobotModel model = robot::load_model(kModelPath);
  CHECK(model.total_mass() == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(model.q_nom[1] == 0.8);
  CHECK(model.standing_height() == doctest::Approx(0.2987).epsilon(1e-3));
}

TEST_CASE("loader rejects invalid documents") {
  const std::string good = read_file(kModelPath);

  SUBCASE("zero calf mass") {
    std::string bad = good;
    const auto pos = bad.find("\"FL_calf\", \"mass\": 0.3");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 22, "\"FL_calf\", \"mass\": 0.0");
    CHECK_THROWS_WITH_AS(robot::load_model_from_json(bad),
                         doctest::Contains("non-positive mass"), std::runtime_error);
  }
  SUBCASE("left/right thigh length mismatch") {
    std::string bad = good;
    // FL calf joint sits at the end of the thigh; moving it changes the thigh length
    const auto pos = bad.find("\"child\": \"FL_calf\", \"origin\": [0.0, 0.0, -0.20]");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 47, "\"child\": \"FL_calf\", \"origin\": [0.0, 0.0, -0.25]");
    CHECK_THROWS_WITH_AS(robot::load_model_from_json(bad), doctest::Contains("asymmetric"),
                         std::runtime_error);
  }
  SUBCASE("missing q_nom") {
    std::string bad = good;
    const auto pos = bad.find("q_nom");
    bad.replace(pos, 5, "q_nOm");
    CHECK_THROWS_AS(robot::load_model_from_json(bad), std::runtime_error);
  }
  SUBCASE("inverted limits") {
    std::string bad = good;
    const auto pos = bad.find("{\"lower\": -0.86, \"upper\": 0.86");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 30, "{\"lower\": 0.86, \"upper\": -0.86");
    CHECK_THROWS_WITH_AS(robot::load_model_from_json(bad), doctest::Contains("lower < upper"),
                         std::runtime_error);
  }
}

TEST_CASE("fk_feet mirror symmetry and rigid translation") {
  const RobotModel model = robot::load_model(kModelPath);
  BasePose base;
  const auto feet = robot::fk_feet(model, base, model.q_nom);

  // FL/FR and RL/RR y-coordinates are exact negations at q_nom
  CHECK(feet[0].y() == doctest::Approx(-feet[1].y()).epsilon(1e-14));
  CHECK(feet[2].y() == doctest::Approx(-feet[3].y()).epsilon(1e-14));
  CHECK(feet[0].x() == doctest::Approx(feet[1].x()).epsilon(1e-14));
  CHECK(feet[0].z() == doctest::Approx(feet[1].z()).epsilon(1e-14));

  // feet below base at q_nom
  for (const auto& f : feet) CHECK(f.z() < 0.0);

  BasePose raised;
  raised.position = {0, 0, 0.1};
  const auto feet_up = robot::fk_feet(model, raised, model.q_nom);
  for (int leg = 0; leg < 4; ++leg) {
    CHECK(feet_up[leg].z() - feet[leg].z() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(feet_up[leg].x() == doctest::Approx(feet[leg].x()).epsilon(1e-14));
  }
}

TEST_CASE("fk_feet agrees with chain-composition oracle") {
  const RobotModel model = robot::load_model(kModelPath);
  math::RngStream rng(31, 0);
  for (int trial = 0; trial < 100; ++trial) {
    BasePose base;
    base.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)};
    base.orientation = math::UnitQuaternion::from_rotvec(
        Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized() *
        rng.uniform(0, 3.0));
    const Vector12d q = random_q(model, rng);
    const auto feet = robot::fk_feet(model, base, q);
    for (int leg = 0; leg < 4; ++leg)
      CHECK((feet[leg] - oracle_foot(model, base, q, leg)).norm() <= 1e-10);
  }
}

TEST_CASE("foot_jacobian structure and finite-difference agreement") {
  const RobotModel model = robot::load_model(kModelPath);
  math::RngStream rng(37, 0);

  SUBCASE("zero columns for other legs, identity translation block") {
    BasePose base;
    const Matrix3x18d jac = robot::foot_jacobian(model, base, model.q_nom, 0);
    CHECK((jac.block<3, 3>(0, 0) - Eigen::Matrix3d::Identity()).norm() == 0.0);
    for (int j = 3; j < 12; ++j) CHECK(jac.col(6 + j).norm() == 0.0);
  }

  SUBCASE("finite differences, 100 random states") {
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
      BasePose base;
      base.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)};
      base.orientation = math::UnitQuaternion::from_rotvec(
          Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized() *
          rng.uniform(0, 3.0));
      const Vector12d q = random_q(model, rng);
      const int foot = static_cast<int>(rng.uniform_int(4));
      const Matrix3x18d jac = robot::foot_jacobian(model, base, q, foot);

      Matrix3x18d fd;
      for (int col = 0; col < 18; ++col) {
        BasePose bp = base, bm = base;
        Vector12d qp = q, qm = q;
        if (col < 3) {
          bp.position[col] += h;
          bm.position[col] -= h;
        } else if (col < 6) {
          Eigen::Vector3d dw = Eigen::Vector3d::Zero();
          dw[col - 3] = h;
          bp.orientation = math::quat_integrate(base.orientation, dw, 1.0);
          bm.orientation = math::quat_integrate(base.orientation, -dw, 1.0);
        } else {
          qp[col - 6] += h;
          qm[col - 6] -= h;
        }
        fd.col(col) = (robot::fk_feet(model, bp, qp)[foot] - robot::fk_feet(model, bm, qm)[foot]) /
                      (2.0 * h);
      }
      CHECK((jac - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}
