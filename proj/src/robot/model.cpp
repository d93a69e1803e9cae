#include "quadjump/robot/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace qj::robot {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("model: " + msg); }

Eigen::Vector3d vec3(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    fail("expected 3-element array '" + key + "'");
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

Eigen::Matrix3d rotation_about(const Eigen::Vector3d& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + s * k + (1 - c) * k * k;
}

struct RawLink {
  double mass;
  Eigen::Vector3d com;
  Eigen::Vector3d inertia;
};

struct RawJoint {
  std::string parent, child;
  Eigen::Vector3d origin, axis;
  double lower, upper, velocity, torque;
};

void check_mirrored(const Link& left, const Link& right, const std::string& what) {
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  if (!near(left.mass, right.mass)) fail("asymmetric legs: mass mismatch at " + what);
  if ((left.inertia_diag - right.inertia_diag).norm() > 1e-9)
    fail("asymmetric legs: inertia mismatch at " + what);
  if (!near(left.joint_origin.x(), right.joint_origin.x()) ||
      !near(left.joint_origin.y(), -right.joint_origin.y()) ||
      !near(left.joint_origin.z(), right.joint_origin.z()))
    fail("asymmetric legs: joint origin not y-mirrored at " + what);
  if (!near(left.com.x(), right.com.x()) || !near(left.com.y(), -right.com.y()) ||
      !near(left.com.z(), right.com.z()))
    fail("asymmetric legs: com not y-mirrored at " + what);
  if ((left.axis - right.axis).norm() > 1e-9) fail("asymmetric legs: axis mismatch at " + what);
  if (!near(left.lower, right.lower) || !near(left.upper, right.upper))
    fail("asymmetric legs: limit mismatch at " + what);
}

}  // namespace

double RobotModel::total_mass() const {
  double m = base_mass;
  for (const auto& l : links) m += l.mass;
  return m;
}

Vector12d RobotModel::lower_limits() const {
  Vector12d v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = links[i].lower;
  return v;
}

Vector12d RobotModel::upper_limits() const {
  Vector12d v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = links[i].upper;
  return v;
}

Vector12d RobotModel::velocity_limits() const {
  Vector12d v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = links[i].velocity_limit;
  return v;
}

Vector12d RobotModel::torque_limits() const {
  Vector12d v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = links[i].torque_limit;
  return v;
}

Vector12d RobotModel::soft_lower_limits() const {
  Vector12d v;
  for (int i = 0; i < kNumJoints; ++i) {
    const double margin = 0.05 * (links[i].upper - links[i].lower);
    v[i] = links[i].lower + margin;
  }
  return v;
}

Vector12d RobotModel::soft_upper_limits() const {
  Vector12d v;
  for (int i = 0; i < kNumJoints; ++i) {
    const double margin = 0.05 * (links[i].upper - links[i].lower);
    v[i] = links[i].upper - margin;
  }
  return v;
}

double RobotModel::standing_height() const {
  const auto feet = feet_in_base(*this, q_nom);
  double lowest = 0.0;
  for (const auto& f : feet) lowest = std::min(lowest, f.z());
  return -lowest + collision.foot_radius;
}

RobotModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_from_json(ss.str());
}

RobotModel load_model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("parse error: ") + e.what());
  }
  if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1)
    fail("missing or unsupported schema_version");
  for (const char* key : {"links", "joints", "q_nom", "foot_offset"})
    if (!doc.contains(key)) fail(std::string("missing '") + key + "'");

  std::map<std::string, RawLink> raw_links;
  for (const auto& jl : doc["links"]) {
    const std::string name = jl.at("name").get<std::string>();
    if (raw_links.count(name)) fail("duplicate link '" + name + "'");
    RawLink rl{jl.at("mass").get<double>(), vec3(jl, "com"), vec3(jl, "inertia")};
    if (rl.mass <= 0.0) fail("non-positive mass on link '" + name + "'");
    if (rl.inertia.minCoeff() <= 0.0) fail("non-positive inertia on link '" + name + "'");
    raw_links[name] = rl;
  }
  if (raw_links.size() != 13) fail("expected exactly 13 links (base + 12)");
  if (!raw_links.count("base")) fail("missing link 'base'");

  std::map<std::string, RawJoint> joints_by_child;
  std::multimap<std::string, std::string> children;  // parent link -> child link
  for (const auto& jj : doc["joints"]) {
    RawJoint rj;
    rj.parent = jj.at("parent").get<std::string>();
    rj.child = jj.at("child").get<std::string>();
    rj.origin = vec3(jj, "origin");
    rj.axis = vec3(jj, "axis");
    const auto& lim = jj.at("limits");
    rj.lower = lim.at("lower").get<double>();
    rj.upper = lim.at("upper").get<double>();
    rj.velocity = lim.at("velocity").get<double>();
    rj.torque = lim.at("torque").get<double>();
    if (!raw_links.count(rj.parent)) fail("joint parent '" + rj.parent + "' is not a link");
    if (!raw_links.count(rj.child)) fail("joint child '" + rj.child + "' is not a link");
    if (rj.lower >= rj.upper) fail("limits must satisfy lower < upper on '" + rj.child + "'");
    if (rj.velocity <= 0.0 || rj.torque <= 0.0)
      fail("velocity/torque limits must be positive on '" + rj.child + "'");
    if (std::abs(rj.axis.norm() - 1.0) > 1e-9) fail("joint axis must be unit on '" + rj.child + "'");
    if (joints_by_child.count(rj.child)) fail("link '" + rj.child + "' has two parent joints");
    joints_by_child[rj.child] = rj;
    children.emplace(rj.parent, rj.child);
  }
  if (joints_by_child.size() != 12) fail("expected exactly 12 joints");

  // hips are the base's children; identify legs by hip origin quadrant
  if (children.count("base") != 4) fail("expected exactly 4 hip joints on the base");
  std::array<std::string, 4> hip_of_leg;  // FL, FR, RL, RR
  std::array<bool, 4> seen{};
  auto [lo, hi] = children.equal_range("base");
  for (auto it = lo; it != hi; ++it) {
    const RawJoint& hip = joints_by_child[it->second];
    const bool front = hip.origin.x() > 0.0, left = hip.origin.y() > 0.0;
    const int leg = (front ? 0 : 2) + (left ? 0 : 1);
    if (seen[leg]) fail("two hip joints in the same quadrant");
    seen[leg] = true;
    hip_of_leg[leg] = it->second;
  }

  RobotModel model;
  model.name = doc.value("name", "");
  const RawLink& base = raw_links["base"];
  model.base_mass = base.mass;
  model.base_com = base.com;
  model.base_inertia_diag = base.inertia;

  auto fill_link = [&](int idx, const std::string& child, int parent_idx) {
    const RawJoint& rj = joints_by_child[child];
    const RawLink& rl = raw_links[child];
    Link& l = model.links[idx];
    l.name = child;
    l.parent = parent_idx;
    l.joint_origin = rj.origin;
    l.axis = rj.axis;
    l.mass = rl.mass;
    l.com = rl.com;
    l.inertia_diag = rl.inertia;
    l.lower = rj.lower;
    l.upper = rj.upper;
    l.velocity_limit = rj.velocity;
    l.torque_limit = rj.torque;
  };

  for (int leg = 0; leg < 4; ++leg) {
    std::string link_name = hip_of_leg[leg];
    int parent = -1;
    for (int depth = 0; depth < 3; ++depth) {
      const int idx = 3 * leg + depth;
      fill_link(idx, link_name, parent);
      parent = idx;
      const auto n = children.count(link_name);
      if (depth < 2) {
        if (n != 1) fail("leg chain must be hip -> thigh -> calf at '" + link_name + "'");
        link_name = children.find(link_name)->second;
      } else if (n != 0) {
        fail("calf '" + link_name + "' must be a leaf");
      }
    }
  }

  const auto& jq = doc["q_nom"];
  if (!jq.is_array() || jq.size() != 12) fail("q_nom must have 12 entries");
  for (int i = 0; i < 12; ++i) model.q_nom[i] = jq[i].get<double>();
  model.foot_offset = vec3(doc, "foot_offset");

  if (doc.contains("collision")) {
    const auto& jc = doc["collision"];
    model.collision.base_half_extents = vec3(jc, "base_half_extents");
    model.collision.hip_radius = jc.at("hip_radius").get<double>();
    model.collision.foot_radius = jc.at("foot_radius").get<double>();
    model.collision.calf_clearance = jc.value("calf_clearance", 0.05);
    model.collision.calf_ground_tolerance = jc.value("calf_ground_tolerance", 0.04);
  }

  // mirror symmetry, required by the symmetry reward
  for (int pair = 0; pair < 2; ++pair) {
    const int left = 6 * pair, right = 6 * pair + 3;
    for (int depth = 0; depth < 3; ++depth)
      check_mirrored(model.links[left + depth], model.links[right + depth],
                     model.links[left + depth].name + "/" + model.links[right + depth].name);
  }
  for (int i = 0; i < 12; ++i)
    if (model.q_nom[i] < model.links[i].lower || model.q_nom[i] > model.links[i].upper)
      fail("q_nom outside joint limits at index " + std::to_string(i));

  return model;
}

std::array<FramePose, 12> link_poses(const RobotModel& model, const BasePose& base,
                                     const Vector12d& q) {
  std::array<FramePose, 12> poses;
  const Eigen::Matrix3d base_rot = base.orientation.rotation_matrix();
  for (int i = 0; i < 12; ++i) {
    const Link& l = model.links[i];
    const Eigen::Vector3d parent_origin = l.parent < 0 ? base.position : poses[l.parent].origin;
    const Eigen::Matrix3d parent_rot = l.parent < 0 ? base_rot : poses[l.parent].rot;
    poses[i].origin = parent_origin + parent_rot * l.joint_origin;
    poses[i].rot = parent_rot * rotation_about(l.axis, q[i]);
  }
  return poses;
}

std::array<Eigen::Vector3d, 4> fk_feet(const RobotModel& model, const BasePose& base,
                                       const Vector12d& q) {
  const auto poses = link_poses(model, base, q);
  std::array<Eigen::Vector3d, 4> feet;
  for (int leg = 0; leg < 4; ++leg) {
    const FramePose& calf = poses[3 * leg + 2];
    feet[leg] = calf.origin + calf.rot * model.foot_offset;
  }
  return feet;
}

std::array<Eigen::Vector3d, 4> feet_in_base(const RobotModel& model, const Vector12d& q) {
  return fk_feet(model, BasePose{}, q);
}

Matrix3x18d foot_jacobian(const RobotModel& model, const BasePose& base, const Vector12d& q,
                          int foot_index) {
  if (foot_index < 0 || foot_index >= 4) throw std::invalid_argument("foot_jacobian: bad foot index");
  const auto poses = link_poses(model, base, q);
  const FramePose& calf = poses[3 * foot_index + 2];
  const Eigen::Vector3d foot = calf.origin + calf.rot * model.foot_offset;

  Matrix3x18d jac = Matrix3x18d::Zero();
  jac.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d r = foot - base.position;
  Eigen::Matrix3d skew;
  skew << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
  jac.block<3, 3>(0, 3) = -skew;

  const Eigen::Matrix3d base_rot = base.orientation.rotation_matrix();
  for (int depth = 0; depth < 3; ++depth) {
    const int idx = 3 * foot_index + depth;
    const Link& l = model.links[idx];
    const Eigen::Matrix3d parent_rot = l.parent < 0 ? base_rot : poses[l.parent].rot;
    const Eigen::Vector3d axis_world = parent_rot * l.axis;
    jac.col(6 + idx) = axis_world.cross(foot - poses[idx].origin);
  }
  return jac;
}

}  // namespace qj::robot
