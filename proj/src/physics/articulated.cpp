#include "quadjump/physics/articulated.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace qj::phys {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Eigen::Matrix3d rotation_about(const Eigen::Vector3d& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const Eigen::Matrix3d k = skew(axis);
  return Eigen::Matrix3d::Identity() + s * k + (1 - c) * k * k;
}

// 3 x dof Jacobians of a world point rigidly attached to `body`
// (0 = base, i+1 = link i) and of the body's angular velocity.
void point_jacobian(const TreeModel& model, const std::vector<BodyKinematics>& kin, int body,
                    const Eigen::Vector3d& point, Eigen::MatrixXd& jv, Eigen::MatrixXd* jw) {
  const int dof = model.dof();
  jv.setZero(3, dof);
  jv.block<3, 3>(0, 0).setIdentity();
  jv.block<3, 3>(0, 3) = -skew(point - kin[0].origin);
  if (jw) {
    jw->setZero(3, dof);
    jw->block<3, 3>(0, 3).setIdentity();
  }
  int idx = body - 1;  // link index, -1 when body is the base
  while (idx >= 0) {
    const Eigen::Vector3d& s = kin[idx + 1].axis_world;
    jv.col(6 + idx) = s.cross(point - kin[idx + 1].origin);
    if (jw) jw->col(6 + idx) = s;
    idx = model.links[idx].parent;
  }
}

}  // namespace

TreeModel make_tree(const robot::RobotModel& model) {
  TreeModel tree;
  tree.base_mass = model.base_mass;
  tree.base_com = model.base_com;
  tree.base_inertia = model.base_inertia_diag.asDiagonal();
  tree.links.reserve(robot::RobotModel::kNumJoints);
  for (const auto& l : model.links) {
    TreeLink t;
    t.parent = l.parent;
    t.joint_origin = l.joint_origin;
    t.axis = l.axis;
    t.mass = l.mass;
    t.com = l.com;
    t.inertia = l.inertia_diag.asDiagonal();
    tree.links.push_back(t);
  }
  return tree;
}

std::vector<BodyKinematics> tree_kinematics(const TreeModel& model, const TreeState& state) {
  const int n = static_cast<int>(model.links.size());
  std::vector<BodyKinematics> kin(n + 1);

  BodyKinematics& base = kin[0];
  base.origin = state.base_pos;
  base.rot = state.base_quat.rotation_matrix();
  base.com = base.origin + base.rot * model.base_com;
  base.omega = state.omega_world;
  base.v_origin = state.v_world;
  base.v_com = base.v_origin + base.omega.cross(base.rot * model.base_com);
  base.alpha_bias.setZero();
  base.a_com_bias = base.omega.cross(base.omega.cross(base.rot * model.base_com));

  for (int i = 0; i < n; ++i) {
    const TreeLink& link = model.links[i];
    const BodyKinematics& p = kin[link.parent + 1];
    BodyKinematics& b = kin[i + 1];

    const Eigen::Vector3d r = p.rot * link.joint_origin;
    b.origin = p.origin + r;
    b.axis_world = p.rot * link.axis;
    b.rot = p.rot * rotation_about(link.axis, state.q[i]);
    b.omega = p.omega + b.axis_world * state.qd[i];
    b.v_origin = p.v_origin + p.omega.cross(r);
    // qddot = 0 bias term
    b.alpha_bias = p.alpha_bias + p.omega.cross(b.axis_world * state.qd[i]);
    b.com = b.origin + b.rot * link.com;
    b.v_com = b.v_origin + b.omega.cross(b.rot * link.com);
    b.a_com_bias.setZero();  // filled below once origin bias accelerations are known
  }

  // second sweep for bias accelerations of origins and coms (needs parent origin acc)
  std::vector<Eigen::Vector3d> a_origin(n + 1);
  a_origin[0].setZero();
  for (int i = 0; i < n; ++i) {
    const TreeLink& link = model.links[i];
    const BodyKinematics& p = kin[link.parent + 1];
    BodyKinematics& b = kin[i + 1];
    const Eigen::Vector3d r = p.rot * link.joint_origin;
    a_origin[i + 1] =
        a_origin[link.parent + 1] + p.alpha_bias.cross(r) + p.omega.cross(p.omega.cross(r));
    const Eigen::Vector3d c = b.rot * link.com;
    b.a_com_bias = a_origin[i + 1] + b.alpha_bias.cross(c) + b.omega.cross(b.omega.cross(c));
  }
  return kin;
}

void tree_mass_and_bias(const TreeModel& model, const std::vector<BodyKinematics>& kin,
                        Eigen::MatrixXd& mass, Eigen::VectorXd& bias, double gravity) {
  const int n = static_cast<int>(model.links.size());
  const int dof = model.dof();
  const Eigen::Vector3d g(0, 0, -gravity);

  mass.setZero(dof, dof);
  bias.setZero(dof);
  Eigen::MatrixXd jv(3, dof), jw(3, dof);

  for (int body = 0; body <= n; ++body) {
    const double m = body == 0 ? model.base_mass : model.links[body - 1].mass;
    const Eigen::Matrix3d inertia_body =
        body == 0 ? model.base_inertia : model.links[body - 1].inertia;
    const BodyKinematics& b = kin[body];
    const Eigen::Matrix3d inertia_world = b.rot * inertia_body * b.rot.transpose();

    point_jacobian(model, kin, body, b.com, jv, &jw);
    mass.noalias() += m * jv.transpose() * jv;
    mass.noalias() += jw.transpose() * inertia_world * jw;

    // Coriolis, centrifugal, gyroscopic and gravity terms
    const Eigen::Vector3d f_bias = m * (b.a_com_bias - g);
    const Eigen::Vector3d t_bias =
        inertia_world * b.alpha_bias + b.omega.cross(inertia_world * b.omega);
    bias.noalias() += jv.transpose() * f_bias;
    bias.noalias() += jw.transpose() * t_bias;
  }
}

Eigen::MatrixXd tree_point_jacobian(const TreeModel& model,
                                    const std::vector<BodyKinematics>& kin, int link,
                                    const Eigen::Vector3d& point) {
  Eigen::MatrixXd jv;
  point_jacobian(model, kin, link + 1, point, jv, nullptr);
  return jv;
}

Eigen::VectorXd tree_forward_dynamics(const TreeModel& model, const TreeState& state,
                                      const Eigen::VectorXd& tau,
                                      const std::vector<PointForce>& forces, double gravity) {
  const int n = static_cast<int>(model.links.size());
  const int dof = model.dof();
  const auto kin = tree_kinematics(model, state);

  Eigen::MatrixXd mass;
  Eigen::VectorXd bias;
  tree_mass_and_bias(model, kin, mass, bias, gravity);

  Eigen::VectorXd rhs = -bias;
  rhs.segment(6, n) += tau;

  Eigen::MatrixXd jv(3, dof);
  for (const auto& pf : forces) {
    point_jacobian(model, kin, pf.link + 1, pf.point, jv, nullptr);
    rhs.noalias() += jv.transpose() * pf.force;
  }

  return mass.ldlt().solve(rhs);
}

Eigen::Vector3d total_com(const TreeModel& model, const std::vector<BodyKinematics>& kin) {
  Eigen::Vector3d c = model.base_mass * kin[0].com;
  double m = model.base_mass;
  for (size_t i = 0; i < model.links.size(); ++i) {
    c += model.links[i].mass * kin[i + 1].com;
    m += model.links[i].mass;
  }
  return c / m;
}

Eigen::Vector3d com_velocity(const TreeModel& model, const std::vector<BodyKinematics>& kin) {
  Eigen::Vector3d p = model.base_mass * kin[0].v_com;
  double m = model.base_mass;
  for (size_t i = 0; i < model.links.size(); ++i) {
    p += model.links[i].mass * kin[i + 1].v_com;
    m += model.links[i].mass;
  }
  return p / m;
}

Eigen::Vector3d angular_momentum_about_com(const TreeModel& model,
                                           const std::vector<BodyKinematics>& kin) {
  const Eigen::Vector3d com = total_com(model, kin);
  const Eigen::Vector3d vcom = com_velocity(model, kin);
  Eigen::Vector3d momentum = Eigen::Vector3d::Zero();
  for (size_t body = 0; body < kin.size(); ++body) {
    const double m = body == 0 ? model.base_mass : model.links[body - 1].mass;
    const Eigen::Matrix3d inertia_body =
        body == 0 ? model.base_inertia : model.links[body - 1].inertia;
    const BodyKinematics& b = kin[body];
    const Eigen::Matrix3d inertia_world = b.rot * inertia_body * b.rot.transpose();
    momentum += inertia_world * b.omega;
    momentum += m * (b.com - com).cross(b.v_com - vcom);
  }
  return momentum;
}

double kinetic_energy(const TreeModel& model, const std::vector<BodyKinematics>& kin) {
  double e = 0.0;
  for (size_t body = 0; body < kin.size(); ++body) {
    const double m = body == 0 ? model.base_mass : model.links[body - 1].mass;
    const Eigen::Matrix3d inertia_body =
        body == 0 ? model.base_inertia : model.links[body - 1].inertia;
    const BodyKinematics& b = kin[body];
    const Eigen::Matrix3d inertia_world = b.rot * inertia_body * b.rot.transpose();
    e += 0.5 * m * b.v_com.squaredNorm();
    e += 0.5 * b.omega.dot(inertia_world * b.omega);
  }
  return e;
}

double potential_energy(const TreeModel& model, const std::vector<BodyKinematics>& kin,
                        double gravity) {
  double e = model.base_mass * gravity * kin[0].com.z();
  for (size_t i = 0; i < model.links.size(); ++i)
    e += model.links[i].mass * gravity * kin[i + 1].com.z();
  return e;
}

}  // namespace qj::phys
