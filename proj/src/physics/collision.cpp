#include "quadjump/physics/collision.hpp"

#include <algorithm>
#include <cmath>

namespace qj::phys {

namespace {

Eigen::Vector3d aabb_lo(const Terrain& terrain, const Obstacle& o) {
  return {o.x_min(), o.y_min(), terrain.ground_height + o.center.z() - 0.5 * o.height};
}

Eigen::Vector3d aabb_hi(const Terrain& terrain, const Obstacle& o) {
  return {o.x_max(), o.y_max(), terrain.ground_height + o.center.z() + 0.5 * o.height};
}

bool sphere_intersects_aabb(const Eigen::Vector3d& c, double r, const Eigen::Vector3d& lo,
                            const Eigen::Vector3d& hi) {
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double v = std::clamp(c[k], lo[k], hi[k]) - c[k];
    d2 += v * v;
  }
  return d2 < r * r;
}

// points below the rising face of a slope; used where exact tests are overkill
bool segment_hits_slope(const Terrain& terrain, const Obstacle& o, const Eigen::Vector3d& p0,
                        const Eigen::Vector3d& p1) {
  constexpr int kSamples = 12;
  for (int i = 0; i <= kSamples; ++i) {
    const Eigen::Vector3d p = p0 + (p1 - p0) * (static_cast<double>(i) / kSamples);
    if (o.footprint_contains(p.x(), p.y()) &&
        p.z() < terrain.ground_height + o.surface_height(p.x(), p.y()))
      return true;
  }
  return false;
}

}  // namespace

bool segment_intersects_aabb(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                             const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  const Eigen::Vector3d d = p1 - p0;
  double tmin = 0.0, tmax = 1.0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-12) {
      if (p0[k] < lo[k] || p0[k] > hi[k]) return false;
    } else {
      double t1 = (lo[k] - p0[k]) / d[k];
      double t2 = (hi[k] - p0[k]) / d[k];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return false;
    }
  }
  return true;
}

bool obb_intersects_aabb(const Eigen::Vector3d& obb_center, const Eigen::Matrix3d& obb_rot,
                         const Eigen::Vector3d& obb_half, const Eigen::Vector3d& lo,
                         const Eigen::Vector3d& hi) {
  // separating axis test (Ericson, Real-Time Collision Detection 4.4.1)
  const Eigen::Vector3d a_center = 0.5 * (lo + hi);
  const Eigen::Vector3d a_half = 0.5 * (hi - lo);
  const Eigen::Matrix3d& r = obb_rot;
  Eigen::Matrix3d abs_r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) abs_r(i, j) = std::abs(r(i, j)) + 1e-12;
  const Eigen::Vector3d t = obb_center - a_center;

  // world axes
  for (int i = 0; i < 3; ++i)
    if (std::abs(t[i]) > a_half[i] + abs_r.row(i).dot(obb_half)) return false;
  // obb axes
  for (int j = 0; j < 3; ++j)
    if (std::abs(r.col(j).dot(t)) > obb_half[j] + abs_r.col(j).dot(a_half)) return false;
  // cross products
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      const double ra = a_half[i1] * abs_r(i2, j) + a_half[i2] * abs_r(i1, j);
      const double rb = obb_half[j1] * abs_r(i, j2) + obb_half[j2] * abs_r(i, j1);
      const double tl = std::abs(t[i2] * r(i1, j) - t[i1] * r(i2, j));
      if (tl > ra + rb) return false;
    }
  return true;
}

bool check_body_collision(const robot::RobotModel& model, const robot::BasePose& base,
                          const Vector12d& q, const Terrain& terrain) {
  const auto poses = robot::link_poses(model, base, q);
  const auto feet = robot::fk_feet(model, base, q);
  const Eigen::Matrix3d base_rot = base.orientation.rotation_matrix();
  const Eigen::Vector3d& half = model.collision.base_half_extents;
  const double gh = terrain.ground_height;

  // base box vs ground: lowest extent of the oriented box
  double reach = 0.0;
  for (int k = 0; k < 3; ++k) reach += std::abs(base_rot(2, k)) * half[k];
  if (base.position.z() - reach < gh) return true;

  std::array<Eigen::Vector3d, 4> hips, knees, calf_ends;
  for (int leg = 0; leg < 4; ++leg) {
    hips[leg] = poses[3 * leg + 1].origin;  // thigh joint = hip hardware cluster
    knees[leg] = poses[3 * leg + 2].origin;
    const Eigen::Vector3d dir = feet[leg] - knees[leg];
    const double len = dir.norm();
    const double keep = len > 1e-9 ? std::max(0.0, 1.0 - model.collision.calf_clearance / len) : 0.0;
    calf_ends[leg] = knees[leg] + keep * dir;
  }

  const double tol = model.collision.calf_ground_tolerance;
  for (int leg = 0; leg < 4; ++leg) {
    if (hips[leg].z() - model.collision.hip_radius < gh) return true;
    if (std::min(knees[leg].z(), calf_ends[leg].z()) < gh - tol) return true;
  }

  for (const auto& o : terrain.obstacles) {
    if (o.cls == ObstacleClass::Slope) {
      for (int leg = 0; leg < 4; ++leg) {
        Eigen::Vector3d k_lift = knees[leg], c_lift = calf_ends[leg];
        k_lift.z() += tol;
        c_lift.z() += tol;
        if (segment_hits_slope(terrain, o, k_lift, c_lift)) return true;
        Eigen::Vector3d hc = hips[leg];
        hc.z() -= model.collision.hip_radius;
        if (o.footprint_contains(hc.x(), hc.y()) &&
            hc.z() < gh + o.surface_height(hc.x(), hc.y()))
          return true;
      }
      // bottom face of the base box, sampled
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) {
          const Eigen::Vector3d p =
              base.position + base_rot * Eigen::Vector3d(i * half.x(), j * half.y(), -half.z());
          if (o.footprint_contains(p.x(), p.y()) &&
              p.z() < gh + o.surface_height(p.x(), p.y()))
            return true;
        }
      continue;
    }

    const Eigen::Vector3d lo = aabb_lo(terrain, o);
    const Eigen::Vector3d hi = aabb_hi(terrain, o);
    if (obb_intersects_aabb(base.position, base_rot, half, lo, hi)) return true;
    Eigen::Vector3d hi_calf = hi;  // grazing the top within the tolerance is contact, not collision
    hi_calf.z() = std::max(lo.z(), hi.z() - tol);
    for (int leg = 0; leg < 4; ++leg) {
      if (sphere_intersects_aabb(hips[leg], model.collision.hip_radius, lo, hi)) return true;
      if (segment_intersects_aabb(knees[leg], calf_ends[leg], lo, hi_calf)) return true;
    }
  }
  return false;
}

}  // namespace qj::phys
