#pragma once

#include "quadjump/physics/terrain.hpp"
#include "quadjump/robot/model.hpp"

namespace qj::phys {

// True iff the base box, a hip sphere, or a calf segment (excluding the
// foot end) intersects the ground or an obstacle. Feet are allowed to
// touch; they are the contact elements.
bool check_body_collision(const robot::RobotModel& model, const robot::BasePose& base,
                          const Vector12d& q, const Terrain& terrain);

// exact helpers, also used as oracles in tests
bool segment_intersects_aabb(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                             const Eigen::Vector3d& lo, const Eigen::Vector3d& hi);
bool obb_intersects_aabb(const Eigen::Vector3d& obb_center, const Eigen::Matrix3d& obb_rot,
                         const Eigen::Vector3d& obb_half, const Eigen::Vector3d& lo,
                         const Eigen::Vector3d& hi);

}  // namespace qj::phys
