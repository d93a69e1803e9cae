#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace qj::phys {

enum class ObstacleClass { Barrier, Box, Slope };

const char* to_string(ObstacleClass c);
ObstacleClass obstacle_class_from_string(const std::string& s);

// Axis-aligned obstacle resting on the ground plane. center is the 3D
// centre of the body (so center.z() == height / 2 on flat ground);
// length/width/height are the full extents along x/y/z. Slopes rise along
// +x from the near edge, reaching `height` at the far edge.
struct Obstacle {
  ObstacleClass cls = ObstacleClass::Box;
  Eigen::Vector3d center{0, 0, 0};
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double slope_angle = 0.0;  // [rad], slopes only

  double x_min() const { return center.x() - 0.5 * length; }
  double x_max() const { return center.x() + 0.5 * length; }
  double y_min() const { return center.y() - 0.5 * width; }
  double y_max() const { return center.y() + 0.5 * width; }
  double top() const { return center.z() + 0.5 * height; }

  bool footprint_contains(double x, double y) const {
    return x >= x_min() && x <= x_max() && y >= y_min() && y <= y_max();
  }
  // surface height at (x, y); only meaningful inside the footprint
  double surface_height(double x, double y) const;
};

struct Terrain {
  double ground_height = 0.0;
  std::vector<Obstacle> obstacles;

  // throws std::runtime_error on non-positive dimensions or overlapping obstacles
  void validate() const;
};

struct SurfaceSample {
  double height;
  Eigen::Vector3d normal;
};

// Topmost supporting surface under (x, y) with its unit normal.
SurfaceSample terrain_query(const Terrain& terrain, double x, double y);

// True if p lies below a supporting surface (inside ground or an obstacle).
bool point_inside(const Terrain& terrain, const Eigen::Vector3d& p);

Terrain make_obstacle_terrain(const Obstacle& obstacle);

std::string terrain_to_json(const Terrain& terrain);
Terrain terrain_from_json(const std::string& text);

}  // namespace qj::phys
