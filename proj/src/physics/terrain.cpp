#include "quadjump/physics/terrain.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qj::phys {

using nlohmann::json;

const char* to_string(ObstacleClass c) {
  switch (c) {
    case ObstacleClass::Barrier: return "barrier";
    case ObstacleClass::Box: return "box";
    case ObstacleClass::Slope: return "slope";
  }
  return "?";
}

ObstacleClass obstacle_class_from_string(const std::string& s) {
  if (s == "barrier") return ObstacleClass::Barrier;
  if (s == "box") return ObstacleClass::Box;
  if (s == "slope") return ObstacleClass::Slope;
  throw std::runtime_error("terrain: unknown obstacle class '" + s + "'");
}

double Obstacle::surface_height(double x, double y) const {
  (void)y;
  if (cls == ObstacleClass::Slope) {
    const double rise = (x - x_min()) * std::tan(slope_angle);
    return std::clamp(rise, 0.0, height);
  }
  return top();
}

void Terrain::validate() const {
  for (const auto& o : obstacles) {
    if (o.length <= 0.0 || o.width <= 0.0 || o.height <= 0.0)
      throw std::runtime_error("terrain: obstacle dimensions must be positive");
    if (o.cls == ObstacleClass::Slope && (o.slope_angle <= 0.0 || o.slope_angle >= M_PI_2))
      throw std::runtime_error("terrain: slope angle must be in (0, pi/2)");
  }
  for (size_t i = 0; i < obstacles.size(); ++i)
    for (size_t j = i + 1; j < obstacles.size(); ++j) {
      const auto& a = obstacles[i];
      const auto& b = obstacles[j];
      const bool apart = a.x_max() <= b.x_min() || b.x_max() <= a.x_min() ||
                         a.y_max() <= b.y_min() || b.y_max() <= a.y_min();
      if (!apart) throw std::runtime_error("terrain: overlapping obstacles");
    }
}

SurfaceSample terrain_query(const Terrain& terrain, double x, double y) {
  SurfaceSample s{terrain.ground_height, Eigen::Vector3d::UnitZ()};
  for (const auto& o : terrain.obstacles) {
    if (!o.footprint_contains(x, y)) continue;
    const double h = terrain.ground_height + o.surface_height(x, y);
    if (h <= s.height) continue;
    s.height = h;
    if (o.cls == ObstacleClass::Slope && o.surface_height(x, y) < o.height) {
      // on the rising face
      s.normal = Eigen::Vector3d(-std::sin(o.slope_angle), 0.0, std::cos(o.slope_angle));
    } else {
      s.normal = Eigen::Vector3d::UnitZ();
    }
  }
  return s;
}

bool point_inside(const Terrain& terrain, const Eigen::Vector3d& p) {
  if (p.z() < terrain.ground_height) return true;
  for (const auto& o : terrain.obstacles)
    if (o.footprint_contains(p.x(), p.y()) &&
        p.z() < terrain.ground_height + o.surface_height(p.x(), p.y()))
      return true;
  return false;
}

Terrain make_obstacle_terrain(const Obstacle& obstacle) {
  Terrain t;
  t.obstacles.push_back(obstacle);
  t.validate();
  return t;
}

std::string terrain_to_json(const Terrain& terrain) {
  json doc;
  doc["schema_version"] = 1;
  doc["ground_height"] = terrain.ground_height;
  doc["obstacles"] = json::array();
  for (const auto& o : terrain.obstacles) {
    json jo;
    jo["class"] = to_string(o.cls);
    jo["center"] = {o.center.x(), o.center.y(), o.center.z()};
    jo["length"] = o.length;
    jo["width"] = o.width;
    jo["height"] = o.height;
    if (o.cls == ObstacleClass::Slope) jo["slope_angle"] = o.slope_angle;
    doc["obstacles"].push_back(jo);
  }
  return doc.dump(2);
}

Terrain terrain_from_json(const std::string& text) {
  json doc = json::parse(text);
  Terrain t;
  t.ground_height = doc.value("ground_height", 0.0);
  for (const auto& jo : doc.at("obstacles")) {
    Obstacle o;
    o.cls = obstacle_class_from_string(jo.at("class").get<std::string>());
    const auto& c = jo.at("center");
    o.center = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
    o.length = jo.at("length").get<double>();
    o.width = jo.at("width").get<double>();
    o.height = jo.at("height").get<double>();
    o.slope_angle = jo.value("slope_angle", 0.0);
    t.obstacles.push_back(o);
  }
  t.validate();
  return t;
}

}  // namespace qj::phys
