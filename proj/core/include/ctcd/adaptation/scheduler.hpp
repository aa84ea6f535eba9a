#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ctcd::adaptation {

struct Point {
  double x = 0.0;  // m, planar map frame
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

struct RoutePlan {
  std::vector<Point> waypoints;
  double speed = 20.0;             // m/s
  double sample_spacing = 1000.0;  // m

  /// Throws ConfigError unless >= 2 waypoints, speed > 0 and sample_spacing > 0.
  void validate() const;
  double length() const;
  /// Position at arclength s, clamped to the route ends.
  Point at(double s) const;
};

struct SceneRegion {
  std::string scene_id;
  std::vector<Point> polygon;  // simple, either orientation, implicitly closed
};

struct SceneMap {
  std::vector<SceneRegion> regions;
  std::string default_scene_id = "default";

  /// Throws ConfigError on degenerate or self-intersecting polygons.
  void validate() const;
  /// First region (in list order) containing p, boundary included; otherwise the default.
  const std::string& lookup(Point p) const;
};

/// True when p lies inside or on the boundary of the polygon.
bool point_in_polygon(Point p, const std::vector<Point>& polygon);

struct SceneChange {
  double sample_arclength = 0.0;    // first coarse sample reporting the new scene
  double boundary_arclength = 0.0;  // bisection-refined
  std::string scene_id;
};

/// Boundary localization tolerance of the bisection, in metres.
inline constexpr double kBoundaryTolerance = 0.01;

/// Samples the route every sample_spacing metres (plus the final waypoint), starting at
/// `from_arclength`, and returns the first sample whose scene differs from `current_scene`
/// with the boundary refined between it and the previous sample.
std::optional<SceneChange> detect_scene_change(const RoutePlan& route, const SceneMap& map,
                                               const std::string& current_scene, double from_arclength = 0.0);

struct TimeBudget {
  double transmission_time = 10.0;  // s
  double inference_time = 10.0;     // s
  double refinement_time = 40.0;    // s

  void validate() const;
  double total() const { return transmission_time + inference_time + refinement_time; }
};

struct RefinementPlan {
  double boundary_arclength = 0.0;
  double trigger_arclength = 0.0;
  bool feasible = true;
  std::string new_scene_id;
};

/// Latest feasible trigger: boundary - speed * budget.total(), clamped to the current
/// position (and flagged infeasible) when that point is already behind the vehicle.
RefinementPlan plan_refinement(double boundary_arclength, double current_arclength, double speed,
                               const TimeBudget& budget, std::string new_scene_id = {});

}  // namespace ctcd::adaptation
