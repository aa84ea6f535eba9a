#include "ctcd/adaptation/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "ctcd/common/error.hpp"

namespace ctcd::adaptation {

void RoutePlan::validate() const {
  if (waypoints.size() < 2) throw ConfigError("route needs at least 2 waypoints");
  if (!(speed > 0.0)) throw ConfigError("route speed must be positive");
  if (!(sample_spacing > 0.0)) throw ConfigError("route sample_spacing must be positive");
  for (const auto& p : waypoints)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("route waypoint is not finite");
}

double RoutePlan::length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    s += std::hypot(waypoints[i].x - waypoints[i - 1].x, waypoints[i].y - waypoints[i - 1].y);
  return s;
}

Point RoutePlan::at(double s) const {
  if (waypoints.empty()) return {};
  if (s <= 0.0) return waypoints.front();
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const Point a = waypoints[i - 1];
    const Point b = waypoints[i];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (s <= len && len > 0.0) {
      const double f = s / len;
      return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
    }
    s -= len;
  }
  return waypoints.back();
}

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Point p, Point a, Point b) {
  const double scale = std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y), 1.0});
  if (std::abs(cross(a, b, p)) > 1e-12 * scale * scale) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_intersect(Point a, Point b, Point c, Point d) {
  const int d1 = sign(cross(c, d, a)), d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c)), d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

}  // namespace

bool point_in_polygon(Point p, const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[i];
    const Point b = poly[j];
    if (on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

void SceneMap::validate() const {
  if (default_scene_id.empty()) throw ConfigError("scene map needs a default scene id");
  for (const auto& r : regions) {
    if (r.scene_id.empty()) throw ConfigError("scene region without an id");
    const auto& p = r.polygon;
    const std::size_t n = p.size();
    if (n < 3) throw ConfigError("region '" + r.scene_id + "' needs at least 3 vertices");
    double area = 0.0;
    for (std::size_t i = 0; i < n; ++i) area += cross({0, 0}, p[i], p[(i + 1) % n]);
    if (std::abs(area) <= 0.0) throw ConfigError("region '" + r.scene_id + "' has zero area");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges share a vertex
        if (segments_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]))
          throw ConfigError("region '" + r.scene_id + "' polygon is self-intersecting");
      }
    }
  }
}

const std::string& SceneMap::lookup(Point p) const {
  for (const auto& r : regions)
    if (point_in_polygon(p, r.polygon)) return r.scene_id;
  return default_scene_id;
}

std::optional<SceneChange> detect_scene_change(const RoutePlan& route, const SceneMap& map,
                                               const std::string& current_scene, double from_arclength) {
  route.validate();
  const double total = route.length();
  std::vector<double> samples;
  for (double s = from_arclength; s < total; s += route.sample_spacing) samples.push_back(s);
  samples.push_back(total);

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string& scene = map.lookup(route.at(samples[i]));
    if (scene == current_scene) continue;
    SceneChange c{samples[i], samples[i], scene};
    if (i > 0) {
      double lo = samples[i - 1];
      double hi = samples[i];
      while (hi - lo > kBoundaryTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (map.lookup(route.at(mid)) == current_scene)
          lo = mid;
        else
          hi = mid;
      }
      c.boundary_arclength = hi;
    }
    return c;
  }
  return std::nullopt;
}

void TimeBudget::validate() const {
  if (!(transmission_time >= 0.0) || !(inference_time >= 0.0) || !(refinement_time >= 0.0))
    throw ConfigError("time budget components must be >= 0");
}

RefinementPlan plan_refinement(double boundary_arclength, double current_arclength, double speed,
                               const TimeBudget& budget, std::string new_scene_id) {
  if (!(speed > 0.0)) throw ConfigError("speed must be positive");
  budget.validate();
  if (!(boundary_arclength > current_arclength))
    throw PreconditionError("scene boundary must lie ahead of the current position");
  RefinementPlan p;
  p.boundary_arclength = boundary_arclength;
  p.new_scene_id = std::move(new_scene_id);
  p.trigger_arclength = boundary_arclength - speed * budget.total();
  p.feasible = p.trigger_arclength >= current_arclength;
  if (!p.feasible) p.trigger_arclength = current_arclength;
  return p;
}

}  // namespace ctcd::adaptation
