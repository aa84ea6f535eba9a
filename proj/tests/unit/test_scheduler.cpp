#include <gtest/gtest.h>

#include <cmath>

#include "ctcd/adaptation/scheduler.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/common/random.hpp"

namespace ctcd::adaptation {
namespace {

std::vector<Point> rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

RoutePlan straight(double length, double spacing = 1000.0, double speed = 20.0) {
  RoutePlan r;
  r.waypoints = {{0, 0}, {length, 0}};
  r.sample_spacing = spacing;
  r.speed = speed;
  return r;
}

SceneMap one_region(double x_start, double x_end = 1e9) {
  SceneMap m;
  m.default_scene_id = "city";
  m.regions.push_back({"bridge", rect(x_start, -100, x_end, 100)});
  return m;
}

TEST(Route, ValidationAndGeometry) {
  RoutePlan r;
  r.waypoints = {{0, 0}};
  EXPECT_THROW(r.validate(), ConfigError);
  r.waypoints = {{0, 0}, {3, 4}, {3, 10}};
  EXPECT_DOUBLE_EQ(r.length(), 11.0);
  EXPECT_EQ(r.at(2.5), (Point{1.5, 2.0}));
  EXPECT_EQ(r.at(8.0), (Point{3.0, 7.0}));
  EXPECT_EQ(r.at(-1.0), (Point{0, 0}));
  EXPECT_EQ(r.at(99.0), (Point{3, 10}));
  r.speed = 0.0;
  EXPECT_THROW(r.validate(), ConfigError);
  r.speed = 1.0;
  r.sample_spacing = -1.0;
  EXPECT_THROW(r.validate(), ConfigError);
}

TEST(SceneMap, PointInPolygonIncludesBoundary) {
  const auto sq = rect(0, 0, 10, 10);
  EXPECT_TRUE(point_in_polygon({5, 5}, sq));
  EXPECT_TRUE(point_in_polygon({0, 5}, sq));
  EXPECT_TRUE(point_in_polygon({10, 10}, sq));
  EXPECT_FALSE(point_in_polygon({10.001, 5}, sq));
  const std::vector<Point> concave{{0, 0}, {10, 0}, {10, 10}, {5, 2}, {0, 10}};
  EXPECT_FALSE(point_in_polygon({5, 8}, concave));
  EXPECT_TRUE(point_in_polygon({5, 1}, concave));
}

TEST(SceneMap, FirstMatchByListOrder) {
  SceneMap m;
  m.default_scene_id = "d";
  m.regions = {{"a", rect(0, 0, 10, 10)}, {"b", rect(5, 5, 20, 20)}};
  EXPECT_EQ(m.lookup({7, 7}), "a");
  EXPECT_EQ(m.lookup({15, 15}), "b");
  EXPECT_EQ(m.lookup({-5, 0}), "d");
}

TEST(SceneMap, RejectsBadPolygons) {
  SceneMap m;
  m.regions = {{"bow", {{0, 0}, {10, 10}, {10, 0}, {0, 10}}}};
  EXPECT_THROW(m.validate(), ConfigError);
  m.regions = {{"line", {{0, 0}, {1, 1}, {2, 2}}}};
  EXPECT_THROW(m.validate(), ConfigError);
  m.regions = {{"two", {{0, 0}, {1, 1}}}};
  EXPECT_THROW(m.validate(), ConfigError);
  m.regions = {{"ok", rect(0, 0, 1, 1)}};
  EXPECT_NO_THROW(m.validate());
}

TEST(DetectSceneChange, NoChangeInsideOneRegion) {
  SceneMap m;
  m.default_scene_id = "city";
  EXPECT_FALSE(detect_scene_change(straight(10000), m, "city").has_value());
}

TEST(DetectSceneChange, BoundaryOnSamplePoint) {
  const auto c = detect_scene_change(straight(10000), one_region(6000), "city");
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->scene_id, "bridge");
  EXPECT_DOUBLE_EQ(c->sample_arclength, 6000.0);
  EXPECT_NEAR(c->boundary_arclength, 6000.0, 1.0);
}

TEST(DetectSceneChange, BoundaryJustPastSample) {
  const auto c = detect_scene_change(straight(10000), one_region(6000.5), "city");
  ASSERT_TRUE(c.has_value());
  EXPECT_DOUBLE_EQ(c->sample_arclength, 7000.0);
  EXPECT_NEAR(c->boundary_arclength, 6000.5, 1.0);
}

TEST(DetectSceneChange, FinalWaypointIsSampled) {
  const auto c = detect_scene_change(straight(2500), one_region(2400), "city");
  ASSERT_TRUE(c.has_value());
  EXPECT_DOUBLE_EQ(c->sample_arclength, 2500.0);
  EXPECT_NEAR(c->boundary_arclength, 2400.0, 1.0);
}

TEST(PlanRefinement, ArithmeticCases) {
  const TimeBudget budget{10, 10, 40};
  const auto p = plan_refinement(6000, 0, 20, budget, "bridge");
  EXPECT_DOUBLE_EQ(p.trigger_arclength, 4800.0);
  EXPECT_TRUE(p.feasible);
  EXPECT_EQ(p.new_scene_id, "bridge");

  const auto z = plan_refinement(6000, 0, 20, TimeBudget{0, 0, 0});
  EXPECT_DOUBLE_EQ(z.trigger_arclength, 6000.0);
  EXPECT_TRUE(z.feasible);

  const auto late = plan_refinement(500, 0, 20, budget);
  EXPECT_FALSE(late.feasible);
  EXPECT_DOUBLE_EQ(late.trigger_arclength, 0.0);
}

TEST(PlanRefinement, Errors) {
  EXPECT_THROW(plan_refinement(100, 0, 0.0, TimeBudget{}), ConfigError);
  EXPECT_THROW(plan_refinement(100, 0, -1.0, TimeBudget{}), ConfigError);
  EXPECT_THROW(plan_refinement(100, 0, 1.0, TimeBudget{-1, 0, 0}), ConfigError);
  EXPECT_THROW(plan_refinement(100, 200, 1.0, TimeBudget{}), PreconditionError);
}

// Straight routes in random directions through an axis-aligned rectangle ahead of the
// start: the boundary is where the ray first enters the rectangle.
TEST(Scheduler, MatchesClosedFormOracleOnRandomRoutes) {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const double theta = rng.uniform(-0.6, 0.6);
    const double length = rng.uniform(4000, 12000);
    const double enter = rng.uniform(500, length - 200);  // distance along x to the region
    const Point dir{std::cos(theta), std::sin(theta)};
    RoutePlan route;
    route.waypoints = {{0, 0}, {length * dir.x, length * dir.y}};
    route.speed = rng.uniform(5, 35);
    route.sample_spacing = rng.uniform(100, 1000);
    SceneMap map;
    map.default_scene_id = "city";
    map.regions.push_back({"new", rect(enter, -1e5, 1e5, 1e5)});

    const double oracle = enter / dir.x;  // ray x(s) = s cos(theta) reaches x = enter
    const auto change = detect_scene_change(route, map, "city");
    if (oracle > route.length()) {
      EXPECT_FALSE(change.has_value());
      continue;
    }
    ASSERT_TRUE(change.has_value()) << "trial " << trial;
    EXPECT_NEAR(change->boundary_arclength, oracle, 1.0) << "trial " << trial;

    const TimeBudget budget{rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0, 60)};
    const auto plan = plan_refinement(change->boundary_arclength, 0.0, route.speed, budget, change->scene_id);
    const double expected = change->boundary_arclength - route.speed * budget.total();
    if (expected >= 0.0) {
      EXPECT_TRUE(plan.feasible);
      EXPECT_EQ(plan.trigger_arclength, expected);
      // Refinement started at the trigger completes exactly at the boundary.
      EXPECT_LE(plan.trigger_arclength / route.speed + budget.total(),
                change->boundary_arclength / route.speed + 1e-9);
    } else {
      EXPECT_FALSE(plan.feasible);
      EXPECT_EQ(plan.trigger_arclength, 0.0);
    }
  }
}

}  // namespace
}  // namespace ctcd::adaptation
