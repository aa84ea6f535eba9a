#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctcd/adaptation/scheduler.hpp"
#include "ctcd/channel/channel_sim.hpp"
#include "ctcd/codec/codec.hpp"
#include "ctcd/estimator/cdiffusion.hpp"

namespace ctcd::adaptation {

struct DriveConfig {
  double snr_db = 0.0;
  double measurement_spacing = 250.0;  // m between link measurements
  int images_per_measurement = 2;
  int num_draws = 4;
  TimeBudget budget;
  std::uint64_t seed = 1;

  void validate() const;
};

struct DriveModels {
  const codec::SemanticCodec* codec = nullptr;
  channel::OfdmGrid grid;
  std::map<std::string, channel::SceneProfile> profiles;  // every scene the route can visit
  std::vector<int> pilot_positions;
  estimator::EstimatorParams start_model;  // active when the drive begins
  estimator::EstimatorParams fallback;     // used in a new scene until a refined model arrives
  /// Produces the refined estimator for a scene; called once per refinement launch.
  std::function<estimator::EstimatorParams(const std::string& scene_id)> refine;
};

/// Timeline event names.
inline constexpr const char* kEventMeasureAdaptive = "measure_adaptive";
inline constexpr const char* kEventMeasureBaseline = "measure_baseline";
inline constexpr const char* kEventRefinementStart = "refinement_start";
inline constexpr const char* kEventRefinementComplete = "refinement_complete";
inline constexpr const char* kEventBoundaryCrossing = "boundary_crossing";
inline constexpr const char* kEventInfeasible = "warning_infeasible";

/// Event times closer than this are simultaneous. The latest feasible trigger finishes exactly
/// at the crossing, which rounding can move by an ulp either way.
inline constexpr double kEventTimeTolerance = 1e-9;

struct TimelineRecord {
  double sim_time_s = 0.0;
  double arclength_m = 0.0;
  std::string scene_id;
  std::string event;
  std::optional<double> psnr_db;
  std::optional<double> nmse_db;
};

struct DriveResult {
  std::vector<TimelineRecord> timeline;
  std::vector<RefinementPlan> plans;
  int safety_violations = 0;  // feasible plans whose refinement finished after the crossing
};

/// Steps the vehicle along the route. Refinement for an upcoming scene starts at the
/// plan's trigger point and completes budget.total() seconds of simulated time later; the
/// refined estimator is swapped in at the boundary (or on completion, if later). Each
/// measurement point logs the link with refinement (adaptive) and without (baseline, which
/// switches to the fallback model in a new scene).
DriveResult simulate_drive(const RoutePlan& route, const SceneMap& map, const DriveModels& models,
                           std::span<const codec::ImageSample> images, const DriveConfig& config);

void write_timeline_csv(const std::vector<TimelineRecord>& timeline, const std::filesystem::path& path);
std::string timeline_csv(const std::vector<TimelineRecord>& timeline);

}  // namespace ctcd::adaptation
