#include "ctcd/adaptation/drive.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/eval/metrics.hpp"
#include "ctcd/eval/pipeline.hpp"

namespace ctcd::adaptation {

void DriveConfig::validate() const {
  if (!(measurement_spacing > 0.0)) throw ConfigError("measurement_spacing must be positive");
  if (images_per_measurement < 1 || num_draws < 1) throw ConfigError("images_per_measurement and num_draws must be >= 1");
  budget.validate();
}

namespace {

enum class Kind { RefinementStart, RefinementComplete, Boundary };

struct Event {
  double time = 0.0;
  Kind kind = Kind::Boundary;
  std::string scene;
  std::size_t plan = 0;
};

class Simulation {
 public:
  Simulation(const RoutePlan& route, const SceneMap& map, const DriveModels& models,
             std::span<const codec::ImageSample> images, const DriveConfig& config)
      : route_(route), map_(map), models_(models), images_(images), config_(config), length_(route.length()) {}

  DriveResult run() {
    scene_ = map_.lookup(route_.at(0.0));
    adaptive_ = std::make_shared<estimator::EstimatorParams>(models_.start_model.clone());
    baseline_ = adaptive_;
    schedule_next(0.0);
    int m = 0;
    for (double s = 0.0; s <= length_ + 1e-9; s = (++m) * config_.measurement_spacing) {
      process_until(s / route_.speed);
      measure(m, s);
    }
    process_until(length_ / route_.speed);
    return std::move(result_);
  }

 private:
  void log(double time, const std::string& event, std::optional<double> psnr = {}, std::optional<double> nmse = {}) {
    result_.timeline.push_back(
        {time, std::min(time * route_.speed, length_), scene_, event, psnr, nmse});
  }

  void schedule_next(double from) {
    const auto change = detect_scene_change(route_, map_, scene_, from);
    if (!change) return;
    const auto plan = plan_refinement(change->boundary_arclength, from, route_.speed, config_.budget, change->scene_id);
    result_.plans.push_back(plan);
    const std::size_t idx = result_.plans.size() - 1;
    if (!plan.feasible) log(from / route_.speed, kEventInfeasible);
    events_.push_back({plan.trigger_arclength / route_.speed, Kind::RefinementStart, plan.new_scene_id, idx});
    events_.push_back({plan.boundary_arclength / route_.speed, Kind::Boundary, plan.new_scene_id, idx});
  }

  void process_until(double time) {
    while (true) {
      auto next = std::min_element(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
        return std::abs(a.time - b.time) > kEventTimeTolerance ? a.time < b.time : a.kind < b.kind;
      });
      if (next == events_.end() || next->time > time + kEventTimeTolerance) return;
      const Event e = *next;
      events_.erase(next);
      handle(e);
    }
  }

  void handle(const Event& e) {
    switch (e.kind) {
      case Kind::RefinementStart: {
        log(e.time, kEventRefinementStart);
        if (!models_.refine) throw InputError("drive simulation has no refinement procedure");
        pending_ = std::make_shared<estimator::EstimatorParams>(models_.refine(e.scene));
        pending_scene_ = e.scene;
        ready_ = false;
        events_.push_back({e.time + config_.budget.total(), Kind::RefinementComplete, e.scene, e.plan});
        completion_time_ = e.time + config_.budget.total();
        break;
      }
      case Kind::RefinementComplete:
        log(e.time, kEventRefinementComplete);
        ready_ = true;
        if (scene_ == pending_scene_) adaptive_ = pending_;
        break;
      case Kind::Boundary: {
        if (result_.plans[e.plan].feasible && !(completion_time_ <= e.time + kEventTimeTolerance))
          ++result_.safety_violations;
        scene_ = e.scene;
        log(e.time, kEventBoundaryCrossing);
        baseline_ = std::make_shared<estimator::EstimatorParams>(models_.fallback.clone());
        adaptive_ = (ready_ && pending_scene_ == scene_) ? pending_ : baseline_;
        schedule_next(result_.plans[e.plan].boundary_arclength);
        break;
      }
    }
  }

  void measure(int m, double s) {
    const auto it = models_.profiles.find(scene_);
    if (it == models_.profiles.end()) throw InputError("no channel profile for scene '" + scene_ + "'");
    const auto profile = it->second;
    const int per = config_.images_per_measurement;
    std::vector<codec::ImageSample> batch;
    for (int i = 0; i < per; ++i) batch.push_back(images_[(static_cast<std::size_t>(m) * per + i) % images_.size()]);

    const int frames = models_.codec->config().latent_frames;
    const std::int64_t base = static_cast<std::int64_t>(m) * per * frames;
    auto sampler_for = [&]() {
      auto counter = std::make_shared<std::int64_t>(base);
      const auto grid = models_.grid;
      return codec::ChannelSampler([profile, grid, counter](Rng&) { return channel::draw_channel(profile, (*counter)++, grid); });
    };
    const auto seed = derive_seed(config_.seed, {static_cast<std::uint64_t>(m)});
    const double time = s / route_.speed;
    for (const auto& [model, event] : {std::pair{adaptive_, kEventMeasureAdaptive}, std::pair{baseline_, kEventMeasureBaseline}}) {
      eval::EstimatorBundle bundle;
      bundle.method = estimator::Method::CDIFFUSION;
      bundle.pilot_positions = models_.pilot_positions;
      bundle.cdiffusion = model.get();
      bundle.num_draws = config_.num_draws;
      const auto link = eval::run_link(*models_.codec, batch, sampler_for(), bundle, config_.snr_db, seed);
      double psnr = 0.0, nmse = 0.0;
      for (double p : link.psnr_db) psnr += std::min(p, eval::kPsnrIdenticalSentinel);
      for (double n : link.nmse) nmse += n;
      log(time, event, psnr / link.psnr_db.size(), linear_to_db(nmse / link.nmse.size()));
    }
  }

  const RoutePlan& route_;
  const SceneMap& map_;
  const DriveModels& models_;
  std::span<const codec::ImageSample> images_;
  const DriveConfig& config_;
  double length_;

  std::string scene_;
  std::shared_ptr<estimator::EstimatorParams> adaptive_, baseline_, pending_;
  std::string pending_scene_;
  bool ready_ = false;
  double completion_time_ = 0.0;
  std::vector<Event> events_;
  DriveResult result_;
};

}  // namespace

DriveResult simulate_drive(const RoutePlan& route, const SceneMap& map, const DriveModels& models,
                           std::span<const codec::ImageSample> images, const DriveConfig& config) {
  route.validate();
  map.validate();
  config.validate();
  if (!models.codec) throw InputError("drive simulation needs a codec");
  if (images.empty()) throw InputError("drive simulation needs at least one image");
  return Simulation(route, map, models, images, config).run();
}

std::string timeline_csv(const std::vector<TimelineRecord>& timeline) {
  std::ostringstream out;
  out << "sim_time_s,arclength_m,scene_id,event,psnr_db,nmse_db\n";
  out << std::setprecision(10);
  for (const auto& r : timeline) {
    out << r.sim_time_s << ',' << r.arclength_m << ',' << r.scene_id << ',' << r.event << ',';
    if (r.psnr_db) out << *r.psnr_db;
    out << ',';
    if (r.nmse_db) out << *r.nmse_db;
    out << '\n';
  }
  return out.str();
}

void write_timeline_csv(const std::vector<TimelineRecord>& timeline, const std::filesystem::path& path) {
  write_text_atomic(path, timeline_csv(timeline));
}

}  // namespace ctcd::adaptation
