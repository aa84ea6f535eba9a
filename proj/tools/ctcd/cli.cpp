#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ctcd/adaptation/drive.hpp"
#include "ctcd/adaptation/refiner.hpp"
#include "ctcd/channel/csi_dataset.hpp"
#include "ctcd/codec/codec.hpp"
#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/config/app_config.hpp"
#include "ctcd/config/manifest.hpp"
#include "ctcd/eval/experiment.hpp"
#include "ctcd/eval/pipeline.hpp"
#include "ctcd/eval/plot.hpp"
#include "ctcd/eval/records.hpp"
#include "ctcd/nn/archive.hpp"

namespace ctcd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::unique_ptr<CLI::App> make_app(Options& o) {
  auto app = std::make_unique<CLI::App>("Semantic image link simulator with diffusion channel estimation", "ctcd");
  app->require_subcommand(1);
  app->footer(
      "Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.\n"
      "CTCD_OUT_DIR overrides the output root for default artifact paths.");

  auto config_opt = [&](CLI::App* s) {
    s->add_option("--config", o.config, "YAML config file; built-in defaults when omitted");
  };
  auto seed_opt = [&](CLI::App* s, const char* what) { s->add_option("--seed", o.seed, what); };

  auto* gen = app->add_subcommand("gen-data", "Generate a CSI dataset file and its split sidecar");
  config_opt(gen);
  gen->add_option("--scenes", o.scenes, "Use the first N configured scenes (default: all)");
  gen->add_option("--realizations", o.realizations, "Realizations per scene (default: config)");
  gen->add_option("--out", o.out, "Dataset file to write (default: <root>/data/csi.bin)");
  seed_opt(gen, "Derive every scene's geometry seed from this value");
  gen->add_flag("--force", o.force, "Overwrite an existing dataset file");

  auto* tc = app->add_subcommand("train-codec", "Jointly train the semantic encoder and decoder");
  config_opt(tc);
  tc->add_option("--dataset", o.dataset, "CSI dataset for fading-channel training (default: config path)");
  tc->add_option("--images", o.images, "Directory of PNG/JPEG training images (default: synthetic corpus)");
  tc->add_option("--epochs", o.epochs, "Training epochs (default: config)");
  seed_opt(tc, "Initialization and batching seed");
  tc->add_option("--out", o.out, "Checkpoint to write (default: <root>/checkpoints/codec.ckpt)");

  auto* tch = app->add_subcommand("train-channel", "Train a pilot-conditioned channel estimator on one scene");
  config_opt(tch);
  tch->add_option("--dataset", o.dataset, "CSI dataset (default: config path)");
  tch->add_option("--scene", o.scene, "Scene to train on (default: config estimator.scene)");
  tch->add_option("--method", o.method, "cdiffusion or denoiser")->check(CLI::IsMember({"cdiffusion", "denoiser"}));
  tch->add_option("--steps", o.steps, "Optimizer steps (default: config)");
  seed_opt(tch, "Training seed");
  tch->add_option("--out", o.out, "Checkpoint to write (default: config estimator checkpoint)");

  auto* pr = app->add_subcommand("pretrain-refiner", "Train the multi-scene foundation estimator");
  config_opt(pr);
  pr->add_option("--dataset", o.dataset, "CSI dataset (default: config path)");
  pr->add_option("--scenes", o.scene_list, "Scenes to pretrain on, at least 3 (default: config refiner.scenes)");
  pr->add_option("--steps", o.steps, "Optimizer steps (default: config)");
  seed_opt(pr, "Training seed");
  pr->add_option("--out", o.out, "Refiner state to write (default: <root>/checkpoints/refiner.ckpt)");

  auto* rf = app->add_subcommand("refine", "Fine-tune the foundation estimator for one scene");
  config_opt(rf);
  rf->add_option("--refiner", o.refiner, "Refiner state (default: config refiner checkpoint)");
  rf->add_option("--dataset", o.dataset, "CSI dataset holding the adaptation channels (default: config path)");
  rf->add_option("--scene", o.scene, "Scene to adapt to")->required();
  rf->add_option("--steps", o.steps, "Refinement step budget (default: config)");
  seed_opt(rf, "Refinement seed");
  rf->add_option("--out", o.out, "Checkpoint to write (default: <root>/checkpoints/refined_<scene>.ckpt)");

  auto* ev = app->add_subcommand("evaluate", "Run configured experiments and write records, summaries and plots");
  config_opt(ev);
  ev->add_option("--experiment", o.experiments, "Experiment id to run, repeatable (default: all)");
  ev->add_option("--jobs", o.jobs, "Worker threads for independent cells")->check(CLI::PositiveNumber);
  ev->add_option("--num-images", o.num_images, "Override the test image count")->check(CLI::PositiveNumber);
  ev->add_option("--num-channels", o.num_channels, "Override the test channel count")->check(CLI::PositiveNumber);
  ev->add_option("--out", o.out, "Output directory (default: <root>/eval)");

  auto* sd = app->add_subcommand("simulate-drive", "Drive a route and log the link with and without refinement");
  config_opt(sd);
  sd->add_option("--route", o.route, "Route document (YAML/JSON waypoints)")->required();
  sd->add_option("--map", o.map, "Scene map document (YAML/JSON polygons)")->required();
  sd->add_option("--dataset", o.dataset, "CSI dataset with the scene profiles and adaptation channels");
  sd->add_option("--codec", o.codec, "Codec checkpoint (default: config path)");
  sd->add_option("--refiner", o.refiner, "Refiner state (default: config path)");
  sd->add_option("--start-model", o.start_model, "Estimator active at the start (default: foundation)");
  sd->add_option("--images", o.images, "Image directory streamed during the drive (default: synthetic)");
  sd->add_option("--snr", o.snr, "Operating SNR in dB (default: config drive.snr_db)");
  sd->add_option("--out", o.out, "Output directory (default: <root>/drive)");

  auto* pl = app->add_subcommand("plot", "Render one SVG per experiment found in record files");
  pl->add_option("--records", o.records, "Record file, repeatable")->required();
  pl->add_option("--out", o.out, "Output directory (default: <root>/plots)");
  config_opt(pl);
  return app;
}

namespace {

struct Context {
  config::AppConfig cfg;
  fs::path root;
  config::RunManifest manifest;

  fs::path art(const fs::path& p) const { return p.is_absolute() ? p : root / p; }
};

Context load_context(const Options& o, const std::string& sub, const std::vector<std::string>& args) {
  Context c;
  c.cfg = o.config.empty() ? config::default_config() : config::load_config(o.config);
  const char* env = std::getenv("CTCD_OUT_DIR");
  c.root = env && *env ? fs::path(env) : c.cfg.output_dir;
  c.manifest.subcommand = sub;
  c.manifest.started_at = config::utc_timestamp();
  c.manifest.config = config::to_json(c.cfg);
  c.manifest.arguments = {{"argv", args}, {"output_root", c.root.generic_string()}};
  if (!o.config.empty()) c.manifest.inputs.push_back(o.config);
  return c;
}

void finish(Context& c, const fs::path& dir) {
  c.manifest.hash_inputs();
  c.manifest.finished_at = config::utc_timestamp();
  const auto p = config::write_manifest(c.manifest, dir);
  std::cout << "manifest: " << p.generic_string() << "\n";
}

fs::path existing(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw InputError(std::string(what) + " not found: '" + p.string() + "'");
  return p;
}

channel::CsiDataset open_dataset(Context& c, const Options& o) {
  const fs::path p = existing(o.dataset.empty() ? c.art(c.cfg.dataset.path) : fs::path(o.dataset), "CSI dataset");
  c.manifest.inputs.push_back(p);
  if (fs::exists(channel::split_sidecar_path(p))) c.manifest.inputs.push_back(channel::split_sidecar_path(p));
  return channel::import_csi(p);
}

nn::Archive open_archive(Context& c, const fs::path& p, const char* what) {
  existing(p, what);
  c.manifest.inputs.push_back(p);
  return nn::load_archive(p);
}

std::vector<codec::ImageSample> load_images(Context& c, const fs::path& dir, int h, int w) {
  existing(dir, "image directory");
  if (!fs::is_directory(dir)) throw InputError("image directory not found: '" + dir.string() + "'");
  c.manifest.inputs.push_back(dir);
  auto images = codec::load_image_directory(dir, h, w);
  if (images.empty()) throw InputError("image directory '" + dir.string() + "' holds no images");
  return images;
}

// ---------------------------------------------------------------------------

int gen_data(Context& c, const Options& o) {
  const int available = static_cast<int>(c.cfg.scenes.size());
  const int n = o.scenes.value_or(available);
  if (n < 1 || n > available)
    throw ConfigError("--scenes must lie in [1, " + std::to_string(available) + "], got " + std::to_string(n));
  const int per_scene = o.realizations.value_or(c.cfg.dataset.realizations_per_scene);
  if (per_scene < 1) throw ConfigError("--realizations must be >= 1");
  std::vector<channel::SceneProfile> profiles(c.cfg.scenes.begin(), c.cfg.scenes.begin() + n);
  if (o.seed)
    for (std::size_t i = 0; i < profiles.size(); ++i)
      profiles[i].seed_base = derive_seed(*o.seed, {i}) & ((std::uint64_t{1} << 53) - 1);

  const fs::path out = o.out.empty() ? c.art(c.cfg.dataset.path) : fs::path(o.out);
  if (fs::exists(out) && !o.force)
    throw ConfigError("output '" + out.string() + "' exists; pass --force to overwrite");
  const auto ds = channel::generate_dataset(profiles, per_scene, c.cfg.grid, c.cfg.dataset.fractions);
  channel::export_csi(ds, out);
  c.manifest.add_output(out);
  c.manifest.add_output(channel::split_sidecar_path(out));
  std::cout << "gen-data: " << ds.realizations.size() << " realizations over " << ds.profiles.size()
            << " scenes (K=" << ds.grid.num_subcarriers << ") -> " << out.generic_string() << "\n";
  finish(c, out.parent_path());
  return kExitOk;
}

int train_codec(Context& c, const Options& o) {
  auto cfg = c.cfg.codec.model;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();

  std::vector<codec::ImageSample> train, validation;
  const fs::path dir = o.images.empty() ? c.cfg.codec.images.directory : fs::path(o.images);
  if (!dir.empty()) {
    auto all = load_images(c, dir, cfg.height, cfg.width);
    const std::size_t n_val = all.size() == 1 ? 0 : std::max<std::size_t>(1, all.size() / 8);
    train.assign(all.begin(), all.end() - static_cast<long>(n_val));
    validation.assign(all.end() - static_cast<long>(n_val), all.end());
    if (validation.empty()) validation = train;
  } else {
    const auto& im = c.cfg.codec.images;
    auto all = codec::synthetic_corpus(im.seed, im.train_count + im.validation_count, cfg.height, cfg.width);
    train.assign(all.begin(), all.begin() + im.train_count);
    validation.assign(all.begin() + im.train_count, all.end());
  }

  codec::JointTrainingOptions opts;
  opts.csi = c.cfg.codec.csi;
  opts.pilot_positions = c.cfg.pilot_positions();
  if (c.cfg.codec.train_scene != eval::kAwgnScene) {
    const auto ds = open_dataset(c, o);
    auto pool = ds.select(c.cfg.codec.train_scene, channel::Split::Train);
    if (pool.empty()) throw InputError("dataset has no training channels for scene '" + c.cfg.codec.train_scene + "'");
    if (static_cast<int>(pool.front().gains.size()) != cfg.num_subcarriers)
      throw InputError("dataset K differs from the codec's num_subcarriers");
    opts.channel = eval::pool_sampler(std::move(pool));
  }
  const fs::path out = o.out.empty() ? c.art(c.cfg.codec.checkpoint) : fs::path(o.out);
  opts.checkpoint_path = out;
  const auto r = codec::train_joint(train, validation, cfg, opts);
  c.manifest.add_output(out, true);
  json log = json::array();
  for (const auto& e : r.log) log.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"validation_psnr_db", e.validation_psnr_db}});
  c.manifest.details = {{"epochs", log}, {"wall_seconds", r.wall_seconds}, {"train_images", train.size()},
                        {"validation_images", validation.size()}};
  std::printf("train-codec: %d epochs on %zu images, validation PSNR %.2f dB, %.1f s -> %s\n", cfg.epochs,
              train.size(), r.log.empty() ? 0.0 : r.log.back().validation_psnr_db, r.wall_seconds,
              out.generic_string().c_str());
  finish(c, out.parent_path());
  return kExitOk;
}

int train_channel(Context& c, const Options& o) {
  const auto ds = open_dataset(c, o);
  const std::string scene = o.scene.empty() ? c.cfg.estimator.scene : o.scene;
  const auto sub = ds.subset(std::vector<std::string>{scene});
  auto train = c.cfg.estimator.train;
  if (o.steps) train.steps = *o.steps;
  if (o.seed) train.seed = *o.seed;
  const auto pilots = c.cfg.pilot_positions();
  const bool diffusion = o.method == "cdiffusion";
  const fs::path out = !o.out.empty()     ? fs::path(o.out)
                       : diffusion        ? c.art(c.cfg.estimator.checkpoint)
                                          : c.art(c.cfg.estimator.denoiser_checkpoint);
  train.failure_checkpoint = out.string() + ".failed";

  nn::Archive a;
  estimator::TrainLog log;
  if (diffusion) {
    auto r = estimator::cdiffusion_train(sub, pilots, c.cfg.estimator.schedule(), c.cfg.estimator.denoiser, train);
    estimator::store_estimator(a, eval::kEstimatorPrefix, r.params);
    log = r.log;
  } else {
    auto r = estimator::train_regression_denoiser(sub.select(scene, channel::Split::Train), pilots,
                                                  ds.grid.num_subcarriers, c.cfg.estimator.denoiser, train);
    estimator::store_regression(a, eval::kDenoiserPrefix, r.model);
    log = r.log;
  }
  a.meta["train_log"] = estimator::to_json(log);
  a.meta["scene"] = scene;
  nn::save_archive(a, out);
  c.manifest.add_output(out, true);
  c.manifest.details = {{"wall_seconds", log.wall_seconds}, {"train_log", estimator::to_json(log)}};
  std::printf("train-channel: %s on '%s', %d steps, validation loss %.4f -> %.4f, %.1f s -> %s\n", o.method.c_str(),
              scene.c_str(), train.steps, log.initial_validation_loss, log.final_validation_loss, log.wall_seconds,
              out.generic_string().c_str());
  finish(c, out.parent_path());
  return kExitOk;
}

int pretrain(Context& c, const Options& o) {
  const auto ds = open_dataset(c, o);
  std::vector<std::string> scenes = !o.scene_list.empty() ? o.scene_list : c.cfg.refiner.scenes;
  if (scenes.empty())
    for (const auto& p : ds.profiles) scenes.push_back(p.scene_id);
  const auto sub = ds.subset(scenes);
  auto train = c.cfg.refiner.pretrain;
  if (o.steps) train.steps = *o.steps;
  if (o.seed) train.seed = *o.seed;
  const fs::path out = o.out.empty() ? c.art(c.cfg.refiner.checkpoint) : fs::path(o.out);
  train.failure_checkpoint = out.string() + ".failed";
  const auto state = adaptation::pretrain_refiner(sub, c.cfg.pilot_positions(), c.cfg.estimator.schedule(),
                                                  c.cfg.estimator.denoiser, train);
  nn::Archive a;
  adaptation::store_refiner(a, state);
  nn::save_archive(a, out);
  c.manifest.add_output(out, true);
  c.manifest.details = {{"wall_seconds", state.log.wall_seconds}, {"scenes", scenes}};
  std::printf("pretrain-refiner: %zu scenes, %d steps, validation loss %.4f -> %.4f, %.1f s -> %s\n", scenes.size(),
              train.steps, state.log.initial_validation_loss, state.log.final_validation_loss, state.log.wall_seconds,
              out.generic_string().c_str());
  finish(c, out.parent_path());
  return kExitOk;
}

std::vector<channel::ChannelRealization> adaptation_set(const channel::CsiDataset& ds, const std::string& scene,
                                                        int size) {
  auto set = ds.select(scene, channel::Split::Train);
  if (set.empty()) throw ConfigError("no adaptation channels for scene '" + scene + "'");
  if (static_cast<int>(set.size()) > size) set.resize(size);
  return set;
}

int refine_cmd(Context& c, const Options& o) {
  const fs::path rpath = o.refiner.empty() ? c.art(c.cfg.refiner.checkpoint) : fs::path(o.refiner);
  const auto state = adaptation::load_refiner(open_archive(c, rpath, "refiner state"));
  const auto ds = open_dataset(c, o);
  auto opts = c.cfg.refiner.refine;
  if (o.steps) opts.step_budget = *o.steps;
  if (o.seed) opts.seed = *o.seed;
  const auto set = adaptation_set(ds, o.scene, c.cfg.refiner.adaptation_size);
  const auto r = adaptation::refine(state, set, opts);
  const fs::path out = o.out.empty() ? c.art("checkpoints/refined_" + o.scene + ".ckpt") : fs::path(o.out);
  nn::Archive a;
  estimator::store_estimator(a, eval::kEstimatorPrefix, r.params);
  a.meta["refinement"] = {{"scene", o.scene}, {"step_budget", opts.step_budget}, {"adaptation_size", set.size()}};
  nn::save_archive(a, out);
  c.manifest.add_output(out, true);
  c.manifest.details = {{"refinement_seconds", r.refinement_seconds}};
  std::printf("refine: '%s', %d steps on %zu channels, %.1f s -> %s\n", o.scene.c_str(), opts.step_budget, set.size(),
              r.refinement_seconds, out.generic_string().c_str());
  finish(c, out.parent_path());
  return kExitOk;
}

int evaluate(Context& c, const Options& o) {
  std::vector<eval::ExperimentConfig> chosen;
  if (o.experiments.empty()) {
    chosen = c.cfg.experiments;
  } else {
    for (const auto& id : o.experiments) {
      auto it = std::find_if(c.cfg.experiments.begin(), c.cfg.experiments.end(),
                             [&](const eval::ExperimentConfig& e) { return e.id == id; });
      if (it == c.cfg.experiments.end()) throw ConfigError("no experiment '" + id + "' in the config");
      chosen.push_back(*it);
    }
  }
  if (chosen.empty()) throw ConfigError("the config defines no experiments");
  const fs::path out = o.out.empty() ? c.art("eval") : fs::path(o.out);
  std::size_t total = 0;
  for (auto e : chosen) {
    if (!e.dataset.empty()) e.dataset = c.art(e.dataset);
    if (!e.codec.empty()) e.codec = c.art(e.codec);
    for (auto& m : e.methods)
      if (!m.checkpoint.empty()) m.checkpoint = c.art(m.checkpoint);
    if (o.jobs) e.jobs = *o.jobs;
    if (o.num_images) e.num_images = *o.num_images;
    if (o.num_channels) e.num_channels = *o.num_channels;
    bool link = false, nmse = false;
    for (const auto& m : e.metrics) (m == "nmse_db" ? nmse : link) = true;
    if (!e.dataset.empty() && (nmse || e.scenes != std::vector<std::string>{eval::kAwgnScene})) {
      existing(e.dataset, "CSI dataset");
      c.manifest.inputs.push_back(e.dataset);
    }
    if (link) c.manifest.inputs.push_back(existing(e.codec, "checkpoint"));
    for (const auto& m : e.methods)
      if (!m.checkpoint.empty()) c.manifest.inputs.push_back(existing(m.checkpoint, "checkpoint"));
    if (!e.image_dir.empty() && link) c.manifest.inputs.push_back(existing(e.image_dir, "image directory"));
    const auto r = eval::run_experiment(e, out / e.id);
    for (const auto& f : r.files) c.manifest.add_output(f);
    total += r.records.size();
    std::printf("evaluate: %s -> %zu records in %s\n", e.id.c_str(), r.records.size(),
                (out / e.id).generic_string().c_str());
  }
  std::printf("evaluate: %zu records total\n", total);
  finish(c, out);
  return kExitOk;
}

int simulate(Context& c, const Options& o) {
  c.manifest.inputs.push_back(existing(o.route, "route"));
  c.manifest.inputs.push_back(existing(o.map, "scene map"));
  const auto route = config::load_route(o.route);
  const auto map = config::load_scene_map(o.map);
  const auto ds = open_dataset(c, o);

  const fs::path cpath = o.codec.empty() ? c.art(c.cfg.codec.checkpoint) : fs::path(o.codec);
  const auto codec = codec::load_codec(open_archive(c, cpath, "codec checkpoint"));
  const fs::path rpath = o.refiner.empty() ? c.art(c.cfg.refiner.checkpoint) : fs::path(o.refiner);
  const auto state = adaptation::load_refiner(open_archive(c, rpath, "refiner state"));

  adaptation::DriveModels models;
  models.codec = &codec;
  models.grid = ds.grid;
  for (const auto& p : ds.profiles) models.profiles[p.scene_id] = p;
  std::vector<std::string> map_scenes{map.default_scene_id};
  for (const auto& r : map.regions) map_scenes.push_back(r.scene_id);
  for (const auto& s : map_scenes)
    if (!models.profiles.count(s)) throw InputError("map scene '" + s + "' is not in the CSI dataset");
  models.pilot_positions = state.foundation.pilot_positions;
  models.fallback = state.foundation.clone();
  if (!o.start_model.empty()) {
    existing(o.start_model, "checkpoint");
    c.manifest.inputs.push_back(o.start_model);
    models.start_model = eval::load_estimator_checkpoint(o.start_model);
  } else {
    models.start_model = state.foundation.clone();
  }
  const auto options = c.cfg.refiner.refine;
  const int size = c.cfg.refiner.adaptation_size;
  json refinements = json::array();
  models.refine = [&](const std::string& scene) {
    const auto r = adaptation::refine(state, adaptation_set(ds, scene, size), options);
    refinements.push_back({{"scene", scene}, {"refinement_seconds", r.refinement_seconds}});
    return r.params;
  };

  std::vector<codec::ImageSample> images;
  const auto& cc = codec.config();
  if (!o.images.empty()) images = load_images(c, o.images, cc.height, cc.width);
  else images = codec::synthetic_corpus(1000, 16, cc.height, cc.width);

  auto drive = c.cfg.drive;
  if (o.snr) drive.snr_db = *o.snr;
  const auto result = adaptation::simulate_drive(route, map, models, images, drive);

  const fs::path out = o.out.empty() ? c.art("drive") : fs::path(o.out);
  adaptation::write_timeline_csv(result.timeline, out / "timeline.csv");
  json plans = json::array();
  for (const auto& p : result.plans)
    plans.push_back({{"new_scene_id", p.new_scene_id},
                     {"boundary_arclength", p.boundary_arclength},
                     {"trigger_arclength", p.trigger_arclength},
                     {"feasible", p.feasible}});
  int refinement_events = 0;
  for (const auto& r : result.timeline) refinement_events += r.event == adaptation::kEventRefinementStart;
  const json summary = {{"plans", plans},
                        {"refinement_events", refinement_events},
                        {"safety_violations", result.safety_violations},
                        {"snr_db", drive.snr_db}};
  write_text_atomic(out / "drive_summary.json", summary.dump(2) + "\n");
  c.manifest.add_output(out / "timeline.csv");
  c.manifest.add_output(out / "drive_summary.json");
  c.manifest.details = {{"refinements", refinements}};
  std::printf("simulate-drive: %zu timeline rows, %d refinement event(s), %d safety violation(s) -> %s\n",
              result.timeline.size(), refinement_events, result.safety_violations, out.generic_string().c_str());
  finish(c, out);
  return kExitOk;
}

int plot(Context& c, const Options& o) {
  std::vector<eval::MetricRecord> all;
  for (const auto& r : o.records) {
    auto recs = eval::read_records(r);
    c.manifest.inputs.push_back(r);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  const fs::path out = o.out.empty() ? c.art("plots") : fs::path(o.out);
  const auto files = eval::write_plots(all, out);
  for (const auto& f : files) {
    c.manifest.add_output(f);
    std::printf("plot: %s\n", f.generic_string().c_str());
  }
  finish(c, out);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  Options o;
  auto app = make_app(o);
  try {
    app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app->exit(e) == 0 ? kExitOk : kExitUsage;
  }
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto* sub = app->get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    Context c = load_context(o, name, args);
    if (name == "gen-data") return gen_data(c, o);
    if (name == "train-codec") return train_codec(c, o);
    if (name == "train-channel") return train_channel(c, o);
    if (name == "pretrain-refiner") return pretrain(c, o);
    if (name == "refine") return refine_cmd(c, o);
    if (name == "evaluate") return evaluate(c, o);
    if (name == "simulate-drive") return simulate(c, o);
    if (name == "plot") return plot(c, o);
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "ctcd " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "ctcd " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const IngestionError& e) {
    std::cerr << "ctcd " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "ctcd " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingError& e) {
    std::cerr << "ctcd " << name << ": training failed: " << e.what();
    if (!e.checkpoint_path().empty()) std::cerr << " (last finite parameters: " << e.checkpoint_path() << ")";
    std::cerr << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "ctcd " << name << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace ctcd::cli
