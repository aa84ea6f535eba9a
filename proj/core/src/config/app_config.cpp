#include "ctcd/config/app_config.hpp"

#include <charconv>
#include <set>

#include <yaml-cpp/yaml.h>

#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"

namespace ctcd::config {

namespace fs = std::filesystem;
using nlohmann::json;

estimator::DiffusionSchedule EstimatorSection::schedule() const {
  return estimator::DiffusionSchedule::linear(num_steps, beta_start, beta_end);
}

void AppConfig::validate() const {
  grid.validate();
  if (num_pilots < 2 || num_pilots > grid.num_subcarriers)
    throw ConfigError("num_pilots must lie in [2, num_subcarriers]");
  if (scenes.empty()) throw ConfigError("config lists no scenes");
  std::set<std::string> ids;
  for (const auto& s : scenes) {
    s.validate();
    if (s.scene_id == eval::kAwgnScene) throw ConfigError("scene id 'awgn' is reserved");
    if (!ids.insert(s.scene_id).second) throw ConfigError("duplicate scene id '" + s.scene_id + "'");
  }
  if (dataset.realizations_per_scene < 1) throw ConfigError("dataset.realizations_per_scene must be >= 1");
  codec.model.validate();
  if (codec.model.num_subcarriers != grid.num_subcarriers)
    throw ConfigError("codec.num_subcarriers must equal grid.num_subcarriers");
  if (codec.train_scene != eval::kAwgnScene && !ids.count(codec.train_scene))
    throw ConfigError("codec.train_scene '" + codec.train_scene + "' is not a configured scene");
  if (codec.images.train_count < 1 || codec.images.validation_count < 1)
    throw ConfigError("codec image counts must be >= 1");
  estimator.denoiser.validate();
  estimator.train.validate();
  (void)estimator.schedule();
  if (!ids.count(estimator.scene)) throw ConfigError("estimator.scene '" + estimator.scene + "' is not a configured scene");
  for (const auto& s : refiner.scenes)
    if (!ids.count(s)) throw ConfigError("refiner scene '" + s + "' is not a configured scene");
  refiner.pretrain.validate();
  refiner.refine.validate();
  if (refiner.adaptation_size < 1) throw ConfigError("refiner.adaptation_size must be >= 1");
  drive.validate();
  std::set<std::string> exp_ids;
  for (const auto& e : experiments) {
    if (!exp_ids.insert(e.id).second) throw ConfigError("duplicate experiment id '" + e.id + "'");
    for (const auto& s : e.scenes)
      if (s != eval::kAwgnScene && !ids.count(s))
        throw ConfigError("experiment '" + e.id + "' uses unknown scene '" + s + "'");
  }
}

const channel::SceneProfile& AppConfig::scene(const std::string& id) const {
  for (const auto& s : scenes)
    if (s.scene_id == id) return s;
  throw ConfigError("unknown scene '" + id + "'");
}

std::vector<int> AppConfig::pilot_positions() const {
  return channel::equally_spaced_pilots(grid.num_subcarriers, num_pilots);
}

AppConfig default_config() {
  AppConfig c;
  auto scene = [](std::string id, int paths, double max_delay, double decay, double k, std::uint64_t seed) {
    channel::SceneProfile p;
    p.scene_id = std::move(id);
    p.num_paths = paths;
    p.max_delay = max_delay;
    p.power_decay = decay;
    p.rician_k = k;
    p.seed_base = seed;
    return p;
  };
  c.scenes = {scene("urban_canyon", 8, 1e-6, 1e6, 0.5, 101), scene("suburban", 6, 2e-6, 5e5, 1.0, 202),
              scene("garage", 10, 0.3e-6, 3e6, 0.2, 303), scene("highway", 4, 1.5e-6, 1e6, 2.0, 404),
              scene("bridge", 3, 3e-6, 3e5, 4.0, 505)};
  c.codec.model.channels_per_stage = {16, 32};
  c.refiner.scenes = {"urban_canyon", "suburban", "garage", "highway"};

  using estimator::Method;
  auto method = [](Method m, std::string checkpoint = {}, std::string label = {}) {
    return eval::MethodSpec{std::move(label), m, std::move(checkpoint)};
  };
  auto experiment = [&](std::string id, std::vector<eval::MethodSpec> methods, std::vector<std::string> scenes,
                        std::vector<std::string> metrics) {
    eval::ExperimentConfig e;
    e.id = std::move(id);
    e.methods = std::move(methods);
    e.scenes = std::move(scenes);
    e.metrics = std::move(metrics);
    e.dataset = c.dataset.path;
    e.codec = c.codec.checkpoint;
    return e;
  };
  c.experiments = {
      experiment("codec_awgn", {method(Method::PERFECT), method(Method::LS)}, {eval::kAwgnScene}, {"psnr_db", "ssim"}),
      experiment("codec_fading", {method(Method::PERFECT), method(Method::LS)}, {"urban_canyon"}, {"psnr_db", "ssim"}),
      experiment("estimator_nmse",
                 {method(Method::LS), method(Method::LMMSE), method(Method::DENOISER, "checkpoints/denoiser.ckpt"),
                  method(Method::CDIFFUSION, "checkpoints/estimator.ckpt")},
                 {"urban_canyon"}, {"nmse_db"}),
      experiment("compensation",
                 {method(Method::PERFECT), method(Method::LS), method(Method::LMMSE),
                  method(Method::CDIFFUSION, "checkpoints/estimator.ckpt")},
                 {"urban_canyon"}, {"psnr_db", "ssim"}),
      experiment("scene_refinement",
                 {method(Method::CDIFFUSION, "checkpoints/refiner.ckpt", "unrefined"),
                  method(Method::CDIFFUSION, "checkpoints/refined_bridge.ckpt", "refined")},
                 {"bridge"}, {"psnr_db", "ssim", "nmse_db"}),
  };
  return c;
}

// ---------------------------------------------------------------------------
// Generic structured text

namespace {

json scalar_to_json(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  {
    std::int64_t v = 0;
    const char* b = s.data() + (s[0] == '+' ? 1 : 0);
    const auto r = std::from_chars(b, s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size()) {
      if (v >= 0) return static_cast<std::uint64_t>(v);
      return v;
    }
    std::uint64_t u = 0;
    const auto ru = std::from_chars(b, s.data() + s.size(), u);
    if (ru.ec == std::errc() && ru.ptr == s.data() + s.size()) return u;
  }
  {
    double v = 0.0;
    const char* b = s.data() + (s[0] == '+' ? 1 : 0);
    const auto r = std::from_chars(b, s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return v;
  }
  if (s == ".inf" || s == ".Inf" || s == "+.inf") return std::numeric_limits<double>::infinity();
  return s;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(n);
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(yaml_to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (o.contains(key)) throw ConfigError("duplicate key '" + key + "'");
        o[key] = yaml_to_json(kv.second);
      }
      return o;
    }
  }
  return nullptr;
}

}  // namespace

json parse_structured(const std::string& text) {
  try {
    return yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed structured text: ") + e.what());
  }
}

json load_structured(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("file not found: '" + path.string() + "'");
  try {
    return parse_structured(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Typed reading with key checking

namespace {

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object() && !j_.is_null()) throw ConfigError(where() + "expected a mapping");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    if (!j_.is_object()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + key_path(k) + "'");
  }

  std::string key_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json* find(const std::string& k) {
    seen_.insert(k);
    if (!j_.is_object()) return nullptr;
    const auto it = j_.find(k);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& k, T& out) {
    if (const json* v = find(k)) out = convert<T>(*v, key_path(k));
  }

  template <class F>
  void sub(const std::string& k, F&& f) {
    static const json empty = nullptr;
    const json* v = find(k);
    Section s(v ? *v : empty, key_path(k));
    f(s);
  }

  template <class T, class F>
  void list(const std::string& k, std::vector<T>& out, F&& parse_one) {
    const json* v = find(k);
    if (!v) return;
    if (!v->is_array()) throw ConfigError("config key '" + key_path(k) + "': expected a list");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) out.push_back(parse_one((*v)[i], key_path(k) + "[" + std::to_string(i) + "]"));
  }

  template <class T>
  static T convert(const json& v, const std::string& path) {
    auto fail = [&](const char* what) { return ConfigError("config key '" + path + "': expected " + what); };
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw fail("a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw fail("a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, fs::path>) {
      if (!v.is_string()) throw fail("a path string");
      return fs::path(v.get<std::string>());
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw fail("a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw fail("an integer");
      const auto x = v.get<std::int64_t>();
      if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) throw fail("an integer in range");
      return static_cast<T>(x);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw fail("a number");
      return v.get<double>();
    } else {
      if (!v.is_array()) throw fail("a list");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : "config key '" + path_ + "': "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read(Section& s, channel::OfdmGrid& g) {
  s.get("num_subcarriers", g.num_subcarriers);
  s.get("carrier_spacing", g.carrier_spacing);
}

void read(Section& s, channel::SceneProfile& p) {
  s.get("scene_id", p.scene_id);
  s.get("num_paths", p.num_paths);
  s.get("max_delay", p.max_delay);
  s.get("power_decay", p.power_decay);
  s.get("rician_k", p.rician_k);
  s.get("doppler_scale", p.doppler_scale);
  s.get("seed_base", p.seed_base);
}

void read(Section& s, codec::CodecConfig& c) {
  s.get("height", c.height);
  s.get("width", c.width);
  s.get("image_channels", c.image_channels);
  s.get("num_subcarriers", c.num_subcarriers);
  s.get("num_stages", c.num_stages);
  s.get("channels_per_stage", c.channels_per_stage);
  s.get("dilation_rates", c.dilation_rates);
  s.get("attention_heads", c.attention_heads);
  s.get("latent_frames", c.latent_frames);
  s.get("learning_rate", c.learning_rate);
  s.get("batch_size", c.batch_size);
  s.get("epochs", c.epochs);
  s.get("snr_train_min_db", c.snr_train_min_db);
  s.get("snr_train_max_db", c.snr_train_max_db);
  s.get("validation_snr_db", c.validation_snr_db);
  s.get("seed", c.seed);
}

void read(Section& s, estimator::TrainConfig& t) {
  s.get("steps", t.steps);
  s.get("batch", t.batch);
  s.get("learning_rate", t.learning_rate);
  s.get("snr_min_db", t.snr_min_db);
  s.get("snr_max_db", t.snr_max_db);
  s.get("seed", t.seed);
  s.get("log_every", t.log_every);
  s.get("validation_rows", t.validation_rows);
}

void read(Section& s, estimator::DenoiserConfig& d) {
  s.get("width", d.width);
  s.get("blocks", d.blocks);
  s.get("time_frequencies", d.time_frequencies);
  s.get("prior_floor", d.prior_floor);
}

void read(Section& s, adaptation::RefineOptions& r) {
  s.get("step_budget", r.step_budget);
  s.get("learning_rate", r.learning_rate);
  s.get("batch", r.batch);
  s.get("snr_min_db", r.snr_min_db);
  s.get("snr_max_db", r.snr_max_db);
  s.get("seed", r.seed);
}

void read(Section& s, adaptation::TimeBudget& b) {
  s.get("transmission_time", b.transmission_time);
  s.get("inference_time", b.inference_time);
  s.get("refinement_time", b.refinement_time);
}

void read(Section& s, adaptation::DriveConfig& d) {
  s.get("snr_db", d.snr_db);
  s.get("measurement_spacing", d.measurement_spacing);
  s.get("images_per_measurement", d.images_per_measurement);
  s.get("num_draws", d.num_draws);
  s.get("seed", d.seed);
  s.sub("budget", [&](Section& b) { read(b, d.budget); });
}

void read(Section& s, eval::ExperimentConfig& e) {
  s.get("id", e.id);
  s.get("snr_grid_db", e.snr_grid_db);
  s.list("methods", e.methods, [](const json& j, const std::string& path) {
    eval::MethodSpec m;
    Section ms(j, path);
    std::string name;
    ms.get("method", name);
    if (name.empty()) throw ConfigError("config key '" + path + ".method' is required");
    m.method = estimator::method_from_string(name);
    ms.get("label", m.label);
    ms.get("checkpoint", m.checkpoint);
    return m;
  });
  s.get("scenes", e.scenes);
  s.get("metrics", e.metrics);
  s.get("dataset", e.dataset);
  s.get("codec", e.codec);
  s.get("image_dir", e.image_dir);
  s.get("image_seed", e.image_seed);
  s.get("num_images", e.num_images);
  s.get("num_pilots", e.num_pilots);
  s.get("num_channels", e.num_channels);
  s.get("num_draws", e.num_draws);
  s.get("seed", e.seed);
  s.get("jobs", e.jobs);
}

// ---------------------------------------------------------------------------

json j_of(const channel::SceneProfile& p) {
  return {{"scene_id", p.scene_id},       {"num_paths", p.num_paths}, {"max_delay", p.max_delay},
          {"power_decay", p.power_decay}, {"rician_k", p.rician_k},   {"doppler_scale", p.doppler_scale},
          {"seed_base", p.seed_base}};
}

json j_of(const codec::CodecConfig& c) {
  return {{"height", c.height},
          {"width", c.width},
          {"image_channels", c.image_channels},
          {"num_subcarriers", c.num_subcarriers},
          {"num_stages", c.num_stages},
          {"channels_per_stage", c.channels_per_stage},
          {"dilation_rates", c.dilation_rates},
          {"attention_heads", c.attention_heads},
          {"latent_frames", c.latent_frames},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"snr_train_min_db", c.snr_train_min_db},
          {"snr_train_max_db", c.snr_train_max_db},
          {"validation_snr_db", c.validation_snr_db},
          {"seed", c.seed}};
}

json j_of(const estimator::TrainConfig& t) {
  return {{"steps", t.steps},
          {"batch", t.batch},
          {"learning_rate", t.learning_rate},
          {"snr_min_db", t.snr_min_db},
          {"snr_max_db", t.snr_max_db},
          {"seed", t.seed},
          {"log_every", t.log_every},
          {"validation_rows", t.validation_rows}};
}

json j_of(const eval::ExperimentConfig& e) {
  json methods = json::array();
  for (const auto& m : e.methods) {
    json jm = {{"method", estimator::to_string(m.method)}};
    if (!m.label.empty()) jm["label"] = m.label;
    if (!m.checkpoint.empty()) jm["checkpoint"] = m.checkpoint.generic_string();
    methods.push_back(jm);
  }
  return {{"id", e.id},
          {"snr_grid_db", e.snr_grid_db},
          {"methods", methods},
          {"scenes", e.scenes},
          {"metrics", e.metrics},
          {"dataset", e.dataset.generic_string()},
          {"codec", e.codec.generic_string()},
          {"image_dir", e.image_dir.generic_string()},
          {"image_seed", e.image_seed},
          {"num_images", e.num_images},
          {"num_pilots", e.num_pilots},
          {"num_channels", e.num_channels},
          {"num_draws", e.num_draws},
          {"seed", e.seed},
          {"jobs", e.jobs}};
}

}  // namespace

AppConfig config_from_json(const json& j) {
  AppConfig c = default_config();
  {
    Section s(j, "");
    s.get("output_dir", c.output_dir);
    s.sub("grid", [&](Section& g) { read(g, c.grid); });
    s.get("num_pilots", c.num_pilots);
    s.list("scenes", c.scenes, [](const json& v, const std::string& path) {
      channel::SceneProfile p;
      Section ps(v, path);
      read(ps, p);
      return p;
    });
    s.sub("dataset", [&](Section& d) {
      d.get("path", c.dataset.path);
      d.get("realizations_per_scene", c.dataset.realizations_per_scene);
      d.get("train_fraction", c.dataset.fractions.train);
      d.get("validation_fraction", c.dataset.fractions.validation);
    });
    s.sub("codec", [&](Section& cs) {
      cs.sub("model", [&](Section& m) { read(m, c.codec.model); });
      std::string csi;
      cs.get("training_csi", csi);
      if (csi == "perfect") c.codec.csi = codec::TrainingCsi::Perfect;
      else if (csi == "ls") c.codec.csi = codec::TrainingCsi::LS;
      else if (!csi.empty()) throw ConfigError("config key 'codec.training_csi': expected 'perfect' or 'ls'");
      cs.get("train_scene", c.codec.train_scene);
      cs.get("checkpoint", c.codec.checkpoint);
      cs.sub("images", [&](Section& im) {
        im.get("directory", c.codec.images.directory);
        im.get("seed", c.codec.images.seed);
        im.get("train_count", c.codec.images.train_count);
        im.get("validation_count", c.codec.images.validation_count);
      });
    });
    s.sub("estimator", [&](Section& es) {
      es.sub("schedule", [&](Section& sc) {
        sc.get("num_steps", c.estimator.num_steps);
        sc.get("beta_start", c.estimator.beta_start);
        sc.get("beta_end", c.estimator.beta_end);
      });
      es.sub("denoiser", [&](Section& d) { read(d, c.estimator.denoiser); });
      es.sub("train", [&](Section& t) { read(t, c.estimator.train); });
      es.get("scene", c.estimator.scene);
      es.get("checkpoint", c.estimator.checkpoint);
      es.get("denoiser_checkpoint", c.estimator.denoiser_checkpoint);
    });
    s.sub("refiner", [&](Section& r) {
      r.get("scenes", c.refiner.scenes);
      r.sub("pretrain", [&](Section& t) { read(t, c.refiner.pretrain); });
      r.sub("refine", [&](Section& t) { read(t, c.refiner.refine); });
      r.get("adaptation_size", c.refiner.adaptation_size);
      r.get("checkpoint", c.refiner.checkpoint);
    });
    s.sub("drive", [&](Section& d) { read(d, c.drive); });
    s.list("experiments", c.experiments, [&](const json& v, const std::string& path) {
      eval::ExperimentConfig e;
      e.dataset = c.dataset.path;
      e.codec = c.codec.checkpoint;
      Section es(v, path);
      read(es, e);
      return e;
    });
  }
  c.validate();
  return c;
}

json to_json(const AppConfig& c) {
  json scenes = json::array();
  for (const auto& s : c.scenes) scenes.push_back(j_of(s));
  json experiments = json::array();
  for (const auto& e : c.experiments) experiments.push_back(j_of(e));
  const auto& d = c.drive;
  return {
      {"output_dir", c.output_dir.generic_string()},
      {"grid", {{"num_subcarriers", c.grid.num_subcarriers}, {"carrier_spacing", c.grid.carrier_spacing}}},
      {"num_pilots", c.num_pilots},
      {"scenes", scenes},
      {"dataset",
       {{"path", c.dataset.path.generic_string()},
        {"realizations_per_scene", c.dataset.realizations_per_scene},
        {"train_fraction", c.dataset.fractions.train},
        {"validation_fraction", c.dataset.fractions.validation}}},
      {"codec",
       {{"model", j_of(c.codec.model)},
        {"training_csi", c.codec.csi == codec::TrainingCsi::Perfect ? "perfect" : "ls"},
        {"train_scene", c.codec.train_scene},
        {"checkpoint", c.codec.checkpoint.generic_string()},
        {"images",
         {{"directory", c.codec.images.directory.generic_string()},
          {"seed", c.codec.images.seed},
          {"train_count", c.codec.images.train_count},
          {"validation_count", c.codec.images.validation_count}}}}},
      {"estimator",
       {{"schedule",
         {{"num_steps", c.estimator.num_steps},
          {"beta_start", c.estimator.beta_start},
          {"beta_end", c.estimator.beta_end}}},
        {"denoiser",
         {{"width", c.estimator.denoiser.width},
          {"blocks", c.estimator.denoiser.blocks},
          {"time_frequencies", c.estimator.denoiser.time_frequencies},
          {"prior_floor", c.estimator.denoiser.prior_floor}}},
        {"train", j_of(c.estimator.train)},
        {"scene", c.estimator.scene},
        {"checkpoint", c.estimator.checkpoint.generic_string()},
        {"denoiser_checkpoint", c.estimator.denoiser_checkpoint.generic_string()}}},
      {"refiner",
       {{"scenes", c.refiner.scenes},
        {"pretrain", j_of(c.refiner.pretrain)},
        {"refine",
         {{"step_budget", c.refiner.refine.step_budget},
          {"learning_rate", c.refiner.refine.learning_rate},
          {"batch", c.refiner.refine.batch},
          {"snr_min_db", c.refiner.refine.snr_min_db},
          {"snr_max_db", c.refiner.refine.snr_max_db},
          {"seed", c.refiner.refine.seed}}},
        {"adaptation_size", c.refiner.adaptation_size},
        {"checkpoint", c.refiner.checkpoint.generic_string()}}},
      {"drive",
       {{"snr_db", d.snr_db},
        {"measurement_spacing", d.measurement_spacing},
        {"images_per_measurement", d.images_per_measurement},
        {"num_draws", d.num_draws},
        {"seed", d.seed},
        {"budget",
         {{"transmission_time", d.budget.transmission_time},
          {"inference_time", d.budget.inference_time},
          {"refinement_time", d.budget.refinement_time}}}}},
      {"experiments", experiments},
  };
}

AppConfig load_config(const fs::path& path) { return config_from_json(load_structured(path)); }

// ---------------------------------------------------------------------------
// Route and map documents

namespace {

adaptation::Point point_of(const json& v, const std::string& path) {
  const auto xy = Section::convert<std::vector<double>>(v, path);
  if (xy.size() != 2) throw ConfigError("config key '" + path + "': expected [x, y]");
  return {xy[0], xy[1]};
}

json j_of(const adaptation::Point& p) { return json::array({p.x, p.y}); }

}  // namespace

adaptation::RoutePlan route_from_json(const json& j) {
  adaptation::RoutePlan r;
  {
    Section s(j, "");
    s.get("speed", r.speed);
    s.get("sample_spacing", r.sample_spacing);
    s.list("waypoints", r.waypoints, point_of);
  }
  r.validate();
  return r;
}

adaptation::SceneMap scene_map_from_json(const json& j) {
  adaptation::SceneMap m;
  {
    Section s(j, "");
    s.get("default_scene", m.default_scene_id);
    s.list("regions", m.regions, [](const json& v, const std::string& path) {
      adaptation::SceneRegion region;
      Section rs(v, path);
      rs.get("scene_id", region.scene_id);
      rs.list("polygon", region.polygon, point_of);
      return region;
    });
  }
  m.validate();
  return m;
}

json to_json(const adaptation::RoutePlan& route) {
  json w = json::array();
  for (const auto& p : route.waypoints) w.push_back(j_of(p));
  return {{"speed", route.speed}, {"sample_spacing", route.sample_spacing}, {"waypoints", w}};
}

json to_json(const adaptation::SceneMap& map) {
  json regions = json::array();
  for (const auto& r : map.regions) {
    json poly = json::array();
    for (const auto& p : r.polygon) poly.push_back(j_of(p));
    regions.push_back({{"scene_id", r.scene_id}, {"polygon", poly}});
  }
  return {{"default_scene", map.default_scene_id}, {"regions", regions}};
}

adaptation::RoutePlan load_route(const fs::path& path) { return route_from_json(load_structured(path)); }
adaptation::SceneMap load_scene_map(const fs::path& path) { return scene_map_from_json(load_structured(path)); }

}  // namespace ctcd::config
