#include "ctcd/eval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <set>
#include <thread>

#include "ctcd/adaptation/refiner.hpp"
#include "ctcd/channel/csi_dataset.hpp"
#include "ctcd/codec/codec.hpp"
#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/eval/metrics.hpp"
#include "ctcd/eval/pipeline.hpp"
#include "ctcd/eval/plot.hpp"
#include "ctcd/nn/archive.hpp"

namespace ctcd::eval {

namespace fs = std::filesystem;
using estimator::Method;

std::string MethodSpec::name() const { return label.empty() ? std::string(estimator::to_string(method)) : label; }

void ExperimentConfig::validate() const {
  if (id.empty() || id.find_first_of(",/\\") != std::string::npos)
    throw ConfigError("experiment id must be nonempty without ',' or path separators");
  if (snr_grid_db.empty()) throw ConfigError("experiment '" + id + "': SNR grid is empty");
  for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
    if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
      throw ConfigError("experiment '" + id + "': SNR grid must be strictly increasing");
  if (methods.empty()) throw ConfigError("experiment '" + id + "': no methods");
  if (scenes.empty()) throw ConfigError("experiment '" + id + "': no scenes");
  if (metrics.empty()) throw ConfigError("experiment '" + id + "': no metrics");
  std::set<std::string> labels;
  for (const auto& m : methods) {
    if (!labels.insert(m.name()).second) throw ConfigError("experiment '" + id + "': duplicate method '" + m.name() + "'");
    if ((m.method == Method::CDIFFUSION || m.method == Method::DENOISER) && m.checkpoint.empty())
      throw ConfigError("experiment '" + id + "': method '" + m.name() + "' needs a checkpoint");
  }
  bool link = false;
  for (const auto& m : metrics) {
    if (m != "psnr_db" && m != "ssim" && m != "nmse_db") throw ConfigError("unknown metric '" + m + "'");
    link |= m != "nmse_db";
  }
  if (link && codec.empty()) throw ConfigError("experiment '" + id + "': psnr_db/ssim need a codec checkpoint");
  for (const auto& s : scenes)
    if (s != kAwgnScene && dataset.empty())
      throw ConfigError("experiment '" + id + "': scene '" + s + "' needs a CSI dataset");
  if (num_pilots < 1 || num_images < 1 || num_channels < 1 || num_draws < 1 || jobs < 1)
    throw ConfigError("experiment '" + id + "': num_pilots, num_images, num_channels, num_draws and jobs must be >= 1");
}

namespace {

nn::Archive open_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("checkpoint not found: '" + path.string() + "'");
  return nn::load_archive(path);
}

}  // namespace

estimator::EstimatorParams load_estimator_checkpoint(const fs::path& path) {
  const auto a = open_checkpoint(path);
  if (a.meta.contains("refiner")) return adaptation::load_refiner(a).foundation;
  if (!a.meta.contains(kEstimatorPrefix)) throw InputError("'" + path.string() + "' holds no diffusion estimator");
  return estimator::load_estimator(a, kEstimatorPrefix);
}

estimator::RegressionDenoiser load_denoiser_checkpoint(const fs::path& path) {
  const auto a = open_checkpoint(path);
  if (!a.meta.contains(kDenoiserPrefix)) throw InputError("'" + path.string() + "' holds no regression denoiser");
  return estimator::load_regression(a, kDenoiserPrefix);
}

namespace {

struct SceneInputs {
  std::vector<channel::ChannelRealization> test;  // nmse channels
  codec::ChannelSampler link;
  std::unique_ptr<estimator::ChannelStatistics> stats;
};

struct Inputs {
  int num_subcarriers = 64;
  std::vector<int> pilots;
  std::unique_ptr<codec::SemanticCodec> codec;
  std::vector<codec::ImageSample> images;
  std::map<std::string, SceneInputs> scenes;
  std::map<std::string, std::unique_ptr<estimator::EstimatorParams>> cdiffusion;
  std::map<std::string, std::unique_ptr<estimator::RegressionDenoiser>> regression;
};

std::vector<channel::ChannelRealization> unit_channels(int K, int n) {
  std::vector<channel::ChannelRealization> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].gains.assign(K, cplx(1.0, 0.0));
    out[i].scene_id = kAwgnScene;
    out[i].snapshot_index = i;
  }
  return out;
}

Inputs load_inputs(const ExperimentConfig& c) {
  Inputs in;
  bool link = false, nmse_metric = false;
  for (const auto& m : c.metrics) (m == "nmse_db" ? nmse_metric : link) = true;

  std::unique_ptr<channel::CsiDataset> dataset;
  if (!c.dataset.empty()) {
    if (!fs::exists(c.dataset)) throw InputError("CSI dataset not found: '" + c.dataset.string() + "'");
    dataset = std::make_unique<channel::CsiDataset>(channel::import_csi(c.dataset));
    in.num_subcarriers = dataset->grid.num_subcarriers;
  }
  if (link) {
    in.codec = std::make_unique<codec::SemanticCodec>(codec::load_codec(open_checkpoint(c.codec)));
    const auto& cc = in.codec->config();
    if (dataset && cc.num_subcarriers != in.num_subcarriers)
      throw InputError("codec K differs from the dataset's subcarrier count");
    in.num_subcarriers = cc.num_subcarriers;
    if (!c.image_dir.empty()) {
      if (!fs::is_directory(c.image_dir)) throw InputError("image directory not found: '" + c.image_dir.string() + "'");
      in.images = codec::load_image_directory(c.image_dir, cc.height, cc.width);
      if (static_cast<int>(in.images.size()) < c.num_images)
        throw InputError("image directory '" + c.image_dir.string() + "' holds " + std::to_string(in.images.size()) +
                         " images, experiment needs " + std::to_string(c.num_images));
      in.images.resize(c.num_images);
    } else {
      in.images = codec::synthetic_corpus(c.image_seed, c.num_images, cc.height, cc.width);
    }
  }
  in.pilots = channel::equally_spaced_pilots(in.num_subcarriers, c.num_pilots);

  for (const auto& m : c.methods) {
    if (m.method == Method::CDIFFUSION) {
      auto p = std::make_unique<estimator::EstimatorParams>(load_estimator_checkpoint(m.checkpoint));
      if (p->num_subcarriers != in.num_subcarriers || p->pilot_positions != in.pilots)
        throw InputError("estimator '" + m.checkpoint.string() + "' was trained for a different pilot layout");
      in.cdiffusion[m.name()] = std::move(p);
    } else if (m.method == Method::DENOISER) {
      auto p = std::make_unique<estimator::RegressionDenoiser>(load_denoiser_checkpoint(m.checkpoint));
      if (p->pilot_positions != in.pilots)
        throw InputError("denoiser '" + m.checkpoint.string() + "' was trained for a different pilot layout");
      in.regression[m.name()] = std::move(p);
    }
  }
  const bool need_stats =
      std::any_of(c.methods.begin(), c.methods.end(), [](const MethodSpec& m) { return m.method == Method::LMMSE; });

  for (const auto& s : c.scenes) {
    SceneInputs si;
    if (s == kAwgnScene) {
      si.test = unit_channels(in.num_subcarriers, c.num_channels);
      si.link = codec::awgn_channel(in.num_subcarriers);
      if (need_stats)
        si.stats = std::make_unique<estimator::ChannelStatistics>(
            estimator::ChannelStatistics::estimate(unit_channels(in.num_subcarriers, 100)));
    } else {
      if (dataset->count_for_scene(s) == 0)
        throw InputError("scene '" + s + "' is not in dataset '" + c.dataset.string() + "'");
      auto test = dataset->select(s, channel::Split::Test);
      if (nmse_metric && static_cast<int>(test.size()) < c.num_channels)
        throw InputError("scene '" + s + "' has " + std::to_string(test.size()) + " test channels, experiment needs " +
                         std::to_string(c.num_channels));
      if (test.empty()) throw InputError("scene '" + s + "' has no test channels");
      si.link = pool_sampler(test);
      if (static_cast<int>(test.size()) > c.num_channels) test.resize(c.num_channels);
      si.test = std::move(test);
      if (need_stats)
        si.stats = std::make_unique<estimator::ChannelStatistics>(
            estimator::ChannelStatistics::estimate(dataset->select(s, channel::Split::Train)));
    }
    in.scenes.emplace(s, std::move(si));
  }
  return in;
}

struct Cell {
  std::size_t method = 0, scene = 0, snr = 0;
};

struct CellResult {
  std::vector<MetricRecord> records;
  std::vector<codec::ImageSample> samples;  // first reconstructions, for the strips
};

MetricRecord make_record(const ExperimentConfig& c, const std::string& method, const std::string& scene, double snr,
                         const std::string& metric, const MeanStat& s, std::uint64_t seed) {
  MetricRecord r;
  r.experiment_id = c.id;
  r.method = method;
  r.scene_id = scene;
  r.snr_db = snr;
  r.metric = metric;
  r.value = s.mean;
  r.std_error = s.std_error;
  r.n = s.n;
  r.seed = seed;
  return r;
}

CellResult evaluate_cell(const ExperimentConfig& c, const Inputs& in, const Cell& cell) {
  const auto& spec = c.methods[cell.method];
  const auto& scene = c.scenes[cell.scene];
  const auto& si = in.scenes.at(scene);
  const double snr = c.snr_grid_db[cell.snr];
  const std::uint64_t seed = derive_seed(c.seed, {cell.scene, cell.snr});

  EstimatorBundle bundle;
  bundle.method = spec.method;
  bundle.pilot_positions = in.pilots;
  bundle.num_draws = c.num_draws;
  bundle.statistics = si.stats.get();
  if (auto it = in.cdiffusion.find(spec.name()); it != in.cdiffusion.end()) bundle.cdiffusion = it->second.get();
  if (auto it = in.regression.find(spec.name()); it != in.regression.end()) bundle.regression = it->second.get();

  CellResult out;
  std::unique_ptr<LinkResult> link;
  for (const auto& metric : c.metrics) {
    if (metric == "nmse_db") {
      const auto trials = nmse_trials(bundle, si.test, snr, derive_seed(seed, {1}));
      const auto s = mean_and_stderr(trials);
      MeanStat db{linear_to_db(s.mean), s.mean > 0 ? 10.0 / std::log(10.0) * s.std_error / s.mean : 0.0, s.n};
      out.records.push_back(make_record(c, spec.name(), scene, snr, metric, db, seed));
      continue;
    }
    if (!link) {
      link = std::make_unique<LinkResult>(run_link(*in.codec, in.images, si.link, bundle, snr, derive_seed(seed, {2})));
      const std::size_t keep = std::min<std::size_t>(4, link->reconstructed.size());
      out.samples.assign(link->reconstructed.begin(), link->reconstructed.begin() + keep);
    }
    std::vector<double> v = metric == "ssim" ? link->ssim : link->psnr_db;
    for (double& x : v) x = std::min(x, kPsnrIdenticalSentinel);
    out.records.push_back(make_record(c, spec.name(), scene, snr, metric, mean_and_stderr(v), seed));
  }
  return out;
}

codec::ImageSample tile_rows(const std::vector<std::vector<codec::ImageSample>>& rows) {
  std::vector<codec::ImageSample> strips;
  for (const auto& r : rows) strips.push_back(codec::tile_horizontal(r));
  int width = 0, height = 0;
  for (const auto& s : strips) {
    width = std::max(width, s.width);
    height += s.height + 1;
  }
  codec::ImageSample out(height - 1, width, strips.front().channels, 1.0);
  int y0 = 0;
  for (const auto& s : strips) {
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x)
        for (int ch = 0; ch < s.channels; ++ch) out.at(y0 + y, x, ch) = s.at(y, x, ch);
    y0 += s.height + 1;
  }
  return out;
}

std::string snr_tag(double snr) {
  std::string s = format_number(snr);
  std::replace(s.begin(), s.end(), '-', 'm');
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

}  // namespace

ExperimentOutputs run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  const Inputs in = load_inputs(config);

  std::vector<Cell> cells;
  for (std::size_t m = 0; m < config.methods.size(); ++m)
    for (std::size_t s = 0; s < config.scenes.size(); ++s)
      for (std::size_t k = 0; k < config.snr_grid_db.size(); ++k) cells.push_back({m, s, k});

  const fs::path cell_dir = out_dir / ("cells_" + config.id);
  std::vector<CellResult> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next++) < cells.size();) {
      try {
        results[i] = evaluate_cell(config, in, cells[i]);
        write_text_atomic(cell_dir / ("cell_" + std::to_string(i) + ".csv"), format_records(results[i].records));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(config.jobs, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentOutputs out;
  std::string merged = std::string(kRecordHeader) + "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto text = read_text_file(cell_dir / ("cell_" + std::to_string(i) + ".csv"));
    merged += text.substr(text.find('\n') + 1);
    out.records.insert(out.records.end(), results[i].records.begin(), results[i].records.end());
  }
  fs::remove_all(cell_dir);

  auto emit = [&](const fs::path& p, const std::string& text) {
    write_text_atomic(p, text);
    out.files.push_back(p);
  };
  emit(out_dir / "records.csv", merged);
  if (std::find(config.metrics.begin(), config.metrics.end(), "nmse_db") != config.metrics.end())
    emit(out_dir / "nmse.csv", format_nmse_table(out.records));
  emit(out_dir / ("summary_" + config.id + ".csv"), format_summary(out.records));
  emit(out_dir / (config.id + ".svg"), render_svg(out.records, config.id));

  if (in.codec) {
    const std::size_t keep = std::min<std::size_t>(4, in.images.size());
    for (std::size_t s = 0; s < config.scenes.size(); ++s)
      for (std::size_t k = 0; k < config.snr_grid_db.size(); ++k) {
        std::vector<std::vector<codec::ImageSample>> rows{{in.images.begin(), in.images.begin() + keep}};
        for (std::size_t i = 0; i < cells.size(); ++i)
          if (cells[i].scene == s && cells[i].snr == k) rows.push_back(results[i].samples);
        const auto p = out_dir / (config.id + "_reconstructions_" + config.scenes[s] + "_snr" +
                                  snr_tag(config.snr_grid_db[k]) + ".png");
        fs::create_directories(out_dir);
        codec::save_png(tile_rows(rows), p);
        out.files.push_back(p);
      }
  }
  return out;
}

}  // namespace ctcd::eval
