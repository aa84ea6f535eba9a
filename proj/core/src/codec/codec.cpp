#include "ctcd/codec/codec.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "ctcd/common/error.hpp"
#include "ctcd/estimator/classical.hpp"
#include "ctcd/eval/metrics.hpp"
#include "ctcd/nn/ops.hpp"
#include "ctcd/nn/optim.hpp"

namespace ctcd::codec {

using nn::ConvGeometry;
using nn::Feature;
using nn::FeatureShape;
using nn::Matrix;
using nn::Tensor;

void CodecConfig::validate() const {
  if (height < 1 || width < 1 || image_channels < 1) throw ConfigError("image shape must be positive");
  if (num_subcarriers < 8) throw ConfigError("codec needs K >= 8");
  if (num_stages < 2) throw ConfigError("codec needs at least 2 stages");
  if (static_cast<int>(channels_per_stage.size()) != num_stages ||
      static_cast<int>(dilation_rates.size()) != num_stages)
    throw ConfigError("channels_per_stage and dilation_rates must have num_stages entries");
  for (int c : channels_per_stage)
    if (c < 1 || c % attention_heads != 0)
      throw ConfigError("stage channels must be positive multiples of attention_heads");
  for (int d : dilation_rates)
    if (d < 1) throw ConfigError("dilation rates must be >= 1");
  if (attention_heads < 1 || latent_frames < 1) throw ConfigError("attention_heads and latent_frames must be >= 1");
  if (height % (1 << num_stages) != 0 || width % (1 << num_stages) != 0)
    throw ConfigError("image size must be divisible by 2^num_stages");
  const int cells = bottleneck_height() * bottleneck_width();
  if (latent_reals() % cells != 0)
    throw ConfigError("latent of " + std::to_string(latent_reals()) + " reals does not tile the " +
                      std::to_string(bottleneck_height()) + "x" + std::to_string(bottleneck_width()) + " bottleneck");
  if (!(learning_rate > 0.0) || batch_size < 1 || epochs < 0) throw ConfigError("invalid codec training settings");
  if (snr_train_max_db < snr_train_min_db) throw ConfigError("codec training SNR range is empty");
}

namespace {

std::string stage(const char* side, int s, const char* part) {
  return std::string(side) + std::to_string(s) + "." + part;
}

ConvGeometry dilated(int d) { return {.kernel = 3, .stride = 1, .dilation = d, .padding = d}; }
constexpr ConvGeometry kDown{.kernel = 2, .stride = 2, .dilation = 1, .padding = 0};
constexpr ConvGeometry kSame{.kernel = 3, .stride = 1, .dilation = 1, .padding = 1};
constexpr ConvGeometry kPointwise{.kernel = 1, .stride = 1, .dilation = 1, .padding = 0};

Feature residual_conv(const nn::ParameterSet& p, const std::string& name, const Feature& x, int dilation) {
  const Feature y = nn::conv2d(p, name, x, dilated(dilation));
  return {nn::add(x.data, nn::silu(y.data)), x.shape};
}

}  // namespace

SemanticCodec::SemanticCodec(CodecConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const auto& ch = config_.channels_per_stage;
  int in = config_.image_channels;
  for (int s = 0; s < config_.num_stages; ++s) {
    nn::add_conv2d(params_, stage("enc", s, "down"), in, ch[s], 2, rng);
    nn::add_conv2d(params_, stage("enc", s, "conv"), ch[s], ch[s], 3, rng, 0.5);
    nn::add_self_attention(params_, stage("enc", s, "attn"), ch[s], rng);
    in = ch[s];
  }
  nn::add_conv2d(params_, "enc.proj", in, config_.bottleneck_channels(), 1, rng);
  nn::add_conv2d(params_, "dec.proj", config_.bottleneck_channels(), ch.back(), 1, rng);
  for (int s = config_.num_stages - 1; s >= 0; --s) {
    nn::add_self_attention(params_, stage("dec", s, "attn"), ch[s], rng);
    nn::add_conv2d(params_, stage("dec", s, "conv"), ch[s], ch[s], 3, rng, 0.5);
    nn::add_conv2d(params_, stage("dec", s, "up"), ch[s], ch[std::max(s - 1, 0)], 3, rng);
  }
  nn::add_conv2d(params_, "dec.out", ch.front(), config_.image_channels, 3, rng);
}

SemanticCodec::SemanticCodec(CodecConfig config, nn::ParameterSet params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const SemanticCodec reference(config_, 0);
  const auto& want = reference.parameters().entries();
  if (want.size() != params_.size()) throw InputError("codec parameters do not match the configuration");
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& got = params_.entries()[i];
    if (got.first != want[i].first || got.second.rows() != want[i].second.rows() ||
        got.second.cols() != want[i].second.cols())
      throw InputError("codec parameter '" + want[i].first + "' is missing or has the wrong shape");
  }
}

StageLayout SemanticCodec::layout() const {
  StageLayout l;
  for (int s = 0; s < config_.num_stages; ++s) l.encoder_sizes.push_back(config_.height >> (s + 1));
  // decoder stage s runs at the size encoder stage s produced, then upsamples
  for (int s = 0; s < config_.num_stages; ++s) l.decoder_sizes.push_back(config_.height >> (s + 1));
  return l;
}

Tensor SemanticCodec::encode_tensor(const Tensor& images, int batch) const {
  const auto& c = config_;
  Feature h{images, FeatureShape{batch, c.height, c.width, c.image_channels}};
  if (images.rows() != h.shape.rows() || images.cols() != c.image_channels)
    throw InputError("image batch does not match the codec configuration");
  for (int s = 0; s < c.num_stages; ++s) {
    h = nn::conv2d(params_, stage("enc", s, "down"), h, kDown);
    h = residual_conv(params_, stage("enc", s, "conv"), h, c.dilation_rates[s]);
    h = nn::self_attention(params_, stage("enc", s, "attn"), h, c.attention_heads);
  }
  h = nn::conv2d(params_, "enc.proj", h, kPointwise);
  const Tensor frames = nn::reshape(h.data, static_cast<Eigen::Index>(batch) * c.latent_frames, 2 * c.num_subcarriers);
  return nn::reshape(nn::normalize_power(frames), batch, c.latent_reals());
}

Tensor SemanticCodec::decode_tensor(const Tensor& latent, int batch) const {
  const auto& c = config_;
  if (latent.rows() != batch || latent.cols() != c.latent_reals())
    throw InputError("latent batch does not match the codec configuration");
  Feature h{nn::reshape(latent, static_cast<Eigen::Index>(batch) * c.bottleneck_height() * c.bottleneck_width(),
                        c.bottleneck_channels()),
            FeatureShape{batch, c.bottleneck_height(), c.bottleneck_width(), c.bottleneck_channels()}};
  h = nn::conv2d(params_, "dec.proj", h, kPointwise);
  for (int s = c.num_stages - 1; s >= 0; --s) {
    h = nn::self_attention(params_, stage("dec", s, "attn"), h, c.attention_heads);
    h = residual_conv(params_, stage("dec", s, "conv"), h, c.dilation_rates[s]);
    FeatureShape up = h.shape;
    up.height *= 2;
    up.width *= 2;
    h = {nn::upsample_nearest(h.data, h.shape, 2), up};
    h = nn::conv2d(params_, stage("dec", s, "up"), h, kSame);
    h.data = nn::silu(h.data);
  }
  return nn::sigmoid(nn::conv2d(params_, "dec.out", h, kSame).data);
}

Matrix SemanticCodec::images_to_matrix(std::span<const ImageSample> images) const {
  const auto& c = config_;
  const Eigen::Index per = static_cast<Eigen::Index>(c.height) * c.width;
  Matrix m(per * static_cast<Eigen::Index>(images.size()), c.image_channels);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& im = images[i];
    if (im.height != c.height || im.width != c.width || im.channels != c.image_channels)
      throw InputError("image " + std::to_string(i) + " is " + std::to_string(im.height) + "x" +
                       std::to_string(im.width) + "x" + std::to_string(im.channels) + ", codec expects " +
                       std::to_string(c.height) + "x" + std::to_string(c.width) + "x" +
                       std::to_string(c.image_channels));
    std::copy(im.pixels.begin(), im.pixels.end(), m.data() + static_cast<Eigen::Index>(i) * per * c.image_channels);
  }
  return m;
}

std::vector<ImageSample> SemanticCodec::matrix_to_images(const Matrix& m) const {
  const auto& c = config_;
  const std::size_t per = static_cast<std::size_t>(c.height) * c.width * c.image_channels;
  const std::size_t n = static_cast<std::size_t>(m.size()) / per;
  std::vector<ImageSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    ImageSample im(c.height, c.width, c.image_channels);
    std::copy(m.data() + i * per, m.data() + (i + 1) * per, im.pixels.begin());
    im.clamp();
    out.push_back(std::move(im));
  }
  return out;
}

std::vector<SemanticFrame> SemanticCodec::encode(std::span<const ImageSample> images) const {
  nn::NoGradGuard guard;
  std::vector<SemanticFrame> out;
  const int batch = 32;
  for (std::size_t first = 0; first < images.size(); first += batch) {
    const auto part = images.subspan(first, std::min<std::size_t>(batch, images.size() - first));
    const Matrix z = encode_tensor(Tensor::constant(images_to_matrix(part)), static_cast<int>(part.size())).value();
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      SemanticFrame f;
      f.frame_count = config_.latent_frames;
      f.num_subcarriers = config_.num_subcarriers;
      f.symbols.resize(static_cast<std::size_t>(z.cols() / 2));
      for (std::size_t k = 0; k < f.symbols.size(); ++k) f.symbols[k] = cplx(z(r, 2 * k), z(r, 2 * k + 1));
      out.push_back(std::move(f));
    }
  }
  return out;
}

SemanticFrame SemanticCodec::encode(const ImageSample& image) const { return encode(std::span(&image, 1)).front(); }

std::vector<ImageSample> SemanticCodec::decode(std::span<const CVector> symbols) const {
  nn::NoGradGuard guard;
  const auto n = static_cast<std::size_t>(config_.num_subcarriers) * config_.latent_frames;
  std::vector<ImageSample> out;
  const int batch = 32;
  for (std::size_t first = 0; first < symbols.size(); first += batch) {
    const std::size_t count = std::min<std::size_t>(batch, symbols.size() - first);
    Matrix z(static_cast<Eigen::Index>(count), 2 * static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < count; ++i) {
      const auto& s = symbols[first + i];
      if (s.size() != n)
        throw InputError("decode expects " + std::to_string(n) + " symbols, got " + std::to_string(s.size()));
      for (std::size_t k = 0; k < n; ++k) {
        z(static_cast<Eigen::Index>(i), 2 * k) = s[k].real();
        z(static_cast<Eigen::Index>(i), 2 * k + 1) = s[k].imag();
      }
    }
    auto imgs = matrix_to_images(decode_tensor(Tensor::constant(std::move(z)), static_cast<int>(count)).value());
    for (auto& im : imgs) out.push_back(std::move(im));
  }
  return out;
}

ImageSample SemanticCodec::decode(std::span<const cplx> symbols) const {
  const CVector v(symbols.begin(), symbols.end());
  return decode(std::span(&v, 1)).front();
}

ChannelSampler awgn_channel(int num_subcarriers) {
  return [num_subcarriers](Rng&) {
    channel::ChannelRealization h;
    h.gains.assign(static_cast<std::size_t>(num_subcarriers), cplx(1.0, 0.0));
    h.scene_id = "awgn";
    return h;
  };
}

FrameDistortion frame_distortion(std::span<const cplx> x, const channel::ChannelRealization& h,
                                 std::span<const cplx> h_hat, double snr_db, Rng& rng) {
  if (x.size() != h.gains.size() || h_hat.size() != x.size()) throw InputError("frame and channel lengths differ");
  const double nv = channel::realized_noise_variance(x, h, snr_db);
  const double sigma = std::sqrt(nv);
  FrameDistortion d;
  d.gain.resize(x.size());
  d.offset.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const cplx eps = std::isinf(snr_db) ? cplx{} : rng.complex_normal(1.0);
    const double den = std::norm(h_hat[k]) + nv;
    if (den < estimator::kCompensationGuard) continue;
    const cplx w = std::conj(h_hat[k]) / den;
    d.gain[k] = h.gains[k] * w;
    d.offset[k] = sigma * eps * w;
  }
  return d;
}

namespace {

double mean_validation_psnr(const SemanticCodec& codec, std::span<const ImageSample> images,
                            const ChannelSampler& channel, double snr_db, std::uint64_t seed) {
  if (images.empty()) return 0.0;
  const auto perfect = [](const channel::ChannelRealization& h, double, std::uint64_t) { return h.gains; };
  const auto out = transmit_images(codec, images, channel, perfect, snr_db, seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i)
    acc += std::min(eval::psnr(images[i], out[i]), eval::kPsnrIdenticalSentinel);
  return acc / static_cast<double>(images.size());
}

nlohmann::json log_json(const std::vector<CodecEpochLog>& log) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : log)
    j.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"validation_psnr_db", e.validation_psnr_db}});
  return j;
}

}  // namespace

CodecTrainResult train_joint(std::span<const ImageSample> train, std::span<const ImageSample> validation,
                             const CodecConfig& config, const JointTrainingOptions& options) {
  config.validate();
  if (train.empty()) throw ConfigError("codec training set is empty");
  if (options.csi == TrainingCsi::LS && options.pilot_positions.empty())
    throw ConfigError("LS training CSI needs pilot positions");
  const auto t0 = std::chrono::steady_clock::now();
  const ChannelSampler channel = options.channel ? options.channel : awgn_channel(config.num_subcarriers);

  CodecTrainResult result{SemanticCodec(config, derive_seed(config.seed, {0x696e6974})), {}, 0.0};
  SemanticCodec& codec = result.codec;
  nn::Adam adam(codec.parameters(), {.clip_norm = 5.0});
  Rng rng(derive_seed(config.seed, {0x7472}));

  const int K = config.num_subcarriers;
  const long steps_per_epoch = (static_cast<long>(train.size()) + config.batch_size - 1) / config.batch_size;
  const long total_steps = steps_per_epoch * config.epochs;
  long step = 0;
  bool have_checkpoint = false;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  auto save = [&]() {
    if (options.checkpoint_path.empty()) return;
    nn::Archive a;
    store_codec(a, codec);
    a.meta["log"] = log_json(result.log);
    nn::save_archive(a, options.checkpoint_path);
    have_checkpoint = true;
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t n = std::min<std::size_t>(config.batch_size, order.size() - first);
      std::vector<ImageSample> batch;
      for (std::size_t i = 0; i < n; ++i) batch.push_back(train[order[first + i]]);
      const Matrix target = codec.images_to_matrix(batch);
      const double snr = rng.uniform(config.snr_train_min_db, config.snr_train_max_db);

      const Tensor z = codec.encode_tensor(Tensor::constant(target), static_cast<int>(n));
      Matrix gain(z.rows(), z.cols()), offset(z.rows(), z.cols());
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        for (int f = 0; f < config.latent_frames; ++f) {
          CVector x(static_cast<std::size_t>(K));
          for (int k = 0; k < K; ++k) x[k] = cplx(z.value()(r, 2 * (f * K + k)), z.value()(r, 2 * (f * K + k) + 1));
          const auto h = channel(rng);
          CVector h_hat = h.gains;
          if (options.csi == TrainingCsi::LS) {
            const auto obs = channel::make_pilot_observation(h, options.pilot_positions, snr, rng.next_u64());
            h_hat = estimator::ls_estimate(obs, K).gains_hat;
          }
          const auto d = frame_distortion(x, h, h_hat, snr, rng);
          for (int k = 0; k < K; ++k) {
            const auto c = 2 * (f * K + k);
            gain(r, c) = d.gain[k].real();
            gain(r, c + 1) = d.gain[k].imag();
            offset(r, c) = d.offset[k].real();
            offset(r, c + 1) = d.offset[k].imag();
          }
        }
      }
      const Tensor received = nn::complex_affine(z, gain, offset);
      const Tensor loss = nn::mse(codec.decode_tensor(received, static_cast<int>(n)), Tensor::constant(target));
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value))
        throw TrainingError("codec training diverged in epoch " + std::to_string(epoch),
                            have_checkpoint ? options.checkpoint_path.string() : std::string());
      loss.backward();
      adam.step(nn::cosine_lr(config.learning_rate, step++, total_steps));
      loss_sum += value * static_cast<double>(n);
      seen += n;
    }
    CodecEpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(seen);
    entry.validation_psnr_db =
        mean_validation_psnr(codec, validation, channel, config.validation_snr_db, derive_seed(config.seed, {0x7661}));
    result.log.push_back(entry);
    save();
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<ImageSample> transmit_images(const SemanticCodec& codec, std::span<const ImageSample> images,
                                         const ChannelSampler& channel, const EstimateFn& estimate, double snr_db,
                                         std::uint64_t seed) {
  const auto frames = codec.encode(images);
  const int K = codec.config().num_subcarriers;
  std::vector<CVector> received(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Rng rng(derive_seed(seed, {i}));
    auto& out = received[i];
    out.reserve(frames[i].symbols.size());
    for (int f = 0; f < frames[i].frame_count; ++f) {
      const auto x = frames[i].frame(f);
      const auto h = channel(rng);
      if (static_cast<int>(h.gains.size()) != K) throw InputError("channel length differs from codec K");
      const auto y = channel::transmit(x, h, snr_db, rng.next_u64());
      estimator::ChannelEstimate est;
      est.gains_hat = estimate(h, snr_db, rng.next_u64());
      const auto x_hat = estimator::compensate(y, est, channel::realized_noise_variance(x, h, snr_db));
      out.insert(out.end(), x_hat.begin(), x_hat.end());
    }
  }
  return codec.decode(received);
}

nlohmann::json to_json(const CodecConfig& c) {
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
          {"seed", c.seed},
          {"compression_ratio", c.compression_ratio()}};
}

CodecConfig codec_config_from_json(const nlohmann::json& j) {
  CodecConfig c;
  try {
    c.height = j.at("height").get<int>();
    c.width = j.at("width").get<int>();
    c.image_channels = j.at("image_channels").get<int>();
    c.num_subcarriers = j.at("num_subcarriers").get<int>();
    c.num_stages = j.at("num_stages").get<int>();
    c.channels_per_stage = j.at("channels_per_stage").get<std::vector<int>>();
    c.dilation_rates = j.at("dilation_rates").get<std::vector<int>>();
    c.attention_heads = j.at("attention_heads").get<int>();
    c.latent_frames = j.at("latent_frames").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.snr_train_min_db = j.at("snr_train_min_db").get<double>();
    c.snr_train_max_db = j.at("snr_train_max_db").get<double>();
    c.validation_snr_db = j.at("validation_snr_db").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed codec configuration: ") + e.what());
  }
  return c;
}

void store_codec(nn::Archive& archive, const SemanticCodec& codec) {
  archive.meta["codec"] = to_json(codec.config());
  archive.put_parameters("codec.", codec.parameters());
}

SemanticCodec load_codec(const nn::Archive& archive) {
  if (!archive.meta.contains("codec")) throw InputError("archive holds no codec");
  return SemanticCodec(codec_config_from_json(archive.meta.at("codec")), archive.parameters("codec."));
}

}  // namespace ctcd::codec
