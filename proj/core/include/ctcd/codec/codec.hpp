#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctcd/channel/channel_sim.hpp"
#include "ctcd/codec/image.hpp"
#include "ctcd/common/random.hpp"
#include "ctcd/nn/archive.hpp"
#include "ctcd/nn/layers.hpp"

namespace ctcd::codec {

struct CodecConfig {
  int height = 32;
  int width = 32;
  int image_channels = 3;
  int num_subcarriers = 64;
  int num_stages = 2;
  std::vector<int> channels_per_stage{32, 64};
  std::vector<int> dilation_rates{2, 2};
  int attention_heads = 2;
  int latent_frames = 4;

  // training
  double learning_rate = 2e-3;
  int batch_size = 16;
  int epochs = 20;
  double snr_train_min_db = 0.0;
  double snr_train_max_db = 20.0;
  double validation_snr_db = 10.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError on inconsistent lists or a latent that does not tile the
  /// bottleneck feature map.
  void validate() const;

  int latent_reals() const { return 2 * num_subcarriers * latent_frames; }
  int bottleneck_height() const { return height >> num_stages; }
  int bottleneck_width() const { return width >> num_stages; }
  int bottleneck_channels() const { return latent_reals() / (bottleneck_height() * bottleneck_width()); }
  double compression_ratio() const {
    return static_cast<double>(latent_reals()) / (static_cast<double>(height) * width * image_channels);
  }

  bool operator==(const CodecConfig&) const = default;
};

/// Power-normalized complex symbols of one image; frames are concatenated.
struct SemanticFrame {
  CVector symbols;  // num_subcarriers * frame_count
  int frame_count = 0;
  int num_subcarriers = 0;

  std::span<const cplx> frame(int i) const {
    return {symbols.data() + static_cast<std::size_t>(i) * num_subcarriers, static_cast<std::size_t>(num_subcarriers)};
  }
};

/// Spatial sizes each stage works at, for checking encoder/decoder symmetry.
struct StageLayout {
  std::vector<int> encoder_sizes;  // output height of encoder stage s
  std::vector<int> decoder_sizes;  // input height of decoder stage s (same indexing)
};

class SemanticCodec {
 public:
  SemanticCodec() = default;
  SemanticCodec(CodecConfig config, std::uint64_t seed);
  SemanticCodec(CodecConfig config, nn::ParameterSet params);

  const CodecConfig& config() const { return config_; }
  const nn::ParameterSet& parameters() const { return params_; }
  nn::ParameterSet& parameters() { return params_; }
  StageLayout layout() const;

  /// Differentiable encoder: images -> [B, 2*K*frames] reals, unit power per frame.
  nn::Tensor encode_tensor(const nn::Tensor& images, int batch) const;
  /// Differentiable decoder: [B, 2*K*frames] reals -> [B*H*W, C] in (0, 1).
  nn::Tensor decode_tensor(const nn::Tensor& latent, int batch) const;

  SemanticFrame encode(const ImageSample& image) const;
  std::vector<SemanticFrame> encode(std::span<const ImageSample> images) const;
  /// Throws InputError when the length is not K * latent_frames.
  ImageSample decode(std::span<const cplx> symbols) const;
  std::vector<ImageSample> decode(std::span<const CVector> symbols) const;

  nn::Matrix images_to_matrix(std::span<const ImageSample> images) const;
  std::vector<ImageSample> matrix_to_images(const nn::Matrix& m) const;

 private:
  CodecConfig config_;
  nn::ParameterSet params_;
};

/// Supplies the channel realization for one transmitted frame.
using ChannelSampler = std::function<channel::ChannelRealization(Rng&)>;

/// All-ones channel: plain AWGN.
ChannelSampler awgn_channel(int num_subcarriers);

enum class TrainingCsi { Perfect, LS };

struct JointTrainingOptions {
  ChannelSampler channel;  // empty: AWGN
  TrainingCsi csi = TrainingCsi::Perfect;
  std::vector<int> pilot_positions;  // used with TrainingCsi::LS
  /// Written after every epoch; on divergence it holds the last finite parameters.
  std::filesystem::path checkpoint_path;
};

struct CodecEpochLog {
  int epoch = 0;
  double loss = 0.0;
  double validation_psnr_db = 0.0;
};

struct CodecTrainResult {
  SemanticCodec codec;
  std::vector<CodecEpochLog> log;
  double wall_seconds = 0.0;
};

/// Per-pair complex gain and additive term that turn transmitted symbols x into the
/// compensated symbols g*x + o for one frame.
struct FrameDistortion {
  CVector gain;
  CVector offset;
};

/// Reparameterized channel for training: y = h x + sigma eps, equalized with the given
/// estimate. sigma is computed from the realized frame power.
FrameDistortion frame_distortion(std::span<const cplx> x, const channel::ChannelRealization& h,
                                 std::span<const cplx> h_hat, double snr_db, Rng& rng);

/// Mean squared pixel error of decode(compensate(transmit(encode(x)))). Throws TrainingError
/// (with the checkpoint path) if the loss becomes non-finite.
CodecTrainResult train_joint(std::span<const ImageSample> train, std::span<const ImageSample> validation,
                             const CodecConfig& config, const JointTrainingOptions& options = {});

/// Sends every frame through `channel` at snr_db with the given compensation and decodes.
/// `estimate` maps (true channel, snr, seed) to the estimate used for compensation.
using EstimateFn = std::function<CVector(const channel::ChannelRealization&, double, std::uint64_t)>;
std::vector<ImageSample> transmit_images(const SemanticCodec& codec, std::span<const ImageSample> images,
                                         const ChannelSampler& channel, const EstimateFn& estimate,
                                         double snr_db, std::uint64_t seed);

void store_codec(nn::Archive& archive, const SemanticCodec& codec);
SemanticCodec load_codec(const nn::Archive& archive);
nlohmann::json to_json(const CodecConfig& config);
CodecConfig codec_config_from_json(const nlohmann::json& j);

}  // namespace ctcd::codec
