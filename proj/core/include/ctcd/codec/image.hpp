#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ctcd::codec {

/// H x W x C intensities in [0, 1], row-major with interleaved channels.
struct ImageSample {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> pixels;
  std::string label;

  ImageSample() = default;
  ImageSample(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), pixels(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t size() const { return pixels.size(); }
  double& at(int y, int x, int c) { return pixels[index(y, x, c)]; }
  double at(int y, int x, int c) const { return pixels[index(y, x, c)]; }
  bool same_shape(const ImageSample& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  /// Clamps every value into [0, 1]; NaN becomes 0.
  void clamp();

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
};

/// Procedural street-like scene (sky, road, vehicles, signs) used as the bundled corpus.
ImageSample synthetic_scene(std::uint64_t seed, int height = 32, int width = 32);

std::vector<ImageSample> synthetic_corpus(std::uint64_t seed, int count, int height = 32,
                                          int width = 32);

/// Loads every PNG/JPEG in `dir` in alphabetical order, resized to height x width RGB.
std::vector<ImageSample> load_image_directory(const std::filesystem::path& dir, int height,
                                              int width);

void save_png(const ImageSample& image, const std::filesystem::path& path);

/// Images side by side, separated by a one-pixel white gutter.
ImageSample tile_horizontal(const std::vector<ImageSample>& images);

}  // namespace ctcd::codec
