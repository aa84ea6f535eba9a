#include "ctcd/codec/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ctcd/common/error.hpp"
#include "ctcd/common/random.hpp"

namespace ctcd::codec {

void ImageSample::clamp() {
  for (auto& v : pixels) v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
}

namespace {

using Color = std::array<double, 3>;

Color random_color(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

Color mix(const Color& a, const Color& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

struct Vehicle {
  double x0, x1, y0, y1;  // body box in unit coordinates
  Color body;
  double window_split;  // fraction of the height covered by the cabin
};

struct Sign {
  double cx, cy, r;
  Color face;
  double pole_bottom;
};

// Scene colour at a continuous point (u, v) in [0,1)^2, v growing downwards.
struct SceneSpec {
  double horizon;
  Color sky_top, sky_bottom, ground_near, ground_far, road;
  double vanish_x, road_half_width;
  std::vector<Vehicle> vehicles;
  std::vector<Sign> signs;

  Color shade(double u, double v) const {
    Color c;
    if (v < horizon) {
      c = mix(sky_top, sky_bottom, v / horizon);
    } else {
      const double depth = (v - horizon) / (1.0 - horizon);
      c = mix(ground_far, ground_near, depth);
      const double half = road_half_width * depth;
      const double centre = vanish_x + (0.5 - vanish_x) * depth;
      if (std::abs(u - centre) < half) c = mix(road, c, 0.15 * (1.0 - depth));
    }
    for (const auto& s : signs) {
      if (std::abs(u - s.cx) < 0.012 && v > s.cy && v < s.pole_bottom) c = {0.35, 0.35, 0.38};
      const double d2 = (u - s.cx) * (u - s.cx) + (v - s.cy) * (v - s.cy);
      if (d2 < s.r * s.r) c = d2 < 0.45 * s.r * s.r ? Color{0.92, 0.92, 0.9} : s.face;
    }
    for (const auto& car : vehicles) {
      if (u >= car.x0 && u < car.x1 && v >= car.y0 && v < car.y1) {
        const double rel = (v - car.y0) / (car.y1 - car.y0);
        const double inset = 0.18 * (car.x1 - car.x0);
        if (rel < car.window_split) {
          if (u >= car.x0 + inset && u < car.x1 - inset) c = mix(car.body, {0.15, 0.2, 0.3}, 0.6);
        } else {
          c = car.body;
        }
      }
      // wheels
      const double wy = car.y1;
      const double wr = 0.08 * (car.x1 - car.x0) + 0.01;
      for (double wx : {car.x0 + 0.22 * (car.x1 - car.x0), car.x1 - 0.22 * (car.x1 - car.x0)}) {
        if ((u - wx) * (u - wx) + (v - wy) * (v - wy) < wr * wr) c = {0.08, 0.08, 0.08};
      }
    }
    return c;
  }
};

}  // namespace

ImageSample synthetic_scene(std::uint64_t seed, int height, int width) {
  Rng rng(derive_seed(seed, {0x7363656e65ULL}));
  SceneSpec s;
  s.horizon = rng.uniform(0.3, 0.5);
  const bool dusk = rng.uniform() < 0.3;
  s.sky_top = dusk ? Color{rng.uniform(0.2, 0.4), rng.uniform(0.15, 0.3), rng.uniform(0.3, 0.5)}
                   : Color{rng.uniform(0.25, 0.45), rng.uniform(0.5, 0.7), rng.uniform(0.8, 0.95)};
  s.sky_bottom = mix(s.sky_top, {0.95, 0.85, 0.75}, rng.uniform(0.3, 0.7));
  s.ground_far = random_color(rng, 0.3, 0.55);
  s.ground_near = mix(s.ground_far, {0.25, 0.4, 0.2}, rng.uniform(0.2, 0.6));
  const double grey = rng.uniform(0.25, 0.45);
  s.road = {grey, grey, grey + 0.03};
  s.vanish_x = rng.uniform(0.35, 0.65);
  s.road_half_width = rng.uniform(0.3, 0.45);

  const int cars = 1 + static_cast<int>(rng.uniform_index(3));
  for (int i = 0; i < cars; ++i) {
    Vehicle v;
    const double w = rng.uniform(0.18, 0.38);
    const double h = w * rng.uniform(0.45, 0.7);
    v.x0 = rng.uniform(0.0, 1.0 - w);
    v.x1 = v.x0 + w;
    v.y1 = rng.uniform(s.horizon + 0.15, 0.92);
    v.y0 = v.y1 - h;
    v.body = random_color(rng, 0.05, 0.95);
    v.window_split = rng.uniform(0.3, 0.5);
    s.vehicles.push_back(v);
  }
  std::sort(s.vehicles.begin(), s.vehicles.end(),
            [](const Vehicle& a, const Vehicle& b) { return a.y1 < b.y1; });
  if (rng.uniform() < 0.6) {
    Sign sg;
    sg.cx = rng.uniform() < 0.5 ? rng.uniform(0.06, 0.2) : rng.uniform(0.8, 0.94);
    sg.cy = rng.uniform(0.15, s.horizon + 0.05);
    sg.r = rng.uniform(0.05, 0.09);
    sg.face = rng.uniform() < 0.5 ? Color{0.8, 0.1, 0.1} : Color{0.1, 0.25, 0.75};
    sg.pole_bottom = std::min(0.95, sg.cy + rng.uniform(0.3, 0.5));
    s.signs.push_back(sg);
  }

  // 4x4 supersampling for antialiased edges
  constexpr int kSub = 4;
  ImageSample img(height, width, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Color acc{0, 0, 0};
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double u = (x + (sx + 0.5) / kSub) / width;
          const double v = (y + (sy + 0.5) / kSub) / height;
          const Color c = s.shade(u, v);
          for (int ch = 0; ch < 3; ++ch) acc[ch] += c[ch];
        }
      }
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = acc[ch] / (kSub * kSub);
    }
  }
  img.clamp();
  img.label = "synthetic-" + std::to_string(seed);
  return img;
}

std::vector<ImageSample> synthetic_corpus(std::uint64_t seed, int count, int height, int width) {
  std::vector<ImageSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(synthetic_scene(derive_seed(seed, {static_cast<std::uint64_t>(i)}), height, width));
  return out;
}

std::vector<ImageSample> load_image_directory(const std::filesystem::path& dir, int height,
                                              int width) {
  if (!std::filesystem::is_directory(dir))
    throw InputError("image directory '" + dir.string() + "' does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ImageSample> out;
  for (const auto& f : files) {
    cv::Mat bgr = cv::imread(f.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw InputError("cannot decode image '" + f.string() + "'");
    cv::Mat resized;
    cv::resize(bgr, resized, cv::Size(width, height), 0, 0,
               (bgr.cols > width || bgr.rows > height) ? cv::INTER_AREA : cv::INTER_LINEAR);
    ImageSample img(height, width, 3);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const auto& px = resized.at<cv::Vec3b>(y, x);
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = px[2 - c] / 255.0;
      }
    }
    img.label = f.filename().string();
    out.push_back(std::move(img));
  }
  return out;
}

void save_png(const ImageSample& image, const std::filesystem::path& path) {
  if (image.channels != 3 && image.channels != 1)
    throw InputError("save_png supports 1 or 3 channels");
  cv::Mat m(image.height, image.width, image.channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        const double v = std::clamp(image.at(y, x, c), 0.0, 1.0);
        const auto b = static_cast<std::uint8_t>(std::lround(v * 255.0));
        if (image.channels == 3)
          m.at<cv::Vec3b>(y, x)[2 - c] = b;
        else
          m.at<std::uint8_t>(y, x) = b;
      }
    }
  }
  if (!cv::imwrite(path.string(), m)) throw Error("cannot write '" + path.string() + "'");
}

ImageSample tile_horizontal(const std::vector<ImageSample>& images) {
  if (images.empty()) return {};
  const int h = images.front().height;
  const int c = images.front().channels;
  int w = 0;
  for (const auto& im : images) {
    if (im.height != h || im.channels != c) throw InputError("tile_horizontal: shape mismatch");
    w += im.width + 1;
  }
  ImageSample out(h, w - 1, c, 1.0);
  int x0 = 0;
  for (const auto& im : images) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < im.width; ++x)
        for (int ch = 0; ch < c; ++ch) out.at(y, x0 + x, ch) = im.at(y, x, ch);
    x0 += im.width + 1;
  }
  return out;
}

}  // namespace ctcd::codec
