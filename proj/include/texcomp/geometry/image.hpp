#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace texcomp {

using Rgb = Eigen::Vector3d;

// Row-major interleaved float image. Row 0 is the top row; uv v=0 maps to the
// bottom row, matching Wavefront texture coordinates.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  bool empty() const { return width <= 0 || height <= 0 || channels <= 0; }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  float& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }
  float at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }

  Rgb rgb(int x, int y) const {
    return {at(x, y, 0), at(x, y, channels > 1 ? 1 : 0),
            at(x, y, channels > 2 ? 2 : 0)};
  }
  void set_rgb(int x, int y, const Rgb& c) {
    for (int k = 0; k < channels && k < 3; ++k) at(x, y, k) = float(c[k]);
  }

  friend bool operator==(const Image&, const Image&) = default;
};

// Bilinear sample at uv with clamp-to-edge addressing.
Rgb sample_bilinear(const Image& image, const Eigen::Vector2d& uv);

// Texel center of (x, y) in uv space.
Eigen::Vector2d texel_center_uv(int x, int y, int width, int height);

// 8-bit PNG I/O. Gray images have one channel, RGB three.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace texcomp
