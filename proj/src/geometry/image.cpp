#include "texcomp/geometry/image.hpp"

#include "texcomp/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace texcomp {

Eigen::Vector2d texel_center_uv(int x, int y, int width, int height) {
  return {(x + 0.5) / width, 1.0 - (y + 0.5) / height};
}

Rgb sample_bilinear(const Image& image, const Eigen::Vector2d& uv) {
  const double fx = uv.x() * image.width - 0.5;
  const double fy = (1.0 - uv.y()) * image.height - 0.5;
  const double cx = std::clamp(fx, 0.0, double(image.width - 1));
  const double cy = std::clamp(fy, 0.0, double(image.height - 1));
  const int x0 = std::min(int(std::floor(cx)), std::max(image.width - 2, 0));
  const int y0 = std::min(int(std::floor(cy)), std::max(image.height - 2, 0));
  const int x1 = std::min(x0 + 1, image.width - 1);
  const int y1 = std::min(y0 + 1, image.height - 1);
  const double tx = cx - x0;
  const double ty = cy - y0;
  const Rgb top = (1 - tx) * image.rgb(x0, y0) + tx * image.rgb(x1, y0);
  const Rgb bottom = (1 - tx) * image.rgb(x0, y1) + tx * image.rgb(x1, y1);
  return (1 - ty) * top + ty * bottom;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(Errc::missing_file, path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::io_failure, "cannot decode png " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = int(png_get_image_width(png, info));
  const int height = int(png_get_image_height(png, info));
  const int channels = int(png_get_channels(png, info));
  std::vector<png_byte> bytes(std::size_t(width) * height * channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + std::size_t(y) * width * channels;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image image(width, height, channels);
  for (std::size_t i = 0; i < bytes.size(); ++i) image.pixels[i] = bytes[i] / 255.0f;
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.empty() || (image.channels != 1 && image.channels != 3))
    throw Error(Errc::invalid_argument, "png export needs a 1- or 3-channel image");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(Errc::io_failure, "cannot open " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io_failure, "cannot encode png " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(std::size_t(image.width) * image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const float v = image.pixels[std::size_t(y) * row.size() + i];
      row[i] = png_byte(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace texcomp
