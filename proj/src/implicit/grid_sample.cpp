#include "texcomp/implicit/grid_sample.hpp"

#include "texcomp/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {
namespace {

using nn::Real;
using nn::Tensor;

struct Corners {
  std::array<std::size_t, 8> index;
  std::array<Real, 8> weight;
};

// Per-axis lower node and fraction with border clamping.
inline void axis_weights(double p, int k, int& i0, int& i1, double& t) {
  if (k == 1) {
    i0 = i1 = 0;
    t = 0;
    return;
  }
  const double u = std::clamp(grid_coordinate(p, k), 0.0, double(k - 1));
  i0 = std::min(int(std::floor(u)), k - 2);
  i1 = i0 + 1;
  t = u - i0;
}

inline Corners corners(const double* p, int k) {
  int lo[3], hi[3];
  double t[3];
  for (int a = 0; a < 3; ++a) axis_weights(p[a], k, lo[a], hi[a], t[a]);
  Corners c;
  for (int n = 0; n < 8; ++n) {
    const int i = (n & 1) ? hi[0] : lo[0], j = (n & 2) ? hi[1] : lo[1], l = (n & 4) ? hi[2] : lo[2];
    c.index[n] = (std::size_t(i) * k + j) * k + l;
    c.weight[n] = Real(((n & 1) ? t[0] : 1 - t[0]) * ((n & 2) ? t[1] : 1 - t[1]) * ((n & 4) ? t[2] : 1 - t[2]));
  }
  return c;
}

constexpr double kTapOffsets[kSampleTaps][3] = {{0, 0, 0},  {1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                                {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};

void check(const Pyramid& pyramid, const Tensor& points) {
  if (pyramid.empty()) throw Error(Errc::invalid_argument, "grid sampling needs a non-empty pyramid");
  if (points.rank() != 3 || points.dim(2) != 3)
    throw Error(Errc::invalid_argument, "points must be (B, P, 3), got " + nn::shape_string(points.shape));
  for (const Tensor& level : pyramid)
    if (level.rank() != 5 || level.dim(0) != points.dim(0) || level.dim(2) != level.dim(3) ||
        level.dim(2) != level.dim(4))
      throw Error(Errc::invalid_argument, "pyramid level " + nn::shape_string(level.shape) +
                                              " does not match point batch " + nn::shape_string(points.shape));
}

}  // namespace

int sampled_feature_length(const Pyramid& pyramid) {
  int total = 0;
  for (const Tensor& level : pyramid) total += level.dim(1) * kSampleTaps;
  return total;
}

Tensor grid_sample_features(const Pyramid& pyramid, const Tensor& points, double delta) {
  check(pyramid, points);
  const int batch = points.dim(0), count = points.dim(1), length = sampled_feature_length(pyramid);
  Tensor out({batch * count, length});
  for (int b = 0; b < batch; ++b)
    for (int q = 0; q < count; ++q) {
      const Real* p = points.ptr() + (std::size_t(b) * count + q) * 3;
      Real* row = out.ptr() + (std::size_t(b) * count + q) * length;
      for (const Tensor& level : pyramid) {
        const int channels = level.dim(1), k = level.dim(2);
        const std::size_t volume = std::size_t(k) * k * k;
        const Real* base = level.ptr() + std::size_t(b) * channels * volume;
        for (const auto& offset : kTapOffsets) {
          const double at[3] = {p[0] + delta * offset[0], p[1] + delta * offset[1], p[2] + delta * offset[2]};
          const Corners c = corners(at, k);
          for (int ch = 0; ch < channels; ++ch) {
            const Real* v = base + ch * volume;
            Real sum = 0;
            for (int n = 0; n < 8; ++n) sum += c.weight[n] * v[c.index[n]];
            row[ch] = sum;
          }
          row += channels;
        }
      }
    }
  return out;
}

Pyramid grid_sample_backward(const Pyramid& pyramid, const Tensor& points, double delta, const Tensor& grad) {
  check(pyramid, points);
  const int batch = points.dim(0), count = points.dim(1), length = sampled_feature_length(pyramid);
  if (grad.rank() != 2 || grad.dim(0) != batch * count || grad.dim(1) != length)
    throw Error(Errc::feature_mismatch, "feature gradient shape " + nn::shape_string(grad.shape));
  Pyramid grads;
  for (const Tensor& level : pyramid) grads.emplace_back(level.shape);
  for (int b = 0; b < batch; ++b)
    for (int q = 0; q < count; ++q) {
      const Real* p = points.ptr() + (std::size_t(b) * count + q) * 3;
      const Real* row = grad.ptr() + (std::size_t(b) * count + q) * length;
      for (std::size_t l = 0; l < pyramid.size(); ++l) {
        const int channels = pyramid[l].dim(1), k = pyramid[l].dim(2);
        const std::size_t volume = std::size_t(k) * k * k;
        Real* base = grads[l].ptr() + std::size_t(b) * channels * volume;
        for (const auto& offset : kTapOffsets) {
          const double at[3] = {p[0] + delta * offset[0], p[1] + delta * offset[1], p[2] + delta * offset[2]};
          const Corners c = corners(at, k);
          for (int ch = 0; ch < channels; ++ch) {
            Real* v = base + ch * volume;
            for (int n = 0; n < 8; ++n) v[c.index[n]] += c.weight[n] * row[ch];
          }
          row += channels;
        }
      }
    }
  return grads;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
