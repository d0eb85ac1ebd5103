#include "texcomp/nn/layers.hpp"

#include "texcomp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {
namespace {

using StridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

// Upper bound on im2col buffer elements; 3D convolutions are split into
// depth slabs to stay under it.
constexpr std::size_t kColumnBudget = std::size_t(1) << 22;

void require_rank(const Tensor& x, int rank, int channels, const char* what) {
  if (x.rank() != rank || (channels > 0 && x.dim(1) != channels))
    throw Error(Errc::invalid_argument, std::string(what) + ": unexpected input shape " +
                                            shape_string(x.shape) + " (expected " +
                                            std::to_string(channels) + " channels)");
}

// Copies one row of width w shifted by (offset - 1) with zero fill.
inline void shifted_row(const Real* src, Real* dst, int w, int offset) {
  if (offset == 1) {
    std::memcpy(dst, src, sizeof(Real) * w);
  } else if (offset == 0) {
    dst[0] = 0;
    std::memcpy(dst + 1, src, sizeof(Real) * (w - 1));
  } else {
    std::memcpy(dst, src + 1, sizeof(Real) * (w - 1));
    dst[w - 1] = 0;
  }
}

inline void shifted_row_add(const Real* src, Real* dst, int w, int offset) {
  if (offset == 1) {
    for (int x = 0; x < w; ++x) dst[x] += src[x];
  } else if (offset == 0) {
    for (int x = 1; x < w; ++x) dst[x - 1] += src[x];
  } else {
    for (int x = 0; x + 1 < w; ++x) dst[x + 1] += src[x];
  }
}

// Rows are (c, dz, dy, dx); columns are the voxels of planes [z0, z0 + nz).
void im2col3d(const Real* vol, int c_count, int d, int h, int w, int z0, int nz, Real* col) {
  const std::size_t plane = std::size_t(h) * w, cols = plane * nz;
  for (int c = 0; c < c_count; ++c)
    for (int dz = 0; dz < 3; ++dz)
      for (int dy = 0; dy < 3; ++dy)
        for (int dx = 0; dx < 3; ++dx) {
          Real* row = col + (std::size_t(c) * 27 + dz * 9 + dy * 3 + dx) * cols;
          for (int z = 0; z < nz; ++z) {
            const int zz = z0 + z + dz - 1;
            for (int y = 0; y < h; ++y) {
              Real* dst = row + z * plane + std::size_t(y) * w;
              const int yy = y + dy - 1;
              if (zz < 0 || zz >= d || yy < 0 || yy >= h) {
                std::fill(dst, dst + w, Real(0));
                continue;
              }
              shifted_row(vol + ((std::size_t(c) * d + zz) * h + yy) * w, dst, w, dx);
            }
          }
        }
}

void col2im3d(const Real* col, int c_count, int d, int h, int w, int z0, int nz, Real* vol) {
  const std::size_t plane = std::size_t(h) * w, cols = plane * nz;
  for (int c = 0; c < c_count; ++c)
    for (int dz = 0; dz < 3; ++dz)
      for (int dy = 0; dy < 3; ++dy)
        for (int dx = 0; dx < 3; ++dx) {
          const Real* row = col + (std::size_t(c) * 27 + dz * 9 + dy * 3 + dx) * cols;
          for (int z = 0; z < nz; ++z) {
            const int zz = z0 + z + dz - 1;
            if (zz < 0 || zz >= d) continue;
            for (int y = 0; y < h; ++y) {
              const int yy = y + dy - 1;
              if (yy < 0 || yy >= h) continue;
              shifted_row_add(row + z * plane + std::size_t(y) * w,
                              vol + ((std::size_t(c) * d + zz) * h + yy) * w, w, dx);
            }
          }
        }
}

int slab_depth(int channels, int d, int h, int w) {
  const std::size_t per_plane = std::size_t(channels) * 27 * h * w;
  return int(std::clamp<std::size_t>(kColumnBudget / std::max<std::size_t>(per_plane, 1), 1, d));
}

}  // namespace

Tensor Layer::forward(const Tensor& x, LayerCache& cache) {
  cache.input = x;
  cache.output = infer(x);
  return cache.output;
}

void init_uniform(Tensor& t, Real bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-double(bound), double(bound));
  for (Real& v : t.data) v = Real(u(rng));
}

// ---------------------------------------------------------------- Conv3d

Conv3d::Conv3d(const std::string& name, int in, int out, std::mt19937_64& rng)
    : weight(name + ".weight", {out, in * 27}), bias(name + ".bias", {out}), in_channels(in),
      out_channels(out) {
  const Real bound = Real(1.0 / std::sqrt(double(in * 27)));
  init_uniform(weight.value, bound, rng);
  init_uniform(bias.value, bound, rng);
}

void Conv3d::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Tensor Conv3d::infer(const Tensor& x) const {
  require_rank(x, 5, in_channels, "conv3d");
  const int b_count = x.dim(0), d = x.dim(2), h = x.dim(3), w = x.dim(4);
  const std::size_t plane = std::size_t(h) * w, volume = plane * d;
  Tensor out({b_count, out_channels, d, h, w});
  const int k = in_channels * 27;
  const int slab = slab_depth(in_channels, d, h, w);
  std::vector<Real> col(std::size_t(k) * slab * plane);
  ConstMatrixMap wm(weight.value.ptr(), out_channels, k);
  for (int b = 0; b < b_count; ++b) {
    const Real* src = x.ptr() + std::size_t(b) * in_channels * volume;
    Real* dst = out.ptr() + std::size_t(b) * out_channels * volume;
    for (int z0 = 0; z0 < d; z0 += slab) {
      const int nz = std::min(slab, d - z0);
      const int cols = int(nz * plane);
      im2col3d(src, in_channels, d, h, w, z0, nz, col.data());
      StridedMap o(dst + z0 * plane, out_channels, cols, Eigen::OuterStride<>(Eigen::Index(volume)));
      o.noalias() = wm * ConstMatrixMap(col.data(), k, cols);
      for (int c = 0; c < out_channels; ++c) o.row(c).array() += bias.value.data[c];
    }
  }
  return out;
}

Tensor Conv3d::backward(const Tensor& grad, const LayerCache& cache) {
  const Tensor& x = cache.input;
  const int b_count = x.dim(0), d = x.dim(2), h = x.dim(3), w = x.dim(4);
  const std::size_t plane = std::size_t(h) * w, volume = plane * d;
  const int k = in_channels * 27;
  const int slab = slab_depth(in_channels, d, h, w);
  Tensor dx(x.shape);
  std::vector<Real> col(std::size_t(k) * slab * plane), dcol(col.size());
  ConstMatrixMap wm(weight.value.ptr(), out_channels, k);
  MatrixMap dw(weight.grad.ptr(), out_channels, k);
  for (int b = 0; b < b_count; ++b) {
    const Real* src = x.ptr() + std::size_t(b) * in_channels * volume;
    const Real* g = grad.ptr() + std::size_t(b) * out_channels * volume;
    Real* dsrc = dx.ptr() + std::size_t(b) * in_channels * volume;
    for (int z0 = 0; z0 < d; z0 += slab) {
      const int nz = std::min(slab, d - z0);
      const int cols = int(nz * plane);
      im2col3d(src, in_channels, d, h, w, z0, nz, col.data());
      ConstStridedMap gm(g + z0 * plane, out_channels, cols, Eigen::OuterStride<>(Eigen::Index(volume)));
      ConstMatrixMap cm(col.data(), k, cols);
      dw.noalias() += gm * cm.transpose();
      for (int c = 0; c < out_channels; ++c) {
        const Real* row = g + c * volume + z0 * plane;
        double sum = 0.0;
        for (int i = 0; i < cols; ++i) sum += row[i];
        bias.grad.data[c] += Real(sum);
      }
      MatrixMap dc(dcol.data(), k, cols);
      dc.noalias() = wm.transpose() * gm;
      col2im3d(dcol.data(), in_channels, d, h, w, z0, nz, dsrc);
    }
  }
  return dx;
}

// ------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(const std::string& name, int c)
    : gamma(name + ".gamma", {c}), beta(name + ".beta", {c}),
      running_mean{name + ".running_mean", Tensor({c}, 0)},
      running_var{name + ".running_var", Tensor({c}, 1)}, channels(c) {
  gamma.value.fill(1);
}

void BatchNorm::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

void BatchNorm::collect_buffers(std::vector<Buffer*>& out) {
  out.push_back(&running_mean);
  out.push_back(&running_var);
}

Tensor BatchNorm::infer(const Tensor& x) const {
  require_rank(x, x.rank(), channels, "batchnorm");
  Tensor y(x.shape);
  const std::size_t spatial = x.stride0() / channels;
  for (int b = 0; b < x.dim(0); ++b)
    for (int c = 0; c < channels; ++c) {
      const Real scale = gamma.value.data[c] / std::sqrt(running_var.value.data[c] + kEpsilon);
      const Real shift = beta.value.data[c] - running_mean.value.data[c] * scale;
      const std::size_t base = (std::size_t(b) * channels + c) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) y.data[base + i] = x.data[base + i] * scale + shift;
    }
  return y;
}

Tensor BatchNorm::forward(const Tensor& x, LayerCache& cache) {
  require_rank(x, x.rank(), channels, "batchnorm");
  const std::size_t spatial = x.stride0() / channels;
  const double n = double(spatial) * x.dim(0);
  Tensor y(x.shape), xhat(x.shape);
  cache.stats.assign(channels, 0);
  for (int c = 0; c < channels; ++c) {
    double sum = 0, sq = 0;
    for (int b = 0; b < x.dim(0); ++b) {
      const Real* p = x.ptr() + (std::size_t(b) * channels + c) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) sum += p[i];
    }
    const double mean = sum / n;
    for (int b = 0; b < x.dim(0); ++b) {
      const Real* p = x.ptr() + (std::size_t(b) * channels + c) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) sq += (p[i] - mean) * (p[i] - mean);
    }
    const double var = sq / n;
    const double inv_std = 1.0 / std::sqrt(var + kEpsilon);
    cache.stats[c] = Real(inv_std);
    for (int b = 0; b < x.dim(0); ++b) {
      const std::size_t base = (std::size_t(b) * channels + c) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) {
        const Real xh = Real((x.data[base + i] - mean) * inv_std);
        xhat.data[base + i] = xh;
        y.data[base + i] = gamma.value.data[c] * xh + beta.value.data[c];
      }
    }
    Real& rm = running_mean.value.data[c];
    Real& rv = running_var.value.data[c];
    rm = Real((1 - kMomentum) * rm + kMomentum * mean);
    rv = Real((1 - kMomentum) * rv + kMomentum * (n > 1 ? var * n / (n - 1) : var));
  }
  cache.aux = std::move(xhat);
  return y;
}

Tensor BatchNorm::backward(const Tensor& grad, const LayerCache& cache) {
  const Tensor& xhat = cache.aux;
  const std::size_t spatial = grad.stride0() / channels;
  const double n = double(spatial) * grad.dim(0);
  Tensor dx(grad.shape);
  for (int c = 0; c < channels; ++c) {
    double sum_g = 0, sum_gx = 0;
    for (int b = 0; b < grad.dim(0); ++b) {
      const std::size_t base = (std::size_t(b) * channels + c) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) {
        sum_g += grad.data[base + i];
        sum_gx += double(grad.data[base + i]) * xhat.data[base + i];
      }
    }
    gamma.grad.data[c] += Real(sum_gx);
    beta.grad.data[c] += Real(sum_g);
    const double k = gamma.value.data[c] * cache.stats[c] / n;
    for (int b = 0; b < grad.dim(0); ++b) {
      const std::size_t base = (std::size_t(b) * channels + c) * spatial;
      for (std::size_t i = 0; i < spatial; ++i)
        dx.data[base + i] = Real(k * (n * grad.data[base + i] - sum_g - xhat.data[base + i] * sum_gx));
    }
  }
  return dx;
}

// ------------------------------------------------------------ activations

Tensor ReLU::infer(const Tensor& x) const {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) y.data[i] = std::max(x.data[i], Real(0));
  return y;
}

Tensor ReLU::backward(const Tensor& grad, const LayerCache& cache) {
  Tensor dx(grad.shape);
  for (std::size_t i = 0; i < grad.numel(); ++i) dx.data[i] = cache.output.data[i] > 0 ? grad.data[i] : 0;
  return dx;
}

Tensor LeakyReLU::infer(const Tensor& x) const {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) y.data[i] = x.data[i] > 0 ? x.data[i] : slope * x.data[i];
  return y;
}

Tensor LeakyReLU::backward(const Tensor& grad, const LayerCache& cache) {
  Tensor dx(grad.shape);
  for (std::size_t i = 0; i < grad.numel(); ++i)
    dx.data[i] = cache.input.data[i] > 0 ? grad.data[i] : slope * grad.data[i];
  return dx;
}

// --------------------------------------------------------------- pooling

namespace {

Tensor maxpool3d_impl(const Tensor& x, std::vector<std::int64_t>* index) {
  require_rank(x, 5, 0, "maxpool3d");
  const int b_count = x.dim(0), c_count = x.dim(1), d = x.dim(2), h = x.dim(3), w = x.dim(4);
  const int od = d / 2, oh = h / 2, ow = w / 2;
  if (od == 0 || oh == 0 || ow == 0)
    throw Error(Errc::resolution_mismatch, "maxpool3d: volume " + shape_string(x.shape) + " too small");
  Tensor y({b_count, c_count, od, oh, ow});
  if (index) index->assign(y.numel(), 0);
  std::size_t o = 0;
  for (int bc = 0; bc < b_count * c_count; ++bc) {
    const std::size_t base = std::size_t(bc) * d * h * w;
    for (int z = 0; z < od; ++z)
      for (int yy = 0; yy < oh; ++yy)
        for (int xx = 0; xx < ow; ++xx, ++o) {
          Real best = -std::numeric_limits<Real>::infinity();
          std::size_t arg = 0;
          for (int k = 0; k < 8; ++k) {
            const std::size_t i =
                base + ((std::size_t(2 * z + (k >> 2)) * h + 2 * yy + ((k >> 1) & 1)) * w) + 2 * xx + (k & 1);
            if (x.data[i] > best) best = x.data[i], arg = i;
          }
          y.data[o] = best;
          if (index) (*index)[o] = std::int64_t(arg);
        }
  }
  return y;
}

Tensor maxpool2d_impl(const Tensor& x, std::vector<std::int64_t>* index) {
  require_rank(x, 4, 0, "maxpool2d");
  const int bc_count = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = h / 2, ow = w / 2;
  Tensor y({x.dim(0), x.dim(1), oh, ow});
  if (index) index->assign(y.numel(), 0);
  std::size_t o = 0;
  for (int bc = 0; bc < bc_count; ++bc) {
    const std::size_t base = std::size_t(bc) * h * w;
    for (int yy = 0; yy < oh; ++yy)
      for (int xx = 0; xx < ow; ++xx, ++o) {
        Real best = -std::numeric_limits<Real>::infinity();
        std::size_t arg = 0;
        for (int k = 0; k < 4; ++k) {
          const std::size_t i = base + std::size_t(2 * yy + (k >> 1)) * w + 2 * xx + (k & 1);
          if (x.data[i] > best) best = x.data[i], arg = i;
        }
        y.data[o] = best;
        if (index) (*index)[o] = std::int64_t(arg);
      }
  }
  return y;
}

Tensor unpool(const Tensor& grad, const LayerCache& cache) {
  Tensor dx(cache.input.shape);
  for (std::size_t o = 0; o < grad.numel(); ++o) dx.data[std::size_t(cache.index[o])] += grad.data[o];
  return dx;
}

}  // namespace

Tensor MaxPool3d::infer(const Tensor& x) const { return maxpool3d_impl(x, nullptr); }

Tensor MaxPool3d::forward(const Tensor& x, LayerCache& cache) {
  cache.input = Tensor(x.shape);  // only the shape is needed
  return maxpool3d_impl(x, &cache.index);
}

Tensor MaxPool3d::backward(const Tensor& grad, const LayerCache& cache) { return unpool(grad, cache); }

Tensor MaxPool2d::infer(const Tensor& x) const { return maxpool2d_impl(x, nullptr); }

Tensor MaxPool2d::forward(const Tensor& x, LayerCache& cache) {
  cache.input = Tensor(x.shape);
  return maxpool2d_impl(x, &cache.index);
}

Tensor MaxPool2d::backward(const Tensor& grad, const LayerCache& cache) { return unpool(grad, cache); }

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, int in, int out, std::mt19937_64& rng)
    : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), in_features(in),
      out_features(out) {
  const Real bound = Real(1.0 / std::sqrt(double(in)));
  init_uniform(weight.value, bound, rng);
  init_uniform(bias.value, bound, rng);
}

void Linear::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Tensor Linear::infer(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != in_features)
    throw Error(Errc::feature_mismatch, "linear: input " + shape_string(x.shape) + " but layer expects " +
                                            std::to_string(in_features) + " features");
  const int n = x.dim(0);
  Tensor y({n, out_features});
  MatrixMap ym = as_matrix(y, n, out_features);
  ym.noalias() = as_matrix(x, n, in_features) * as_matrix(weight.value, out_features, in_features).transpose();
  ym.rowwise() += Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(bias.value.ptr(), out_features);
  return y;
}

Tensor Linear::backward(const Tensor& grad, const LayerCache& cache) {
  const int n = grad.dim(0);
  ConstMatrixMap g = as_matrix(grad, n, out_features);
  as_matrix(weight.grad, out_features, in_features).noalias() += g.transpose() * as_matrix(cache.input, n, in_features);
  // Plain loops: Eigen's vectorized reductions pick a summation order from
  // the buffer alignment, which would make results depend on the allocator.
  std::vector<double> bias_sum(out_features, 0.0);
  for (int r = 0; r < n; ++r) {
    const Real* row = grad.ptr() + std::size_t(r) * out_features;
    for (int c = 0; c < out_features; ++c) bias_sum[c] += row[c];
  }
  for (int c = 0; c < out_features; ++c) bias.grad.data[c] += Real(bias_sum[c]);
  Tensor dx({n, in_features});
  as_matrix(dx, n, in_features).noalias() = g * as_matrix(weight.value, out_features, in_features);
  return dx;
}

// ---------------------------------------------------------------- Conv2d

int conv_output_size(int size, int kernel, int stride) { return (size + 2 * (kernel / 2) - kernel) / stride + 1; }

void im2col2d(const Real* image, int c_count, int h, int w, int k, int s, Real* columns) {
  const int p = k / 2, oh = conv_output_size(h, k, s), ow = conv_output_size(w, k, s);
  const std::size_t cols = std::size_t(oh) * ow;
  for (int c = 0; c < c_count; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        Real* row = columns + (std::size_t(c) * k * k + ky * k + kx) * cols;
        const Real* plane = image + std::size_t(c) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * s + ky - p;
          Real* dst = row + std::size_t(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, Real(0));
            continue;
          }
          const Real* src = plane + std::size_t(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * s + kx - p;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : Real(0);
          }
        }
      }
}

void col2im2d(const Real* columns, int c_count, int h, int w, int k, int s, Real* image) {
  const int p = k / 2, oh = conv_output_size(h, k, s), ow = conv_output_size(w, k, s);
  const std::size_t cols = std::size_t(oh) * ow;
  for (int c = 0; c < c_count; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const Real* row = columns + (std::size_t(c) * k * k + ky * k + kx) * cols;
        Real* plane = image + std::size_t(c) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * s + ky - p;
          if (iy < 0 || iy >= h) continue;
          const Real* src = row + std::size_t(oy) * ow;
          Real* dst = plane + std::size_t(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * s + kx - p;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
}

Tensor conv2d_apply(const Tensor& x, const Tensor& weight, int k, int s) {
  const int b_count = x.dim(0), c_count = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int out = weight.dim(0), rows = c_count * k * k;
  if (weight.dim(1) != rows)
    throw Error(Errc::invalid_argument, "conv2d: input " + shape_string(x.shape) + " does not match weight " +
                                            shape_string(weight.shape));
  const int oh = conv_output_size(h, k, s), ow = conv_output_size(w, k, s), cols = oh * ow;
  Tensor y({b_count, out, oh, ow});
  std::vector<Real> col(std::size_t(rows) * cols);
  for (int b = 0; b < b_count; ++b) {
    im2col2d(x.ptr() + std::size_t(b) * c_count * h * w, c_count, h, w, k, s, col.data());
    MatrixMap(y.ptr() + std::size_t(b) * out * cols, out, cols).noalias() =
        as_matrix(weight, out, rows) * ConstMatrixMap(col.data(), rows, cols);
  }
  return y;
}

Tensor conv2d_backprop(const Tensor& x, const Tensor& weight, const Tensor& grad, int k, int s,
                       Tensor& weight_grad) {
  const int b_count = x.dim(0), c_count = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int out = weight.dim(0), rows = c_count * k * k;
  const int cols = grad.dim(2) * grad.dim(3);
  Tensor dx(x.shape);
  std::vector<Real> col(std::size_t(rows) * cols), dcol(col.size());
  for (int b = 0; b < b_count; ++b) {
    im2col2d(x.ptr() + std::size_t(b) * c_count * h * w, c_count, h, w, k, s, col.data());
    ConstMatrixMap g(grad.ptr() + std::size_t(b) * out * cols, out, cols);
    as_matrix(weight_grad, out, rows).noalias() += g * ConstMatrixMap(col.data(), rows, cols).transpose();
    MatrixMap(dcol.data(), rows, cols).noalias() = as_matrix(weight, out, rows).transpose() * g;
    col2im2d(dcol.data(), c_count, h, w, k, s, dx.ptr() + std::size_t(b) * c_count * h * w);
  }
  return dx;
}

Conv2d::Conv2d(const std::string& name, int in, int out, int k, int s, std::mt19937_64& rng)
    : weight(name + ".weight", {out, in * k * k}), bias(name + ".bias", {out}), in_channels(in),
      out_channels(out), kernel(k), stride(s) {
  const Real bound = Real(1.0 / std::sqrt(double(in * k * k)));
  init_uniform(weight.value, bound, rng);
  init_uniform(bias.value, bound, rng);
}

void Conv2d::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Tensor Conv2d::infer(const Tensor& x) const {
  require_rank(x, 4, in_channels, "conv2d");
  Tensor y = conv2d_apply(x, weight.value, kernel, stride);
  const std::size_t plane = std::size_t(y.dim(2)) * y.dim(3);
  for (int b = 0; b < y.dim(0); ++b)
    for (int c = 0; c < out_channels; ++c) {
      Real* p = y.ptr() + (std::size_t(b) * out_channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] += bias.value.data[c];
    }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad, const LayerCache& cache) {
  const std::size_t plane = std::size_t(grad.dim(2)) * grad.dim(3);
  for (int b = 0; b < grad.dim(0); ++b)
    for (int c = 0; c < out_channels; ++c) {
      const Real* p = grad.ptr() + (std::size_t(b) * out_channels + c) * plane;
      double sum = 0;
      for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      bias.grad.data[c] += Real(sum);
    }
  return conv2d_backprop(cache.input, weight.value, grad, kernel, stride, weight.grad);
}

Tensor upsample2x(const Tensor& x) {
  const int h = x.dim(2), w = x.dim(3);
  Tensor y({x.dim(0), x.dim(1), 2 * h, 2 * w});
  for (int bc = 0; bc < x.dim(0) * x.dim(1); ++bc) {
    const Real* src = x.ptr() + std::size_t(bc) * h * w;
    Real* dst = y.ptr() + std::size_t(bc) * 4 * h * w;
    for (int yy = 0; yy < 2 * h; ++yy)
      for (int xx = 0; xx < 2 * w; ++xx) dst[std::size_t(yy) * 2 * w + xx] = src[std::size_t(yy / 2) * w + xx / 2];
  }
  return y;
}

Tensor upsample2x_backward(const Tensor& grad) {
  const int h = grad.dim(2) / 2, w = grad.dim(3) / 2;
  Tensor dx({grad.dim(0), grad.dim(1), h, w});
  for (int bc = 0; bc < grad.dim(0) * grad.dim(1); ++bc) {
    const Real* src = grad.ptr() + std::size_t(bc) * 4 * h * w;
    Real* dst = dx.ptr() + std::size_t(bc) * h * w;
    for (int yy = 0; yy < 2 * h; ++yy)
      for (int xx = 0; xx < 2 * w; ++xx) dst[std::size_t(yy / 2) * w + xx / 2] += src[std::size_t(yy) * 2 * w + xx];
  }
  return dx;
}

// ------------------------------------------------------------ Sequential

Tensor Sequential::infer(const Tensor& x) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = layer->infer(h);
  return h;
}

Tensor Sequential::forward(const Tensor& x, std::vector<LayerCache>& caches) {
  caches.assign(layers_.size(), LayerCache{});
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) h = layers_[i]->forward(h, caches[i]);
  return h;
}

Tensor Sequential::backward(const Tensor& grad, const std::vector<LayerCache>& caches) {
  Tensor g = grad;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, caches[i]);
  return g;
}

void Sequential::collect_parameters(std::vector<Parameter*>& out) {
  for (auto& layer : layers_) layer->collect_parameters(out);
}

void Sequential::collect_buffers(std::vector<Buffer*>& out) {
  for (auto& layer : layers_) layer->collect_buffers(out);
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
