#pragma once

#include "texcomp/nn/precision.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {

// Storage is aligned to the widest vector width so that Eigen kernels take
// the same code path, and produce the same rounding, for every allocation.
using Storage = std::vector<Real, Eigen::aligned_allocator<Real>>;

// Dense row-major tensor. Volumes are (batch, channels, depth, height, width),
// images (batch, channels, height, width), point features (points, features).
struct Tensor {
  std::vector<int> shape;
  Storage data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, Real fill = 0);

  std::size_t numel() const { return data.size(); }
  int dim(int i) const { return shape[i]; }
  int rank() const { return int(shape.size()); }
  bool empty() const { return data.empty(); }
  Real* ptr() { return data.data(); }
  const Real* ptr() const { return data.data(); }
  // Elements per leading index: the product of shape[1..].
  std::size_t stride0() const { return shape.empty() ? 0 : numel() / std::size_t(shape[0]); }

  void fill(Real v);
  Tensor& operator+=(const Tensor& other);
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
};

std::size_t shape_numel(const std::vector<int>& shape);
std::string shape_string(const std::vector<int>& shape);

using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

inline MatrixMap as_matrix(Tensor& t, int rows, int cols) { return MatrixMap(t.ptr(), rows, cols); }
inline ConstMatrixMap as_matrix(const Tensor& t, int rows, int cols) {
  return ConstMatrixMap(t.ptr(), rows, cols);
}

// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<int> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}
  void zero_grad() { grad.fill(0); }
};

// Non-trainable persistent state (batch-norm running statistics).
struct Buffer {
  std::string name;
  Tensor value;
};

// Concatenates along dimension 1 of equally shaped leading/trailing dims.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& joined, int channels_a, Tensor& a, Tensor& b);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
