#include "texcomp/nn/tensor.hpp"

#include "texcomp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= std::size_t(d);
  return shape.empty() ? 0 : n;
}

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? ", " : "") + std::to_string(shape[i]);
  return s + ")";
}

Tensor::Tensor(std::vector<int> s, Real fill) : shape(std::move(s)), data(shape_numel(shape), fill) {}

void Tensor::fill(Real v) { std::fill(data.begin(), data.end(), v); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape != shape)
    throw Error(Errc::invalid_argument,
                "tensor shape mismatch " + shape_string(shape) + " vs " + shape_string(other.shape));
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += other.data[i];
  return *this;
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](Real v) { return std::isfinite(v); });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || a.rank() != b.rank() || a.dim(0) != b.dim(0) ||
      !std::equal(a.shape.begin() + 2, a.shape.end(), b.shape.begin() + 2))
    throw Error(Errc::invalid_argument,
                "cannot concatenate " + shape_string(a.shape) + " and " + shape_string(b.shape));
  std::vector<int> shape = a.shape;
  shape[1] += b.dim(1);
  Tensor out(shape);
  const std::size_t sa = a.stride0(), sb = b.stride0();
  for (int n = 0; n < a.dim(0); ++n) {
    std::memcpy(out.ptr() + n * (sa + sb), a.ptr() + n * sa, sa * sizeof(Real));
    std::memcpy(out.ptr() + n * (sa + sb) + sa, b.ptr() + n * sb, sb * sizeof(Real));
  }
  return out;
}

void split_channels(const Tensor& joined, int channels_a, Tensor& a, Tensor& b) {
  std::vector<int> sa = joined.shape, sb = joined.shape;
  sa[1] = channels_a;
  sb[1] = joined.dim(1) - channels_a;
  a = Tensor(sa);
  b = Tensor(sb);
  const std::size_t na = a.stride0(), nb = b.stride0();
  for (int n = 0; n < joined.dim(0); ++n) {
    std::memcpy(a.ptr() + n * na, joined.ptr() + n * (na + nb), na * sizeof(Real));
    std::memcpy(b.ptr() + n * nb, joined.ptr() + n * (na + nb) + na, nb * sizeof(Real));
  }
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
