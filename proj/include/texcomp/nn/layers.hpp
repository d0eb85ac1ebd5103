#pragma once

#include "texcomp/nn/tensor.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {

// What a layer keeps from a training-mode forward pass for its backward pass.
struct LayerCache {
  Tensor input;
  Tensor output;
  Tensor aux;
  std::vector<Real> stats;
  std::vector<std::int64_t> index;
};

// infer() is evaluation mode and const, so it may run concurrently.
// forward() is training mode; backward() accumulates into Parameter::grad and
// returns the gradient with respect to the layer input.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Tensor infer(const Tensor& x) const = 0;
  virtual Tensor forward(const Tensor& x, LayerCache& cache);
  virtual Tensor backward(const Tensor& grad, const LayerCache& cache) = 0;
  virtual void collect_parameters(std::vector<Parameter*>&) {}
  virtual void collect_buffers(std::vector<Buffer*>&) {}
};

// PyTorch-style default: uniform in +-1/sqrt(fan_in) for weights and biases.
void init_uniform(Tensor& t, Real bound, std::mt19937_64& rng);

// 3x3x3 convolution, stride 1, zero padding 1, on (B, C, D, H, W).
class Conv3d final : public Layer {
 public:
  Conv3d(const std::string& name, int in_channels, int out_channels, std::mt19937_64& rng);
  std::string kind() const override { return "conv3d"; }
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
  void collect_parameters(std::vector<Parameter*>& out) override;

  Parameter weight;  // (out, in * 27)
  Parameter bias;    // (out)
  int in_channels;
  int out_channels;
};

// Per-channel normalization over batch and all spatial positions.
class BatchNorm final : public Layer {
 public:
  BatchNorm(const std::string& name, int channels);
  std::string kind() const override { return "batchnorm"; }
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x, LayerCache& cache) override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  void collect_buffers(std::vector<Buffer*>& out) override;

  static constexpr Real kMomentum = Real(0.1);
  static constexpr Real kEpsilon = Real(1e-5);
  Parameter gamma;
  Parameter beta;
  Buffer running_mean;
  Buffer running_var;
  int channels;
};

class ReLU final : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
};

class LeakyReLU final : public Layer {
 public:
  explicit LeakyReLU(Real slope) : slope(slope) {}
  std::string kind() const override { return "leaky_relu"; }
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
  Real slope;
};

// 2x2x2 max pooling with stride 2; odd trailing planes are dropped.
class MaxPool3d final : public Layer {
 public:
  std::string kind() const override { return "maxpool3d"; }
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x, LayerCache& cache) override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
};

// Pointwise affine map on (P, in) -> (P, out); a 1x1 one-dimensional conv.
class Linear final : public Layer {
 public:
  Linear(const std::string& name, int in_features, int out_features, std::mt19937_64& rng);
  std::string kind() const override { return "linear"; }
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
  void collect_parameters(std::vector<Parameter*>& out) override;

  Parameter weight;  // (out, in)
  Parameter bias;    // (out)
  int in_features;
  int out_features;
};

// Square-kernel 2D convolution with zero padding kernel/2 on (B, C, H, W).
class Conv2d final : public Layer {
 public:
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
         std::mt19937_64& rng);
  std::string kind() const override { return "conv2d"; }
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
  void collect_parameters(std::vector<Parameter*>& out) override;

  Parameter weight;  // (out, in * k * k)
  Parameter bias;
  int in_channels;
  int out_channels;
  int kernel;
  int stride;
};

class MaxPool2d final : public Layer {
 public:
  std::string kind() const override { return "maxpool2d"; }
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x, LayerCache& cache) override;
  Tensor backward(const Tensor& grad, const LayerCache& cache) override;
};

// Nearest-neighbor 2x upsampling of (B, C, H, W).
Tensor upsample2x(const Tensor& x);
Tensor upsample2x_backward(const Tensor& grad);

// 2D convolution building blocks shared with the masked convolutions.
int conv_output_size(int size, int kernel, int stride);
// One image (C, H, W) -> (C*k*k, Ho*Wo).
void im2col2d(const Real* image, int channels, int height, int width, int kernel, int stride,
              Real* columns);
void col2im2d(const Real* columns, int channels, int height, int width, int kernel, int stride,
              Real* image);
// Without bias; x is (B, C, H, W), weight (out, C*k*k).
Tensor conv2d_apply(const Tensor& x, const Tensor& weight, int kernel, int stride);
// Accumulates the weight gradient and returns the input gradient.
Tensor conv2d_backprop(const Tensor& x, const Tensor& weight, const Tensor& grad_out, int kernel,
                       int stride, Tensor& weight_grad);

class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const { return layers_.size(); }
  Layer& operator[](std::size_t i) { return *layers_[i]; }

  Tensor infer(const Tensor& x) const;
  Tensor forward(const Tensor& x, std::vector<LayerCache>& caches);
  Tensor backward(const Tensor& grad, const std::vector<LayerCache>& caches);
  void collect_parameters(std::vector<Parameter*>& out);
  void collect_buffers(std::vector<Buffer*>& out);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
