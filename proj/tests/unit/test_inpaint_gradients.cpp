// Finite-difference checks of the inpainting backward passes (double build).
#include "gradcheck.hpp"

#include "texcomp/texture/inpaint_loss.hpp"
#include "texcomp/texture/inpaint_net.hpp"

#include <doctest.h>

static_assert(std::is_same_v<texcomp::nn::Real, double>, "gradient checks need the double build");

using namespace texcomp;
using namespace texcomp::nn;

namespace {

constexpr double kStep = 1e-6;
constexpr double kTolerance = 1e-4;

Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (Real& v : t.data) v = u(rng);
  return t;
}

Tensor random_mask(std::vector<int> shape, std::mt19937_64& rng, double p) {
  Tensor t(std::move(shape));
  std::bernoulli_distribution b(p);
  for (Real& v : t.data) v = b(rng);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a.data[i] * b.data[i];
  return s;
}

}  // namespace

TEST_CASE("masked convolution gradients for input, weights and bias") {
  std::mt19937_64 rng(1);
  for (int stride : {1, 2}) {
    CAPTURE(stride);
    PartialConv2d layer("p", 3, 4, 3, stride, true, rng);
    Tensor x = random_tensor({2, 3, 8, 6}, rng);
    const Tensor m = random_mask(x.shape, rng, 0.3);
    PartialConvCache cache;
    const auto [y, ym] = layer.forward(x, m, &cache);
    const Tensor r = random_tensor(y.shape, rng);
    layer.weight.zero_grad();
    layer.bias.zero_grad();
    const Tensor dx = layer.backward(r, cache);
    auto loss = [&] { return dot(r, layer.forward(x, m, nullptr).first); };
    CHECK(test::finite_difference_check(x.data, dx.data, loss, 80, kStep, kTolerance, rng).pass_fraction() == 1.0);
    CHECK(test::finite_difference_check(layer.weight.value.data, layer.weight.grad.data, loss, 80, kStep, kTolerance,
                                        rng)
              .pass_fraction() == 1.0);
    CHECK(test::finite_difference_check(layer.bias.value.data, layer.bias.grad.data, loss, 4, kStep, kTolerance, rng)
              .pass_fraction() == 1.0);
  }
}

TEST_CASE("inpainting network parameter gradients, masked and plain") {
  for (bool partial : {true, false}) {
    CAPTURE(partial);
    std::mt19937_64 rng(2);
    InpaintNet net({.resolution = 64, .base_channels = 2, .partial = partial}, 3);
    const Tensor image = random_tensor({1, 3, 64, 64}, rng, 0, 1);
    const Tensor mask = random_mask({1, 1, 64, 64}, rng, 0.6);
    Tensor bg({1, 1, 64, 64}, 1);
    for (int y = 0; y < 64; ++y)
      for (int x = 50; x < 64; ++x) bg.data[std::size_t(y) * 64 + x] = 0;
    InpaintCache cache;
    const Tensor out = net.forward(image, mask, bg, cache);
    const Tensor r = random_tensor(out.shape, rng);
    for (Parameter* p : net.parameters()) p->zero_grad();
    net.backward(r, cache);
    auto loss = [&] { return dot(r, net.infer(image, mask, bg)); };
    for (Parameter* p : net.parameters()) {
      CAPTURE(p->name);
      const test::GradCheckResult res =
          test::finite_difference_check(p->value.data, p->grad.data, loss, 20, kStep, kTolerance, rng);
      CHECK(res.pass_fraction() == 1.0);
    }
  }
}

TEST_CASE("inpainting loss gradient with respect to the output") {
  std::mt19937_64 rng(4);
  FeatureExtractor extractor(9);
  Tensor out = random_tensor({2, 3, 16, 16}, rng, 0, 1);
  const Tensor gt = random_tensor(out.shape, rng, 0, 1);
  const Tensor m = random_mask({2, 1, 16, 16}, rng, 0.5);
  const Tensor mb = random_mask({2, 1, 16, 16}, rng, 0.9);
  Tensor grad;
  inpaint_loss(out, gt, m, mb, {}, extractor, &grad);
  auto loss = [&] { return inpaint_loss(out, gt, m, mb, {}, extractor, nullptr).total; };
  const test::GradCheckResult res = test::finite_difference_check(out.data, grad.data, loss, 300, kStep, kTolerance, rng);
  MESSAGE("loss gradient worst relative error " << res.worst);
  CHECK(res.pass_fraction() >= 0.99);
}
