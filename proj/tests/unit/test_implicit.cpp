#include "test_support.hpp"

#include "texcomp/error.hpp"
#include "texcomp/implicit/joint_model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace texcomp;
using nn::Real;
using nn::Tensor;

namespace {

ModelConfig tiny_config(int n = 16) {
  ModelConfig c;
  c.resolution = n;
  c.shape_base_channels = 2;
  c.texture_base_channels = 2;
  c.shape_decoder_widths = {16, 8, 8};
  c.texture_decoder_widths = {16, 8, 8};
  return c;
}

// Independent trilinear oracle: tent-function weights summed over every node.
double tent_sample(const Tensor& level, int b, int c, const Vec3& p) {
  const int k = level.dim(2);
  double u[3];
  for (int a = 0; a < 3; ++a) u[a] = std::clamp((p[a] + 0.5) * k - 0.5, 0.0, double(k - 1));
  double sum = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l) {
        const double w = std::max(0.0, 1 - std::abs(u[0] - i)) * std::max(0.0, 1 - std::abs(u[1] - j)) *
                         std::max(0.0, 1 - std::abs(u[2] - l));
        if (w > 0) sum += w * level.data[((((std::size_t(b) * level.dim(1) + c) * k + i) * k + j) * k) + l];
      }
  return sum;
}

}  // namespace

TEST_CASE("default schedule taps: resolutions halve and channels follow the layer list") {
  for (int n : {32, 64, 128}) {
    EncoderConfig shape{n, 1, 16};
    PyramidLayout l = pyramid_layout(shape);
    CHECK(l.resolutions == std::vector<int>{n, n, n / 2, n / 4, n / 8, n / 16});
    CHECK(l.channels == std::vector<int>{1, 16, 32, 64, 128, 128});
    CHECK(l.feature_length() == 7 * (1 + 16 + 32 + 64 + 128 + 128));
    EncoderConfig tex{n, 3, 16};
    CHECK(pyramid_layout(tex).channels == std::vector<int>{3, 16, 32, 64, 128, 128});
  }
  ModelConfig full_scale;
  JointModel model(full_scale, 1);
  // Decoder input: point, shape features, texture features, 7 taps each.
  CHECK(model.texture_decoder_inputs() == 3 + 7 * 369 + 7 * 371);
  CHECK(model.shape_decoder_inputs() == 3 + 7 * 369);
}

TEST_CASE("encoders produce finite pyramids at desk scale") {
  ModelConfig c;
  c.resolution = 32;
  c.shape_decoder_widths = {32, 16, 16};
  c.texture_decoder_widths = {32, 16, 16};
  JointModel model(c, 3);
  Pyramid s = model.encode_shape(Tensor({1, 1, 32, 32, 32}, 0));
  Pyramid t = model.encode_texture(Tensor({1, 3, 32, 32, 32}, -1));
  REQUIRE(s.size() == 6);
  const std::vector<int> res{32, 32, 16, 8, 4, 2}, ch{1, 16, 32, 64, 128, 128};
  for (int i = 0; i < 6; ++i) {
    CHECK(s[i].dim(2) == res[i]);
    CHECK(s[i].dim(1) == ch[i]);
    CHECK(s[i].all_finite());
    CHECK(t[i].all_finite());
  }
  CHECK(t[0].dim(1) == 3);
  try {
    model.encode_shape(Tensor({1, 1, 16, 16, 16}));
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::resolution_mismatch);
  }
}

TEST_CASE("encoding a batch of two is permutation equivariant") {
  JointModel model(tiny_config(), 4);
  std::mt19937_64 rng(1);
  Tensor a({1, 3, 16, 16, 16}), b({1, 3, 16, 16, 16});
  std::uniform_real_distribution<double> u(0, 1);
  for (Real& v : a.data) v = Real(u(rng));
  for (Real& v : b.data) v = Real(u(rng) > 0.7 ? u(rng) : -1);
  Pyramid ab = model.encode_texture(stack_batch({a, b}));
  Pyramid ba = model.encode_texture(stack_batch({b, a}));
  for (std::size_t l = 0; l < ab.size(); ++l) {
    const std::size_t half = ab[l].numel() / 2;
    REQUIRE(std::equal(ab[l].data.begin(), ab[l].data.begin() + half, ba[l].data.begin() + half));
  }
}

TEST_CASE("grid sampling examples") {
  Pyramid constant{Tensor({1, 2, 4, 4, 4}, Real(0.75))};
  Tensor pts({1, 3, 3});
  pts.data = {0.1f, -0.3f, 0.45f, -0.5f, 0.5f, 0.0f, 0.49f, 0.2f, -0.2f};
  Tensor f = grid_sample_features(constant, pts, 0.0722);
  for (Real v : f.data) REQUIRE(v == doctest::Approx(0.75));

  // Linear ramp along x: halfway between two nodes gives their mean.
  Tensor ramp({1, 1, 4, 4, 4});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 16; ++j) ramp.data[i * 16 + j] = Real(3 * i + 1);
  Tensor mid({1, 1, 3});
  mid.data = {Real(-0.5 + 2.0 / 4), 0.1f, -0.1f};  // between nodes 1 and 2
  CHECK(grid_sample_features({ramp}, mid, 0.0).data[0] == doctest::Approx((4.0 + 7.0) / 2));

  // Exact node with zero displacement returns the node's features.
  std::mt19937_64 rng(3);
  Tensor level({1, 3, 5, 5, 5});
  for (Real& v : level.data) v = Real(std::uniform_real_distribution<double>(-1, 1)(rng));
  Tensor node({1, 1, 3});
  node.data = {Real(-0.5 + 1.5 / 5), Real(-0.5 + 3.5 / 5), Real(-0.5 + 0.5 / 5)};
  Tensor g = grid_sample_features({level}, node, 0.0);
  for (int c = 0; c < 3; ++c) CHECK(g.data[c] == doctest::Approx(level.data[((c * 5 + 1) * 5 + 3) * 5 + 0]).epsilon(1e-6));
  CHECK_THROWS_AS(grid_sample_features({}, node, 0.0), Error);
}

TEST_CASE("property: grid sampling matches the tent-function oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5), val(-2, 2);
  double worst = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Pyramid pyr;
    const int levels = 1 + int(rng() % 3);
    for (int l = 0; l < levels; ++l) {
      const int k = 1 << (rng() % 4);
      Tensor t({2, 1 + int(rng() % 3), k, k, k});
      for (Real& v : t.data) v = Real(val(rng));
      pyr.push_back(t);
    }
    Tensor pts({2, 4, 3});
    for (Real& v : pts.data) v = Real(u(rng));
    const double delta = 0.0722;
    Tensor f = grid_sample_features(pyr, pts, delta);
    const Vec3 offsets[7] = {{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int b = 0; b < 2; ++b)
      for (int q = 0; q < 4; ++q) {
        const Vec3 p(pts.data[(b * 4 + q) * 3], pts.data[(b * 4 + q) * 3 + 1], pts.data[(b * 4 + q) * 3 + 2]);
        int col = 0;
        for (const Tensor& level : pyr)
          for (const Vec3& o : offsets)
            for (int c = 0; c < level.dim(1); ++c, ++col)
              worst = std::max(worst, std::abs(tent_sample(level, b, c, p + delta * o) - f.data[(b * 4 + q) * f.dim(1) + col]));
      }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("decoders are pointwise") {
  JointModel model(tiny_config(), 5);
  Pyramid s = model.encode_shape(Tensor({1, 1, 16, 16, 16}, 0));
  Pyramid t = model.encode_texture(Tensor({1, 3, 16, 16, 16}, -1));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50000; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  Tensor logits = model.decode_shape(s, point_tensor(pts));
  CHECK(logits.shape == std::vector<int>{50000, 1});

  std::vector<Vec3> dup{pts[0], pts[1], pts[0], pts[1]};
  Tensor d = model.decode_shape(s, point_tensor(dup));
  CHECK(d.data[0] == d.data[2]);
  CHECK(d.data[1] == d.data[3]);

  std::vector<Vec3> perm{pts[3], pts[1], pts[2], pts[0]}, orig{pts[0], pts[1], pts[2], pts[3]};
  Tensor a = model.decode_texture(s, t, point_tensor(orig)), b = model.decode_texture(s, t, point_tensor(perm));
  for (int c = 0; c < 3; ++c) {
    CHECK(a.data[c] == b.data[9 + c]);
    CHECK(a.data[3 + c] == b.data[3 + c]);
  }
}

TEST_CASE("zero weights and a 0.5 bias give gray everywhere") {
  JointModel model(tiny_config(), 6);
  for (nn::Parameter* p : model.parameters()) {
    if (p->name.rfind("texture_decoder", 0) != 0) continue;
    p->value.fill(0);
    if (p->name == "texture_decoder.fc3.bias") p->value.fill(Real(0.5));
  }
  Pyramid s = model.encode_shape(Tensor({1, 1, 16, 16, 16}, 0));
  Pyramid t = model.encode_texture(Tensor({1, 3, 16, 16, 16}, -1));
  std::vector<Vec3> pts{{0, 0, 0}, {0.4, -0.2, 0.1}};
  for (Real v : model.decode_texture(s, t, point_tensor(pts)).data) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("model checkpoints restore identical predictions and reject other configs") {
  auto dir = test::scratch_dir("model");
  JointModel model(tiny_config(), 7);
  model.trained_steps = 3;
  model.save(dir / "m.ckpt");
  const ModelConfig cfg = tiny_config();
  JointModel back = JointModel::load(dir / "m.ckpt", &cfg);
  CHECK(back.trained_steps == 3);
  Tensor occ({1, 1, 16, 16, 16}, 1);
  std::vector<Vec3> pts{{0.1, 0.2, 0.3}};
  CHECK(model.decode_shape(model.encode_shape(occ), point_tensor(pts)).data ==
        back.decode_shape(back.encode_shape(occ), point_tensor(pts)).data);
  ModelConfig other = tiny_config();
  other.shape_decoder_widths = {8, 8, 8};
  try {
    JointModel::load(dir / "m.ckpt", &other);
    FAIL("expected a config mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config_mismatch);
  }
}

TEST_CASE("disabling fusion zeroes the shape features seen by the texture decoder") {
  ModelConfig on = tiny_config(), off = tiny_config();
  off.fusion = false;
  JointModel a(on, 8), b(off, 8);
  std::mt19937_64 rng(4);
  Tensor occ({1, 1, 16, 16, 16});
  for (Real& v : occ.data) v = Real(rng() % 2);
  Tensor col({1, 3, 16, 16, 16}, Real(0.3));
  std::vector<Vec3> pts{{0.1, 0.0, -0.2}};
  const Tensor ca = a.decode_texture(a.encode_shape(occ), a.encode_texture(col), point_tensor(pts));
  const Tensor cb = b.decode_texture(b.encode_shape(occ), b.encode_texture(col), point_tensor(pts));
  const Tensor cz = b.decode_texture(b.encode_shape(Tensor({1, 1, 16, 16, 16})), b.encode_texture(col), point_tensor(pts));
  CHECK(ca.data != cb.data);
  CHECK(cb.data == cz.data);  // shape input no longer matters
}
