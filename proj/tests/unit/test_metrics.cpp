#include "test_support.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/fixtures.hpp"
#include "texcomp/metrics/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace texcomp;

namespace {

template <typename F>
void expect_error(Errc code, F&& f) {
  try {
    f();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("identical meshes score exactly one everywhere") {
  for (const Fixture& fx : standard_fixtures(64)) {
    CAPTURE(fx.name);
    const ScoreReport r = evaluate_scan(fx.name, fx.mesh, fx.mesh, {.samples = 3000});
    CHECK(r.shape == 1.0);
    CHECK(r.texture == 1.0);
    CHECK(r.area == 1.0);
    CHECK(r.final == 1.0);
    CHECK(r.pred_to_gt.max <= 1e-12);
    CHECK(r.color.max <= 1e-6);
  }
}

TEST_CASE("parallel planes offset by d are d apart at every sample") {
  const TexturedMesh a = make_plane(8, 0.45);
  for (double d : {0.01, 0.03, 0.2}) {
    TexturedMesh b = a;
    for (Vec3& v : b.vertices) v.z() += d;
    const SurfaceSamples s = surface_distance_samples(a, b, 500, 2);
    REQUIRE(s.pred_to_gt.distances.size() == 500);
    REQUIRE(s.gt_to_pred.distances.size() == 500);
    for (double x : s.pred_to_gt.distances) CHECK(std::abs(x - d) <= 1e-12);
    for (double x : s.gt_to_pred.distances) CHECK(std::abs(x - d) <= 1e-12);
    CHECK(s.pred_to_gt.color_differences.empty());
  }
}

TEST_CASE("sample counts are honored in each direction") {
  const Fixture fx = fixture_by_name("box", 32);
  for (std::size_t n : {1u, 17u, 1000u}) {
    const SurfaceSamples s = surface_distance_samples(fx.mesh, fx.mesh, n, 0);
    CHECK(s.pred_to_gt.distances.size() == n);
    CHECK(s.gt_to_pred.distances.size() == n);
    CHECK(s.pred_to_gt.color_differences.size() == n);
  }
}

TEST_CASE("distance to score examples") {
  const std::vector<double> zeros(10, 0.0), at_d0(10, 0.05);
  CHECK(distance_to_score(zeros, 0.05) == 1.0);
  CHECK(distance_to_score(at_d0, 0.05) == 0.0);
  std::vector<double> half(10, 0.0);
  std::fill(half.begin() + 5, half.end(), 0.05);
  CHECK(distance_to_score(half, 0.05) == 0.5);
  CHECK(distance_to_score(std::vector<double>{1e-10}, 0.05, kDistanceSnap) == 1.0);
  CHECK(distance_to_score(std::vector<double>{0.5}, 0.05) == 0.0);
  expect_error(Errc::invalid_argument, [&] { distance_to_score(zeros, 0.0); });
}

TEST_CASE("area score examples") {
  const Fixture fx = fixture_by_name("sphere", 32);
  CHECK(area_score(fx.mesh, fx.mesh) == 1.0);
  TexturedMesh big = fx.mesh;
  for (Vec3& v : big.vertices) v *= std::sqrt(2.0);
  CHECK(area_score(big, fx.mesh) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(area_score(TexturedMesh{}, fx.mesh) == 0.0);
}

TEST_CASE("final score examples") {
  CHECK(final_score(1, 1, 1) == 1.0);
  CHECK(final_score(0.7, 0.9, 0.0) == 0.0);
  CHECK(final_score(0.8, 0.6, 0.9) == doctest::Approx(0.63).epsilon(1e-12));
}

TEST_CASE("property: final score identity and monotonicity on random triples") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double s = u(rng), t = u(rng), a = u(rng), bump = u(rng) * 0.1;
    const double r = final_score(s, t, a);
    CHECK(std::abs(r - 0.5 * a * (s + t)) <= 1e-9);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(final_score(std::min(1.0, s + bump), t, a) >= r);
    CHECK(final_score(s, std::min(1.0, t + bump), a) >= r);
    CHECK(final_score(s, t, std::min(1.0, a + bump)) >= r);
  }
}

TEST_CASE("property: scores are symmetric under swapping and lie in [0, 1]") {
  std::mt19937_64 rng(5);
  const auto fixtures = standard_fixtures(64);
  for (int trial = 0; trial < 6; ++trial) {
    const Fixture& a = fixtures[rng() % fixtures.size()];
    Fixture b = fixtures[rng() % fixtures.size()];
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    const Vec3 shift(u(rng), u(rng), u(rng));
    for (Vec3& v : b.mesh.vertices) v += shift;
    const ScoreOptions opt{.samples = 1500, .seed = std::uint64_t(trial)};
    const ScoreReport ab = evaluate_scan("ab", a.mesh, b.mesh, opt);
    const ScoreReport ba = evaluate_scan("ba", b.mesh, a.mesh, opt);
    CHECK(ab.shape == doctest::Approx(ba.shape).epsilon(1e-12));
    CHECK(ab.texture == doctest::Approx(ba.texture).epsilon(1e-12));
    CHECK(ab.area == doctest::Approx(ba.area).epsilon(1e-12));
    for (double v : {ab.shape, ab.texture, ab.area, ab.final}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(ab.final == 0.5 * ab.area * (ab.shape + ab.texture));
  }
}

TEST_CASE("an empty prediction scores zero; mismatched frames are rejected") {
  const Fixture fx = fixture_by_name("capsule", 32);
  const ScoreReport r = evaluate_scan("empty", TexturedMesh{}, fx.mesh);
  CHECK(r.final == 0.0);
  CHECK(r.shape == 0.0);
  TexturedMesh far = fx.mesh;
  for (Vec3& v : far.vertices) v.x() += 1.5;
  expect_error(Errc::frame_mismatch, [&] { surface_distance_samples(far, fx.mesh, 10, 0); });
  expect_error(Errc::degenerate_mesh, [&] { surface_distance_samples(TexturedMesh{}, fx.mesh, 10, 0); });
}

TEST_CASE("score reports round-trip and carry the mapping in the header") {
  std::vector<ScoreReport> reports;
  for (int i = 0; i < 3; ++i) {
    ScoreReport r;
    r.name = "scan" + std::to_string(i);
    r.shape = 0.5 + 0.1 * i;
    r.texture = 0.7;
    r.area = 0.9;
    r.final = final_score(r.shape, r.texture, r.area);
    r.samples_per_direction = 10;
    reports.push_back(r);
  }
  const auto dir = test::scratch_dir("scores");
  const ScoreOptions opt{.shape_d0 = 0.04};
  write_score_report(dir / "scores.jsonl", reports, opt);
  const auto back = read_score_report(dir / "scores.jsonl");
  REQUIRE(back.size() == 3);
  CHECK(back[2].shape == reports[2].shape);
  CHECK(back[1].final == reports[1].final);

  std::ifstream in(dir / "scores.jsonl");
  std::string header;
  std::getline(in, header);
  const auto j = nlohmann::json::parse(header);
  CHECK(j["header"]["shape_d0"] == 0.04);
  CHECK(j["header"]["texture_d0"] == 0.25);

  const ScoreAggregate a = aggregate(reports);
  CHECK(a.mean[0] == doctest::Approx(0.6));
  CHECK(a.stddev[0] == doctest::Approx(std::sqrt(0.02 / 3)));
  CHECK(a.stddev[1] <= 1e-12);
}
