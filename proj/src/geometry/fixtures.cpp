#include "texcomp/geometry/fixtures.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/raster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace texcomp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUvMargin = 0.01;

using SurfaceFn = std::function<Vec3(double u, double v)>;

enum class Topology { poles, torus };

// Grid over (u, v) in [0,1]^2, periodic in u. With poles, v = 0 and v = 1
// collapse to single vertices; the torus topology is periodic in v as well.
// Triangles are wound so that d/du x d/dv is the outward normal.
TexturedMesh parametric_mesh(int cols, int rows, Topology topology, const SurfaceFn& surface) {
  TexturedMesh mesh;
  auto uv_of = [](double u, double v) {
    return Vec2(kUvMargin + (1 - 2 * kUvMargin) * u, kUvMargin + (1 - 2 * kUvMargin) * v);
  };
  std::function<int(int, int)> index;
  if (topology == Topology::poles) {
    mesh.vertices.push_back(surface(0.0, 0.0));
    for (int r = 1; r < rows; ++r)
      for (int c = 0; c < cols; ++c) mesh.vertices.push_back(surface(double(c) / cols, double(r) / rows));
    mesh.vertices.push_back(surface(0.0, 1.0));
    const int top = int(mesh.vertices.size()) - 1;
    index = [cols, rows, top](int r, int c) {
      if (r == 0) return 0;
      if (r == rows) return top;
      return 1 + (r - 1) * cols + c % cols;
    };
  } else {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) mesh.vertices.push_back(surface(double(c) / cols, double(r) / rows));
    index = [cols, rows](int r, int c) { return (r % rows) * cols + c % cols; };
  }

  // `cell` is the column of the quad; pole apexes sit over its middle.
  auto add = [&](int cell, std::array<std::pair<int, int>, 3> corners) {
    Triangle t{};
    for (int k = 0; k < 3; ++k) {
      auto [r, c] = corners[k];
      t[k] = index(r, c);
      const bool apex = topology == Topology::poles && (r == 0 || r == rows);
      const double u = apex ? (cell + 0.5) / cols : double(c) / cols;
      mesh.uvs.push_back(uv_of(u, double(r) / rows));
    }
    mesh.triangles.push_back(t);
  };

  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (topology == Topology::poles && r == 0) {
        add(c, {{{0, c}, {1, c + 1}, {1, c}}});
      } else if (topology == Topology::poles && r == rows - 1) {
        add(c, {{{r, c}, {r, c + 1}, {rows, c}}});
      } else {
        add(c, {{{r, c}, {r, c + 1}, {r + 1, c + 1}}});
        add(c, {{{r, c}, {r + 1, c + 1}, {r + 1, c}}});
      }
    }
  return mesh;
}

TexturedMesh make_box(const Vec3& half, int cells) {
  TexturedMesh mesh;
  std::map<std::array<int, 3>, int> welded;
  auto vertex = [&](std::array<int, 3> lattice) {
    auto [it, inserted] = welded.try_emplace(lattice, int(mesh.vertices.size()));
    if (inserted) {
      Vec3 p;
      for (int a = 0; a < 3; ++a) p[a] = -half[a] + 2.0 * half[a] * lattice[a] / cells;
      mesh.vertices.push_back(p);
    }
    return it->second;
  };
  int face = 0;
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side, ++face) {
      // (u, v) runs over the two other axes so that u x v = +axis; swap for
      // the negative side.
      int u = (axis + 1) % 3, v = (axis + 2) % 3;
      if (!side) std::swap(u, v);
      const Vec2 origin((face % 3) / 3.0, (face / 3) / 2.0);
      const Vec2 size(1.0 / 3.0, 1.0 / 2.0);
      auto lattice = [&](int i, int j) {
        std::array<int, 3> l{};
        l[axis] = side ? cells : 0;
        l[u] = i;
        l[v] = j;
        return l;
      };
      auto uv = [&](int i, int j) {
        const double m = 0.04;
        return Vec2(origin.x() + size.x() * (m + (1 - 2 * m) * double(i) / cells),
                    origin.y() + size.y() * (m + (1 - 2 * m) * double(j) / cells));
      };
      for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j) {
          const std::array<std::pair<int, int>, 4> q{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
          for (const auto& tri : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}}) {
            Triangle t{};
            for (int k = 0; k < 3; ++k) {
              const auto [a, b] = q[tri[k]];
              t[k] = vertex(lattice(a, b));
              mesh.uvs.push_back(uv(a, b));
            }
            mesh.triangles.push_back(t);
          }
        }
    }
  return mesh;
}

Rgb pattern_color(const FixtureOptions& o, const Vec3& p) {
  auto cell_index = [&](double x) { return long(std::floor((x + 0.5) / o.cell)); };
  switch (o.pattern) {
    case FixturePattern::solid:
      return o.color_a;
    case FixturePattern::checker:
      return ((cell_index(p.x()) + cell_index(p.y()) + cell_index(p.z())) & 1) ? o.color_b : o.color_a;
    case FixturePattern::stripes:
      return (cell_index(p.z()) & 1) ? o.color_b : o.color_a;
    case FixturePattern::gradient: {
      const double t = std::clamp(p.z() + 0.5, 0.0, 1.0);
      return (1 - t) * o.color_a + t * o.color_b;
    }
  }
  return o.color_a;
}

}  // namespace

TexturedMesh make_uv_sphere(int slices, int stacks, double radius) {
  return parametric_mesh(slices, stacks, Topology::poles, [radius](double u, double v) {
    const double phi = 2 * kPi * u, theta = kPi * v;
    return Vec3(radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
                -radius * std::cos(theta));
  });
}

TexturedMesh make_plane(int cells, double half) {
  TexturedMesh mesh;
  for (int j = 0; j <= cells; ++j)
    for (int i = 0; i <= cells; ++i)
      mesh.vertices.emplace_back(-half + 2 * half * i / cells, -half + 2 * half * j / cells, 0.0);
  auto id = [cells](int i, int j) { return j * (cells + 1) + i; };
  auto uv = [cells](int i, int j) {
    return Vec2(kUvMargin + (1 - 2 * kUvMargin) * double(i) / cells,
                kUvMargin + (1 - 2 * kUvMargin) * double(j) / cells);
  };
  for (int j = 0; j < cells; ++j)
    for (int i = 0; i < cells; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      for (auto [a, b] : {std::pair{i, j}, {i + 1, j}, {i + 1, j + 1}}) mesh.uvs.push_back(uv(a, b));
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      for (auto [a, b] : {std::pair{i, j}, {i + 1, j + 1}, {i, j + 1}}) mesh.uvs.push_back(uv(a, b));
    }
  return mesh;
}

void bake_atlas(TexturedMesh& mesh, int size, const std::function<Rgb(const Vec3&)>& color) {
  mesh.atlas = Image(size, size, 3, 0.0f);
  std::vector<std::uint8_t> covered(std::size_t(size) * size, 0);
  rasterize_uv(mesh, size, size, [&](int x, int y, int face, const Vec3& bary) {
    mesh.atlas.set_rgb(x, y, color(interpolate_position(mesh, face, bary)));
    covered[std::size_t(y) * size + x] = 1;
  });
  dilate_atlas(mesh.atlas, covered, 4);
}

Fixture make_fixture(const FixtureOptions& o) {
  Fixture fx;
  const int n = std::max(o.tessellation, 4);
  switch (o.shape) {
    case FixtureShape::sphere: {
      const double r = 0.45;
      fx.name = "sphere";
      fx.mesh = make_uv_sphere(n, n - 3, r);
      fx.inside = [r](const Vec3& p) { return p.norm() <= r; };
      break;
    }
    case FixtureShape::ellipsoid: {
      const Vec3 radii(0.45, 0.32, 0.28);
      fx.name = "ellipsoid";
      fx.mesh = make_uv_sphere(n, n - 3, 1.0);
      for (Vec3& v : fx.mesh.vertices) v = v.cwiseProduct(radii);
      fx.inside = [radii](const Vec3& p) { return p.cwiseQuotient(radii).squaredNorm() <= 1.0; };
      break;
    }
    case FixtureShape::capsule: {
      const double r = 0.2, h = 0.25;
      fx.name = "capsule";
      const double arc = 0.5 * kPi * r, length = 2 * arc + 2 * h;
      fx.mesh = parametric_mesh(n, n, Topology::poles, [=](double u, double v) {
        const double s = v * length, phi = 2 * kPi * u;
        double rho, z;
        if (s < arc) {
          const double theta = s / r;
          rho = r * std::sin(theta);
          z = -h - r * std::cos(theta);
        } else if (s < arc + 2 * h) {
          rho = r;
          z = -h + (s - arc);
        } else {
          const double theta = (s - arc - 2 * h) / r;
          rho = r * std::cos(theta);
          z = h + r * std::sin(theta);
        }
        return Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
      });
      fx.inside = [=](const Vec3& p) {
        const double z = std::clamp(p.z(), -h, h);
        return (p - Vec3(0, 0, z)).norm() <= r;
      };
      break;
    }
    case FixtureShape::box: {
      const Vec3 half(0.45, 0.3, 0.35);
      fx.name = "box";
      fx.mesh = make_box(half, std::max(2, n / 3));
      fx.inside = [half](const Vec3& p) { return (p.cwiseAbs().array() <= half.array()).all(); };
      break;
    }
    case FixtureShape::torus: {
      const double big = 0.3, small = 0.15;
      fx.name = "torus";
      fx.mesh = parametric_mesh(n + n / 3, std::max(8, n / 2), Topology::torus, [=](double u, double v) {
        const double phi = 2 * kPi * u, psi = 2 * kPi * v;
        return Vec3((big + small * std::cos(psi)) * std::cos(phi),
                    (big + small * std::cos(psi)) * std::sin(phi), small * std::sin(psi));
      });
      fx.inside = [=](const Vec3& p) {
        const double q = std::hypot(p.x(), p.y()) - big;
        return q * q + p.z() * p.z() <= small * small;
      };
      break;
    }
    case FixtureShape::plane: {
      fx.name = "plane";
      fx.mesh = make_plane(n, 0.45);
      fx.inside = [](const Vec3&) { return false; };
      break;
    }
  }
  fx.color = [o](const Vec3& p) { return pattern_color(o, p); };
  bake_atlas(fx.mesh, o.atlas_size, fx.color);
  fx.mesh.validate();
  return fx;
}

std::vector<std::string> standard_fixture_names() {
  return {"sphere", "box", "capsule", "ellipsoid", "torus"};
}

Fixture fixture_by_name(const std::string& name, int atlas_size) {
  FixtureOptions o;
  o.atlas_size = atlas_size;
  if (name == "sphere") {
    o.shape = FixtureShape::sphere;
    o.pattern = FixturePattern::stripes;
    o.tessellation = 24;
  } else if (name == "box") {
    o.shape = FixtureShape::box;
    o.pattern = FixturePattern::checker;
    o.color_a = {0.9, 0.8, 0.3};
    o.color_b = {0.25, 0.6, 0.3};
    o.cell = 0.45;
  } else if (name == "capsule") {
    o.shape = FixtureShape::capsule;
    o.pattern = FixturePattern::gradient;
    o.color_a = {0.9, 0.6, 0.45};
    o.color_b = {0.3, 0.25, 0.7};
  } else if (name == "ellipsoid") {
    o.shape = FixtureShape::ellipsoid;
    o.pattern = FixturePattern::checker;
    o.color_a = {0.8, 0.7, 0.6};
    o.color_b = {0.35, 0.2, 0.15};
    o.cell = 0.45;
  } else if (name == "torus") {
    o.shape = FixtureShape::torus;
    o.pattern = FixturePattern::solid;
    o.color_a = {0.3, 0.75, 0.7};
  } else if (name == "plane") {
    o.shape = FixtureShape::plane;
    o.tessellation = 200;
  } else {
    throw Error(Errc::invalid_argument, "unknown fixture '" + name + "'");
  }
  return make_fixture(o);
}

std::vector<Fixture> standard_fixtures(int atlas_size) {
  std::vector<Fixture> out;
  for (const auto& name : standard_fixture_names()) out.push_back(fixture_by_name(name, atlas_size));
  return out;
}

}  // namespace texcomp
