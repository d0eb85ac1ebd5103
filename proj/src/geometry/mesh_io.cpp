#include "texcomp/geometry/mesh_io.hpp"

#include "texcomp/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

namespace texcomp {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view s, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::malformed_geometry,
                "bad number '" + std::string(s) + "' on line " + std::to_string(line_no));
  return v;
}

long parse_index(std::string_view s, int line_no) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
    throw Error(Errc::malformed_geometry,
                "bad index '" + std::string(s) + "' on line " + std::to_string(line_no));
  return v;
}

// OBJ indices are 1-based; negative values count back from the end.
int resolve(long idx, std::size_t count) {
  return idx > 0 ? int(idx - 1) : int(long(count) + idx);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double clamp_uv(double v, int line_no) {
  constexpr double tol = 1e-6;
  if (v < -tol || v > 1.0 + tol)
    throw Error(Errc::malformed_geometry,
                "uv outside [0,1] on line " + std::to_string(line_no));
  return std::clamp(v, 0.0, 1.0);
}

std::filesystem::path read_map_kd(const std::filesystem::path& mtl_path) {
  std::ifstream in(mtl_path);
  if (!in) throw Error(Errc::missing_atlas, "material file " + mtl_path.string());
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_ws(line);
    if (tokens.size() >= 2 && tokens[0] == "map_Kd")
      return mtl_path.parent_path() / std::string(tokens.back());
  }
  throw Error(Errc::missing_atlas, "no map_Kd in " + mtl_path.string());
}

}  // namespace

TexturedMesh load_textured_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, path.string());

  TexturedMesh mesh;
  std::vector<Vec2> tex_coords;
  std::vector<std::array<int, 3>> face_uv_indices;
  std::filesystem::path mtl_path;
  bool any_with_uv = false, any_without_uv = false, any_color = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    const std::string_view tag = tokens[0];
    if (tag == "v") {
      if (tokens.size() != 4 && tokens.size() != 7)
        throw Error(Errc::malformed_geometry, "vertex on line " + std::to_string(line_no));
      mesh.vertices.emplace_back(parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                                 parse_double(tokens[3], line_no));
      if (tokens.size() == 7) {
        any_color = true;
        mesh.vertex_colors.emplace_back(parse_double(tokens[4], line_no),
                                        parse_double(tokens[5], line_no),
                                        parse_double(tokens[6], line_no));
      } else {
        mesh.vertex_colors.emplace_back(Rgb::Zero());
      }
    } else if (tag == "vt") {
      if (tokens.size() < 3)
        throw Error(Errc::malformed_geometry, "uv on line " + std::to_string(line_no));
      tex_coords.emplace_back(clamp_uv(parse_double(tokens[1], line_no), line_no),
                              clamp_uv(parse_double(tokens[2], line_no), line_no));
    } else if (tag == "f") {
      if (tokens.size() < 4)
        throw Error(Errc::malformed_geometry, "face on line " + std::to_string(line_no));
      std::vector<int> vs, ts;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const std::string_view tok = tokens[i];
        const auto slash = tok.find('/');
        vs.push_back(resolve(parse_index(tok.substr(0, slash), line_no), mesh.vertices.size()));
        if (slash != std::string_view::npos) {
          const auto rest = tok.substr(slash + 1);
          const auto slash2 = rest.find('/');
          const auto vt = rest.substr(0, slash2);
          if (!vt.empty()) ts.push_back(resolve(parse_index(vt, line_no), tex_coords.size()));
        }
      }
      const bool has_uv = !ts.empty();
      if (has_uv && ts.size() != vs.size())
        throw Error(Errc::malformed_geometry, "partial uv indices on line " + std::to_string(line_no));
      (has_uv ? any_with_uv : any_without_uv) = true;
      for (std::size_t k = 1; k + 1 < vs.size(); ++k) {
        mesh.triangles.push_back({vs[0], vs[k], vs[k + 1]});
        if (has_uv) face_uv_indices.push_back({ts[0], ts[k], ts[k + 1]});
      }
    } else if (tag == "mtllib" && tokens.size() >= 2) {
      mtl_path = path.parent_path() / std::string(tokens[1]);
    }
  }

  if (any_with_uv && any_without_uv)
    throw Error(Errc::malformed_geometry, "some faces lack uv indices");
  if (!any_color) mesh.vertex_colors.clear();
  if (any_with_uv) {
    mesh.uvs.reserve(face_uv_indices.size() * 3);
    for (const auto& idx : face_uv_indices) {
      for (int t : idx) {
        if (t < 0 || t >= int(tex_coords.size()))
          throw Error(Errc::index_out_of_range, "uv index " + std::to_string(t));
        mesh.uvs.push_back(tex_coords[t]);
      }
    }
  }
  mesh.validate();

  if (!mtl_path.empty()) {
    const auto image_path = read_map_kd(mtl_path);
    if (!std::filesystem::exists(image_path))
      throw Error(Errc::missing_atlas, image_path.string());
    Image atlas = read_png(image_path);
    if (atlas.channels == 1) {
      Image rgb(atlas.width, atlas.height, 3);
      for (std::size_t i = 0; i < atlas.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) rgb.pixels[3 * i + c] = atlas.pixels[i];
      atlas = std::move(rgb);
    }
    mesh.atlas = std::move(atlas);
  }
  return mesh;
}

void save_textured_mesh(const TexturedMesh& mesh, const std::filesystem::path& path) {
  mesh.validate();
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());

  const std::string stem = path.stem().string();
  if (mesh.has_atlas()) {
    const auto dir = path.parent_path();
    write_png(dir / (stem + ".png"), mesh.atlas);
    std::ofstream mtl(dir / (stem + ".mtl"));
    mtl << "newmtl atlas\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\nmap_Kd " << stem << ".png\n";
    out << "mtllib " << stem << ".mtl\nusemtl atlas\n";
  }

  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
        << format_double(v.z());
    if (mesh.has_vertex_colors()) {
      const Rgb& c = mesh.vertex_colors[i];
      out << ' ' << format_double(c.x()) << ' ' << format_double(c.y()) << ' '
          << format_double(c.z());
    }
    out << '\n';
  }

  std::vector<int> uv_index;
  if (mesh.has_uvs()) {
    std::map<std::pair<double, double>, int> unique;
    uv_index.reserve(mesh.uvs.size());
    for (const Vec2& uv : mesh.uvs) {
      auto [it, inserted] = unique.try_emplace({uv.x(), uv.y()}, int(unique.size()));
      if (inserted) out << "vt " << format_double(uv.x()) << ' ' << format_double(uv.y()) << '\n';
      uv_index.push_back(it->second);
    }
  }

  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    out << 'f';
    for (int k = 0; k < 3; ++k) {
      out << ' ' << mesh.triangles[f][k] + 1;
      if (mesh.has_uvs()) out << '/' << uv_index[3 * f + k] + 1;
    }
    out << '\n';
  }
  if (!out) throw Error(Errc::io_failure, "write failed for " + path.string());
}

}  // namespace texcomp
