#include "texcomp/geometry/voxel.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace texcomp {

std::size_t VoxelGrid::occupied_count() const {
  return std::size_t(std::count(occupancy.begin(), occupancy.end(), std::uint8_t(1)));
}

std::array<int, 3> containing_voxel(const Vec3& p, int n, bool* clamped) {
  std::array<int, 3> idx{};
  bool outside = false;
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] - kDomainMin) * n;
    long i = std::isfinite(u) ? long(std::floor(u)) : 0;
    // The upper face of the domain belongs to the last voxel.
    if (p[a] == kDomainMax) i = n - 1;
    if (i < 0 || i >= n || !std::isfinite(u)) {
      outside = true;
      i = std::clamp<long>(i, 0, n - 1);
    }
    idx[a] = int(i);
  }
  if (clamped) *clamped = outside;
  return idx;
}

VoxelGrid voxelize_occupancy(std::span<const Vec3> points, int resolution,
                             std::size_t* clamped_count) {
  if (resolution <= 0) throw Error(Errc::invalid_argument, "resolution must be positive");
  VoxelGrid grid(resolution);
  std::size_t clamped = 0;
  for (const Vec3& p : points) {
    bool c = false;
    const auto [i, j, k] = containing_voxel(p, resolution, &c);
    clamped += c;
    grid.occupancy[voxel_index(resolution, i, j, k)] = 1;
  }
  if (clamped_count) *clamped_count = clamped;
  return grid;
}

ColorVoxelGrid voxelize_color(std::span<const Vec3> points, std::span<const Rgb> colors,
                              int resolution, std::size_t* clamped_count) {
  if (resolution <= 0) throw Error(Errc::invalid_argument, "resolution must be positive");
  if (colors.size() != points.size())
    throw Error(Errc::missing_colors, "every point needs a color");
  ColorVoxelGrid grid(resolution);
  std::size_t clamped = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    bool c = false;
    const auto [i, j, k] = containing_voxel(points[p], resolution, &c);
    clamped += c;
    const std::size_t v = voxel_index(resolution, i, j, k);
    for (int ch = 0; ch < 3; ++ch)
      grid.colors[3 * v + ch] = float(std::clamp(colors[p][ch], 0.0, 1.0));
  }
  if (clamped_count) *clamped_count = clamped;
  return grid;
}

ScanGrids voxelize_scan(const TexturedMesh& mesh, int resolution, std::size_t points,
                        std::uint64_t seed) {
  if (!mesh.has_atlas() && !mesh.has_vertex_colors())
    throw Error(Errc::missing_colors, "scan has neither an atlas nor vertex colors");
  const PointSample sample = sample_surface_points(mesh, points, seed);
  return {voxelize_occupancy(sample.positions, resolution),
          voxelize_color(sample.positions, sample.colors, resolution)};
}

Volume to_volume(const VoxelGrid& grid) {
  Volume v(grid.resolution);
  std::transform(grid.occupancy.begin(), grid.occupancy.end(), v.values.begin(),
                 [](std::uint8_t o) { return float(o); });
  return v;
}

namespace {

struct GridHeader {
  int resolution = 0;
  std::string type;
  int channels = 0;
};

std::filesystem::path header_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".hdr");
}

void write_header(const std::filesystem::path& path, const GridHeader& h) {
  std::ofstream out(header_path(path));
  out << "resolution=" << h.resolution << " type=" << h.type << " channels=" << h.channels
      << " domain=-0.5,0.5 order=x-major\n";
  if (!out) throw Error(Errc::io_failure, "cannot write " + header_path(path).string());
}

GridHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(header_path(path));
  if (!in) throw Error(Errc::missing_file, header_path(path).string());
  std::string line;
  std::getline(in, line);
  std::istringstream fields(line);
  GridHeader h;
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "resolution") h.resolution = std::stoi(value);
    else if (key == "type") h.type = value;
    else if (key == "channels") h.channels = std::stoi(value);
    else if (key == "domain" && value != "-0.5,0.5")
      throw Error(Errc::malformed_geometry, "unsupported grid domain " + value);
  }
  if (h.resolution <= 0 || h.channels <= 0 || h.type.empty())
    throw Error(Errc::malformed_geometry, "incomplete grid header " + header_path(path).string());
  return h;
}

template <typename T>
void write_raw(const std::filesystem::path& path, const std::vector<T>& data) {
  static_assert(std::endian::native == std::endian::little, "raw grids are little-endian");
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size() * sizeof(T)));
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
}

template <typename T>
std::vector<T> read_raw(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, path.string());
  std::vector<T> data(count);
  in.read(reinterpret_cast<char*>(data.data()), std::streamsize(count * sizeof(T)));
  if (in.gcount() != std::streamsize(count * sizeof(T)) || in.peek() != EOF)
    throw Error(Errc::malformed_geometry, "payload size mismatch in " + path.string());
  return data;
}

std::size_t cube(int n) { return std::size_t(n) * n * n; }

GridHeader expect(const std::filesystem::path& path, const char* type, int channels) {
  GridHeader h = read_header(path);
  if (h.type != type || h.channels != channels)
    throw Error(Errc::malformed_geometry, "grid " + path.string() + " is " + h.type + "x" +
                                              std::to_string(h.channels));
  return h;
}

}  // namespace

void save_voxel_grid(const std::filesystem::path& path, const VoxelGrid& grid) {
  write_raw(path, grid.occupancy);
  write_header(path, {grid.resolution, "uint8", 1});
}

void save_color_grid(const std::filesystem::path& path, const ColorVoxelGrid& grid) {
  write_raw(path, grid.colors);
  write_header(path, {grid.resolution, "float32", 3});
}

void save_volume(const std::filesystem::path& path, const Volume& volume) {
  write_raw(path, volume.values);
  write_header(path, {volume.resolution, "float32", 1});
}

VoxelGrid load_voxel_grid(const std::filesystem::path& path) {
  const GridHeader h = expect(path, "uint8", 1);
  VoxelGrid grid;
  grid.resolution = h.resolution;
  grid.occupancy = read_raw<std::uint8_t>(path, cube(h.resolution));
  for (auto o : grid.occupancy)
    if (o > 1) throw Error(Errc::malformed_geometry, "occupancy values must be 0 or 1");
  return grid;
}

ColorVoxelGrid load_color_grid(const std::filesystem::path& path) {
  const GridHeader h = expect(path, "float32", 3);
  ColorVoxelGrid grid;
  grid.resolution = h.resolution;
  grid.colors = read_raw<float>(path, 3 * cube(h.resolution));
  return grid;
}

Volume load_volume(const std::filesystem::path& path) {
  const GridHeader h = expect(path, "float32", 1);
  Volume v;
  v.resolution = h.resolution;
  v.values = read_raw<float>(path, cube(h.resolution));
  return v;
}

}  // namespace texcomp
