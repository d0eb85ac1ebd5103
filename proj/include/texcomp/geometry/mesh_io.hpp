#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <filesystem>

namespace texcomp {

// Wavefront OBJ with an optional companion MTL referencing one PNG atlas via
// map_Kd. Vertex colors use the "v x y z r g b" extension. Polygons with more
// than three corners are fan-triangulated.
TexturedMesh load_textured_mesh(const std::filesystem::path& path);

// Writes <path>, plus <stem>.mtl and <stem>.png when the mesh has an atlas.
// Coordinates are printed in shortest round-trip form, so geometry reloads
// bit-identically.
void save_textured_mesh(const TexturedMesh& mesh, const std::filesystem::path& path);

}  // namespace texcomp
