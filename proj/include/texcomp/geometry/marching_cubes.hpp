#pragma once

#include "texcomp/geometry/mesh.hpp"
#include "texcomp/geometry/voxel.hpp"

namespace texcomp {

// Iso-surface of a volume sampled at voxel centers. The volume is padded with
// one layer of zeros on every side first, so any finite region above the
// threshold yields a closed surface. Values strictly above the threshold are
// inside; triangles are oriented with normals pointing outward.
//
// Ambiguous faces are always resolved by separating the inside corners, which
// is the same choice in both cubes sharing the face; the output is therefore
// watertight for every input.
TexturedMesh marching_cubes(const Volume& volume, double threshold);
TexturedMesh marching_cubes(const VoxelGrid& grid, double threshold = 0.5);

}  // namespace texcomp
