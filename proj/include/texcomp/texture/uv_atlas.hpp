#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <vector>

namespace texcomp {

struct UvAtlasOptions {
  int resolution = 256;
  int gutter = 2;  // empty texels kept around every chart
  // Fail rather than produce an atlas whose average triangle covers fewer
  // texels than this.
  double min_texels_per_triangle = 0.25;
};

// Fresh uv layout for a mesh: triangles are grouped by the dominant axis of
// their normal, grown into edge-connected charts that project onto the
// matching coordinate plane without overlap, scaled by one global factor and
// shelf-packed. The returned mesh carries the uvs and a black atlas of the
// requested size; an empty mesh comes back without uvs.
TexturedMesh generate_uv_atlas(const TexturedMesh& mesh, const UvAtlasOptions& options = {});

// Chart index per face: faces sharing an edge whose uv endpoints coincide in
// both faces belong to the same chart. Indices are dense, in face order.
std::vector<int> uv_chart_ids(const TexturedMesh& mesh);

}  // namespace texcomp
