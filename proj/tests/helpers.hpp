#pragma once

#include <string>

#include "nlshape/mesh.hpp"

namespace testutil {

inline std::string source_path(const std::string& rel) { return std::string(NLSHAPE_SOURCE_DIR) + "/" + rel; }

// Square (0,2)^2 split into a diamond of four Omega1 triangles around the
// center and four Omega2 corner triangles.  No interaction domain.
inline nlshape::Mesh diamond_mesh() {
  using nlshape::Region;
  nlshape::Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}, {0, 2}, {1, 2}, {2, 2}};
  m.triangles = {{4, 1, 5}, {4, 5, 7}, {4, 7, 3}, {4, 3, 1}, {0, 1, 3}, {1, 2, 5}, {5, 8, 7}, {3, 7, 6}};
  m.region = {Region::Omega1, Region::Omega1, Region::Omega1, Region::Omega1,
              Region::Omega2, Region::Omega2, Region::Omega2, Region::Omega2};
  nlshape::finalize_mesh(m);
  return m;
}

inline nlshape::Mesh tiny8() {
  return nlshape::load_mesh(source_path("data/tiny8.json"), nlshape::MeshFormat::Native);
}

}  // namespace testutil
