#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nlshape/types.hpp"

namespace nlshape {

enum class Region : int { Omega1 = 1, Omega2 = 2, Interaction = 3 };

const char* region_name(Region r);

// Conforming, positively oriented triangle mesh of Omega u I.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Region> region;
  // true for nodes in the closure of an interaction-domain triangle
  std::vector<char> constrained;

  int num_nodes() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  Vec2 centroid(int t) const;
  double diameter(int t) const;
  bool in_omega(int t) const { return region[t] != Region::Interaction; }
};

// Rebuilds the constraint mask, fixes clockwise triangles and checks every
// structural invariant.  Throws InputError on violation.
void finalize_mesh(Mesh& mesh);

struct InterfaceEdge {
  int a, b;       // Omega1 triangle lies to the left of a -> b
  int tri1, tri2; // adjacent Omega1 / Omega2 triangles
  Vec2 normal;    // unit, from Omega1 into Omega2
  double length;
};

struct InterfaceEdges {
  std::vector<InterfaceEdge> edges;
  std::vector<int> nodes;  // sorted, unique
};

InterfaceEdges extract_interface(const Mesh& mesh);

// Nodal vector field, interleaved (x0, y0, x1, y1, ...).
using VectorField = Eigen::VectorXd;

// x + t V(x).  Throws InputError if V is nonzero on a constrained node and
// NumericError if a triangle inverts.
Mesh deform_mesh(const Mesh& mesh, const VectorField& V, double t);
// Same map without the inversion check (used by step-halving logic).
Mesh displaced_mesh(const Mesh& mesh, const VectorField& V, double t);
bool has_inverted(const Mesh& mesh);

struct MeshQuality {
  double min_angle_deg;
  double min_signed_area;
};
MeshQuality mesh_quality(const Mesh& mesh);

// ---- file formats ----
enum class MeshFormat { Gmsh, Native };

// Physical group (tag number or name) -> region.  Empty map means
// {1 or "Omega1", 2 or "Omega2", 3 or "Interaction"}.
using RegionMap = std::map<std::string, Region>;

Mesh load_mesh(const std::string& path, MeshFormat format, const RegionMap& regions = {});
Mesh parse_gmsh(const std::string& text, const RegionMap& regions = {});
Mesh parse_native(const std::string& text);
void save_native(const Mesh& mesh, const std::string& path);
std::string to_native(const Mesh& mesh);

// ---- generated geometries ----

// Interface description for the generator: phi < 0 inside Omega1.
struct LevelSet {
  std::function<double(const Vec2&)> phi;
  std::function<Vec2(const Vec2&)> grad;
  std::string name;
};

LevelSet circle_level_set(Vec2 center, double radius);
LevelSet square_level_set(Vec2 center, double half_width);
LevelSet ellipse_level_set(Vec2 center, double ax, double ay);

struct BoxMeshSpec {
  double lower = 0.0, upper = 1.0;  // Omega = (lower, upper)^2
  double collar = 0.1;              // width of the interaction layer I
  int cells_per_unit = 30;          // h = 1 / cells_per_unit
  double snap_fraction = 0.25;      // nodes closer than this * h are moved onto Gamma
};

// Structured criss-cross mesh of the box with collar, made conforming to
// the zero level set by snapping nearby nodes and splitting cut triangles.
Mesh generate_box_mesh(const BoxMeshSpec& spec, const LevelSet& interface);

// Rings of a polar mesh: fan up to r1 (Omega1), annulus to r2 (Omega2),
// annulus to r3 (Interaction).  n_theta nodes per ring.
Mesh generate_polar_mesh(int n_theta, double r1, double r2, double r3, int rings_per_layer = 1);

}  // namespace nlshape
