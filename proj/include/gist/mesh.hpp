#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gist {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Triangle surface mesh with one part identifier (PID) per face.
///
/// Faces are counter-clockwise when seen from outside, so the right-hand
/// normal of (v0, v1, v2) points outward. `closed` asserts that every edge
/// is shared by exactly two faces; `spherical` marks meshes whose vertices
/// lie on the unit sphere (subdivision then projects midpoints back onto it).
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<std::string> face_pids;
  bool closed = false;
  bool spherical = false;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }

  /// Throws on out-of-range or repeated face indices, PID count mismatch,
  /// zero-area faces, and (when `closed`) non-manifold edges.
  void validate() const;

  /// Distinct PIDs in order of first appearance.
  std::vector<std::string> pids() const;
};

/// Maps coarse vertex i to refined vertex `fine_index[i]`.
struct CorrespondenceMap {
  std::vector<int> fine_index;
};

struct Subdivision {
  SurfaceMesh mesh;
  CorrespondenceMap correspondence;
};

Vec3 face_cross(const SurfaceMesh& mesh, std::size_t face);
double face_area(const SurfaceMesh& mesh, std::size_t face);
Vec3 face_unit_normal(const SurfaceMesh& mesh, std::size_t face);
Vec3 face_centroid(const SurfaceMesh& mesh, std::size_t face);

/// Area-weighted vertex normals. Vertices whose incident normals cancel
/// (rims of zero-thickness sheets) get the zero vector.
std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh);

/// Checks the two-faces-per-edge property.
bool is_closed_manifold(const SurfaceMesh& mesh);

// Mesh text format: `v x y z`, `g <pid>`, `f i j k` (1-based), `#` comments.
SurfaceMesh load_mesh(std::string_view text);
std::string save_mesh(const SurfaceMesh& mesh);
SurfaceMesh read_mesh_file(const std::string& path);
void write_mesh_file(const SurfaceMesh& mesh, const std::string& path);

// Generators.
inline constexpr int kMaxIcosphereLevel = 7;

SurfaceMesh gen_icosahedron();
SurfaceMesh gen_icosphere(int level);
SurfaceMesh gen_thin_plate(double gap, int nx, int ny);
SurfaceMesh gen_wing_flap(double alpha_deg, int resolution);
SurfaceMesh gen_cube(int divisions);

/// Index of grid vertex (i, j) on the upper or lower sheet of a thin plate
/// built with the same (nx, ny).
int thin_plate_vertex(int nx, int ny, bool upper, int i, int j);

inline constexpr double kWingMainChord = 1.0;
inline constexpr double kWingSpan = 0.5;
inline constexpr double kFlapChord = 0.4;
inline constexpr double kWingAlphaMin = -3.0;
inline constexpr double kWingAlphaMax = 5.0;

/// 1-to-4 midpoint split. Original vertices keep their indices.
Subdivision subdivide(const SurfaceMesh& mesh);

/// Relabels vertices: new index of old vertex v is perm[v]. Faces and PIDs
/// keep their order.
SurfaceMesh permute_vertices(const SurfaceMesh& mesh, const std::vector<int>& perm);

}  // namespace gist
