#include "gist/mesh.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "gist/error.hpp"

namespace gist {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

Vec3 face_cross(const SurfaceMesh& mesh, std::size_t face) {
  const auto& f = mesh.faces[face];
  const Vec3& a = mesh.vertices[f[0]];
  return (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a);
}

double face_area(const SurfaceMesh& mesh, std::size_t face) { return 0.5 * face_cross(mesh, face).norm(); }

Vec3 face_unit_normal(const SurfaceMesh& mesh, std::size_t face) {
  Vec3 c = face_cross(mesh, face);
  const double len = c.norm();
  require(len > 0.0, ErrorKind::degenerate, "face " + std::to_string(face) + " has zero area");
  return c / len;
}

Vec3 face_centroid(const SurfaceMesh& mesh, std::size_t face) {
  const auto& f = mesh.faces[face];
  return (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
}

std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh) {
  std::vector<Vec3> sum(mesh.vertex_count(), Vec3::Zero());
  std::vector<double> area(mesh.vertex_count(), 0.0);
  for (std::size_t k = 0; k < mesh.face_count(); ++k) {
    const Vec3 c = face_cross(mesh, k);
    for (int v : mesh.faces[k]) {
      sum[v] += c;
      area[v] += c.norm();
    }
  }
  std::vector<Vec3> out(mesh.vertex_count(), Vec3::Zero());
  for (std::size_t v = 0; v < out.size(); ++v) {
    const double len = sum[v].norm();
    // Opposite sheets of a zero-thickness surface cancel to roundoff.
    if (len > 1e-9 * area[v]) out[v] = sum[v] / len;
  }
  return out;
}

bool is_closed_manifold(const SurfaceMesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(mesh.face_count() * 3);
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) ++count[edge_key(f[e], f[(e + 1) % 3])];
  return std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

void SurfaceMesh::validate() const {
  require(face_pids.size() == faces.size(), ErrorKind::shape,
          "face_pids has " + std::to_string(face_pids.size()) + " entries for " + std::to_string(faces.size()) +
              " faces");
  const int n = static_cast<int>(vertices.size());
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const auto& f = faces[k];
    for (int v : f)
      require(v >= 0 && v < n, ErrorKind::index,
              "face " + std::to_string(k) + " references vertex " + std::to_string(v) + " of " + std::to_string(n));
    require(f[0] != f[1] && f[1] != f[2] && f[0] != f[2], ErrorKind::degenerate,
            "face " + std::to_string(k) + " repeats a vertex");
    require(face_cross(*this, k).norm() > 0.0, ErrorKind::degenerate, "face " + std::to_string(k) + " has zero area");
  }
  if (closed) require(is_closed_manifold(*this), ErrorKind::degenerate, "mesh flagged closed has an open edge");
}

std::vector<std::string> SurfaceMesh::pids() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : face_pids)
    if (seen.insert(p).second) out.push_back(p);
  return out;
}

Subdivision subdivide(const SurfaceMesh& mesh) {
  Subdivision out;
  SurfaceMesh& fine = out.mesh;
  fine.vertices = mesh.vertices;
  fine.closed = mesh.closed;
  fine.spherical = mesh.spherical;
  fine.faces.reserve(mesh.face_count() * 4);
  fine.face_pids.reserve(mesh.face_count() * 4);

  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(mesh.face_count() * 2);
  auto mid = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(fine.vertices.size()));
    if (inserted) {
      Vec3 m = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
      if (mesh.spherical) m.normalize();
      fine.vertices.push_back(m);
    }
    return it->second;
  };

  for (std::size_t k = 0; k < mesh.face_count(); ++k) {
    const auto [a, b, c] = mesh.faces[k];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    for (const Face& f : {Face{a, ab, ca}, Face{ab, b, bc}, Face{ca, bc, c}, Face{ab, bc, ca}}) {
      fine.faces.push_back(f);
      fine.face_pids.push_back(mesh.face_pids[k]);
    }
  }
  out.correspondence.fine_index.resize(mesh.vertex_count());
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) out.correspondence.fine_index[v] = static_cast<int>(v);
  return out;
}

SurfaceMesh permute_vertices(const SurfaceMesh& mesh, const std::vector<int>& perm) {
  require(perm.size() == mesh.vertex_count(), ErrorKind::shape, "permutation length differs from vertex count");
  SurfaceMesh out = mesh;
  for (std::size_t v = 0; v < perm.size(); ++v) out.vertices[perm[v]] = mesh.vertices[v];
  for (auto& f : out.faces)
    for (int& v : f) v = perm[v];
  return out;
}

}  // namespace gist
