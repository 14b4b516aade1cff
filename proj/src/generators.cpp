#include <cmath>
#include <map>
#include <numbers>

#include "gist/error.hpp"
#include "gist/mesh.hpp"

namespace gist {

namespace {

// Union-jack split: the diagonal of every quadrant points at the nearest
// grid corner, so no triangle has all three vertices on the outer rim.
void add_grid_quad(std::vector<Face>& faces, int nu, int nv, int i, int j, int v00, int v10, int v11, int v01) {
  const bool left = 2 * i + 1 < nu;
  const bool bottom = 2 * j + 1 < nv;
  if (left == bottom) {
    faces.push_back({v00, v10, v11});
    faces.push_back({v00, v11, v01});
  } else {
    faces.push_back({v00, v10, v01});
    faces.push_back({v10, v11, v01});
  }
}

}  // namespace

SurfaceMesh gen_icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  SurfaceMesh m;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& p : raw) m.vertices.push_back(Vec3(p[0], p[1], p[2]).normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (std::size_t k = 0; k < m.faces.size(); ++k)
    if (face_cross(m, k).dot(face_centroid(m, k)) < 0.0) std::swap(m.faces[k][1], m.faces[k][2]);
  m.face_pids.assign(m.faces.size(), "sphere");
  m.closed = true;
  m.spherical = true;
  return m;
}

SurfaceMesh gen_icosphere(int level) {
  require(level >= 0, ErrorKind::parameter, "icosphere level must be non-negative");
  require(level <= kMaxIcosphereLevel, ErrorKind::size,
          "icosphere level " + std::to_string(level) + " exceeds cap " + std::to_string(kMaxIcosphereLevel));
  SurfaceMesh m = gen_icosahedron();
  for (int l = 0; l < level; ++l) m = subdivide(m).mesh;
  return m;
}

int thin_plate_vertex(int nx, int ny, bool upper, int i, int j) { return (upper ? 0 : nx * ny) + j * nx + i; }

SurfaceMesh gen_thin_plate(double gap, int nx, int ny) {
  require(gap > 0.0 && std::isfinite(gap), ErrorKind::parameter, "thin plate gap must be positive");
  require(nx >= 2 && ny >= 2, ErrorKind::parameter, "thin plate grid needs nx, ny >= 2");
  SurfaceMesh m;
  for (int sheet = 0; sheet < 2; ++sheet) {
    const double z = sheet == 0 ? gap : 0.0;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        m.vertices.emplace_back(static_cast<double>(i) / (nx - 1), static_cast<double>(j) / (ny - 1), z);
  }
  auto add = [&](const Face& f, const char* pid) {
    m.faces.push_back(f);
    m.face_pids.emplace_back(pid);
  };
  for (int sheet = 0; sheet < 2; ++sheet) {
    const bool upper = sheet == 0;
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        const int a = thin_plate_vertex(nx, ny, upper, i, j), b = thin_plate_vertex(nx, ny, upper, i + 1, j);
        const int c = thin_plate_vertex(nx, ny, upper, i + 1, j + 1), d = thin_plate_vertex(nx, ny, upper, i, j + 1);
        if (upper) {
          add({a, b, c}, "sheet_upper");
          add({a, c, d}, "sheet_upper");
        } else {
          add({a, c, b}, "sheet_lower");
          add({a, d, c}, "sheet_lower");
        }
      }
  }
  // Vertical strip along x = 1 joins the sheets.
  for (int j = 0; j + 1 < ny; ++j) {
    const int lj = thin_plate_vertex(nx, ny, false, nx - 1, j), lj1 = thin_plate_vertex(nx, ny, false, nx - 1, j + 1);
    const int uj = thin_plate_vertex(nx, ny, true, nx - 1, j), uj1 = thin_plate_vertex(nx, ny, true, nx - 1, j + 1);
    add({lj, lj1, uj1}, "joint");
    add({lj, uj1, uj}, "joint");
  }
  return m;
}

SurfaceMesh gen_wing_flap(double alpha_deg, int resolution) {
  require(std::isfinite(alpha_deg) && alpha_deg >= kWingAlphaMin && alpha_deg <= kWingAlphaMax, ErrorKind::parameter,
          "flap angle " + std::to_string(alpha_deg) + " deg outside [-3, 5]");
  require(resolution >= 4, ErrorKind::parameter, "wing resolution must be >= 4");

  const int nm = resolution;
  const int nf = std::max(2, static_cast<int>(std::lround(kFlapChord / kWingMainChord * resolution)));
  const int nv = resolution;
  const int nu = nm + nf;
  const double alpha = alpha_deg * std::numbers::pi / 180.0;

  SurfaceMesh m;
  const int upper_count = (nu + 1) * (nv + 1);
  auto upper_id = [&](int i, int j) { return j * (nu + 1) + i; };
  auto is_rim = [&](int i, int j) { return i == 0 || j == 0 || i == nu || j == nv; };
  auto lower_id = [&](int i, int j) {
    return is_rim(i, j) ? upper_id(i, j) : upper_count + (j - 1) * (nu - 1) + (i - 1);
  };
  auto position = [&](int i, int j) {
    const double y = kWingSpan * j / nv;
    if (i <= nm) return Vec3(kWingMainChord * i / nm, y, 0.0);
    const double s = kFlapChord * (i - nm) / nf;
    return Vec3(kWingMainChord + s * std::cos(alpha), y, s * std::sin(alpha));
  };

  m.vertices.reserve(upper_count + (nu - 1) * (nv - 1));
  for (int j = 0; j <= nv; ++j)
    for (int i = 0; i <= nu; ++i) m.vertices.push_back(position(i, j));
  for (int j = 1; j < nv; ++j)
    for (int i = 1; i < nu; ++i) m.vertices.push_back(position(i, j));

  for (const char* pid : {"main", "flap"}) {
    const bool main = pid[0] == 'm';
    const int i0 = main ? 0 : nm, i1 = main ? nm : nu;
    std::vector<Face> upper, lower;
    for (int j = 0; j < nv; ++j)
      for (int i = i0; i < i1; ++i) {
        add_grid_quad(upper, nu, nv, i, j, upper_id(i, j), upper_id(i + 1, j), upper_id(i + 1, j + 1),
                      upper_id(i, j + 1));
        std::vector<Face> quad;
        add_grid_quad(quad, nu, nv, i, j, lower_id(i, j), lower_id(i + 1, j), lower_id(i + 1, j + 1),
                      lower_id(i, j + 1));
        for (auto f : quad) {
          std::swap(f[1], f[2]);
          lower.push_back(f);
        }
      }
    for (const auto& f : upper) m.faces.push_back(f);
    for (const auto& f : lower) m.faces.push_back(f);
    m.face_pids.resize(m.faces.size(), pid);
  }
  m.closed = true;
  return m;
}

SurfaceMesh gen_cube(int divisions) {
  require(divisions >= 1, ErrorKind::parameter, "cube divisions must be >= 1");
  const int d = divisions;
  SurfaceMesh m;
  std::map<std::array<int, 3>, int> index;
  auto vertex = [&](std::array<int, 3> p) {
    auto [it, inserted] = index.try_emplace(p, static_cast<int>(m.vertices.size()));
    if (inserted) m.vertices.emplace_back(double(p[0]) / d, double(p[1]) / d, double(p[2]) / d);
    return it->second;
  };
  const char* names[3][2] = {{"x_min", "x_max"}, {"y_min", "y_max"}, {"z_min", "z_max"}};
  for (int axis = 0; axis < 3; ++axis) {
    const int ua = (axis + 1) % 3, va = (axis + 2) % 3;  // (ua, va, axis) is right-handed
    for (int side = 0; side < 2; ++side) {
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) {
          auto lattice = [&](int a, int b) {
            std::array<int, 3> p{};
            p[axis] = side * d;
            p[ua] = a;
            p[va] = b;
            return vertex(p);
          };
          const int v00 = lattice(i, j), v10 = lattice(i + 1, j), v11 = lattice(i + 1, j + 1), v01 = lattice(i, j + 1);
          if (side == 1) {
            m.faces.push_back({v00, v10, v11});
            m.faces.push_back({v00, v11, v01});
          } else {
            m.faces.push_back({v00, v11, v10});
            m.faces.push_back({v00, v01, v11});
          }
          m.face_pids.resize(m.faces.size(), names[axis][side]);
        }
    }
  }
  m.closed = true;
  return m;
}

}  // namespace gist
