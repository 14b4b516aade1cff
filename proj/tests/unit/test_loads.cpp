#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gist/error.hpp"
#include "gist/loads.hpp"

using namespace gist;

namespace {

FieldMatrix constant_fields(std::size_t n, double p, Vec3 tau = Vec3::Zero()) {
  FieldMatrix f(static_cast<Eigen::Index>(n), 4);
  for (Eigen::Index i = 0; i < f.rows(); ++i) f.row(i) << p, tau.x(), tau.y(), tau.z();
  return f;
}

SurfaceMesh unit_square_panel(double side) {
  SurfaceMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(side, 0, 0), Vec3(side, side, 0), Vec3(0, side, 0)};
  m.faces = {Face{0, 1, 2}, Face{0, 2, 3}};
  m.face_pids = {"panel", "panel"};
  return m;
}

// Smooth test field evaluated at an arbitrary point.
Eigen::Vector4d smooth_field(const Vec3& x) {
  return {1000.0 + 300.0 * x.x() + 200.0 * x.y() * x.z() + 80.0 * std::sin(2.0 * x.x() + x.y()),
          20.0 + 5.0 * x.y() * x.y(), 3.0 * std::cos(x.z()), -4.0 + x.x() * x.y()};
}

// 3-point (edge-midpoint) rule, exact for quadratics on each triangle.
std::array<double, 6> quadrature_coefficients(const SurfaceMesh& m, const FlowConstants& c) {
  std::array<double, 6> out{};
  const double q = c.dynamic_pressure();
  for (std::size_t k = 0; k < m.face_count(); ++k) {
    const auto& f = m.faces[k];
    const Vec3 a = m.vertices[f[0]], b = m.vertices[f[1]], d = m.vertices[f[2]];
    const Vec3 cross = (b - a).cross(d - a);
    const double area = 0.5 * cross.norm();
    const Vec3 n = cross.normalized();
    for (const Vec3& x : {Vec3((a + b) / 2), Vec3((b + d) / 2), Vec3((d + a) / 2)}) {
      const auto v = smooth_field(x);
      const Vec3 force = (v(0) * n + Vec3(v(1), v(2), v(3))) * area / 3.0;
      const Vec3 moment = (x - c.origin).cross(force);
      for (int i = 0; i < 3; ++i) {
        out[i] += force.dot(c.wind_basis[i]) / q;
        out[3 + i] += moment.dot(c.wind_basis[i]) / (q * c.ref_length);
      }
    }
  }
  return out;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond quat(g(rng), g(rng), g(rng), g(rng));
  return quat.normalized().toRotationMatrix();
}

}  // namespace

TEST_CASE("dynamic pressure from default constants") {
  CHECK(FlowConstants{}.dynamic_pressure() == doctest::Approx(1531.25).epsilon(1e-15));
}

TEST_CASE("unit right triangle force") {
  const auto m = load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  const auto loads = element_loads(m, constant_fields(3, 10.0, Vec3(1, 0, 0)), FlowConstants{});
  REQUIRE(loads.size() == 1);
  CHECK(loads[0].area == 0.5);
  CHECK(loads[0].force == Vec3(0.5, 0, 5));
  CHECK(std::abs(loads[0].normal.norm() - 1.0) <= 1e-12);
}

TEST_CASE("square panel force and moment") {
  const double side = std::sqrt(2.0);
  const auto m = unit_square_panel(side);
  const auto loads = element_loads(m, constant_fields(4, 10.0, Vec3(1, 0, 0)), FlowConstants{});
  Vec3 total = Vec3::Zero();
  double area = 0.0;
  for (const auto& e : loads) {
    total += e.force;
    area += e.area;
  }
  CHECK(area == doctest::Approx(2.0).epsilon(1e-14));
  CHECK((total - Vec3(2, 0, 20)).norm() <= 1e-12);

  // Force (0,0,20) acting at offset (1,0,0) from the reference point.
  ElementLoad e;
  e.force = Vec3(0, 0, 20);
  e.centroid = Vec3(1, 0, 0);
  CHECK(e.centroid.cross(e.force) == Vec3(0, -20, 0));

  FlowConstants c;
  c.origin = Vec3(side / 2 - 1.0, side / 2, 0.0);
  const auto tri = element_loads(unit_square_panel(side), constant_fields(4, 10.0), c);
  Vec3 moment = Vec3::Zero();
  for (const auto& x : tri) moment += x.moment;
  CHECK((moment - Vec3(0, -20, 0)).norm() <= 1e-12);
}

TEST_CASE("CzS from a known vertical force") {
  // Panel of area 1 with p = 3062.5 Pa pointing up gives Fz = 3062.5 N.
  const auto m = unit_square_panel(1.0);
  const auto c = integrate_fields(m, constant_fields(4, 3062.5), FlowConstants{});
  CHECK(c.total.czs() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(c.total.cxs() == 0.0);
}

TEST_CASE("zero-area face is an integration error naming the face") {
  SurfaceMesh m = unit_square_panel(1.0);
  m.vertices.push_back(Vec3(2, 0, 0));
  m.faces.push_back(Face{0, 1, 4});
  m.face_pids.push_back("panel");
  try {
    element_loads(m, constant_fields(5, 1.0), FlowConstants{});
    FAIL("expected integration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::integration);
    CHECK(std::string(e.what()).find("face 2") != std::string::npos);
  }
  CHECK_THROWS_AS(element_loads(m, constant_fields(3, 1.0), FlowConstants{}), Error);
}

TEST_CASE("closed surfaces with constant pressure carry no net load") {
  for (const auto& mesh : {gen_cube(1), gen_cube(5), gen_icosphere(3), gen_wing_flap(2.0, 12)}) {
    for (double p : {1.0, -731.5, 1e5}) {
      FlowConstants c;
      c.origin = Vec3(0.3, -0.2, 0.7);
      const auto loads = element_loads(mesh, constant_fields(mesh.vertex_count(), p), c);
      Vec3 f = Vec3::Zero(), mom = Vec3::Zero();
      double area = 0.0;
      for (const auto& e : loads) {
        f += e.force;
        mom += e.moment;
        area += e.area;
      }
      CHECK(f.norm() <= 1e-9 * std::abs(p) * area);
      CHECK(mom.norm() <= 1e-9 * std::abs(p) * area);
      const auto coeffs = integrate_coefficients(loads, mesh.face_pids, c);
      for (double v : coeffs.total.values) CHECK(std::abs(v) <= 1e-9 * std::abs(p) * area / c.dynamic_pressure());
    }
  }
}

TEST_CASE("total equals sum of per-PID values") {
  const auto mesh = gen_cube(4);
  FieldMatrix f(static_cast<Eigen::Index>(mesh.vertex_count()), 4);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) f.row(static_cast<Eigen::Index>(i)) = smooth_field(mesh.vertices[i]);
  const auto c = integrate_fields(mesh, f, FlowConstants{});
  CHECK(c.by_pid.size() == 6);
  for (int comp = 0; comp < 6; ++comp) {
    double s = 0.0;
    for (const auto& [pid, v] : c.by_pid) s += v.values[comp];
    CHECK(s == c.total.values[comp]);
  }

  // Reordering faces changes only summation order.
  std::vector<std::size_t> order(mesh.face_count());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  SurfaceMesh shuffled = mesh;
  for (std::size_t k = 0; k < order.size(); ++k) {
    shuffled.faces[k] = mesh.faces[order[k]];
    shuffled.face_pids[k] = mesh.face_pids[order[k]];
  }
  const auto d = integrate_fields(shuffled, f, FlowConstants{});
  for (const auto& [pid, v] : c.by_pid)
    for (int comp = 0; comp < 6; ++comp)
      CHECK(std::abs(d.pid(pid).values[comp] - v.values[comp]) <= 1e-12 * (1.0 + std::abs(v.values[comp])));
  CHECK_THROWS_AS(c.pid("nope"), Error);
}

TEST_CASE("doubling the speed divides coefficients by four") {
  const auto mesh = gen_wing_flap(1.5, 10);
  FieldMatrix f(static_cast<Eigen::Index>(mesh.vertex_count()), 4);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) f.row(static_cast<Eigen::Index>(i)) = smooth_field(mesh.vertices[i]);
  FlowConstants slow, fast;
  fast.speed = 2.0 * slow.speed;
  const auto a = integrate_fields(mesh, f, slow), b = integrate_fields(mesh, f, fast);
  for (int comp = 0; comp < 6; ++comp) CHECK(b.total.values[comp] == a.total.values[comp] / 4.0);
}

TEST_CASE("coefficients are invariant under a common rigid rotation") {
  std::mt19937_64 rng(11);
  const auto mesh = gen_wing_flap(2.5, 10);
  FieldMatrix f(static_cast<Eigen::Index>(mesh.vertex_count()), 4);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) f.row(static_cast<Eigen::Index>(i)) = smooth_field(mesh.vertices[i]);
  FlowConstants c = FlowConstants::yawed(3.0);
  c.origin = Vec3(0.25, 0.1, 0.0);
  const auto base = integrate_fields(mesh, f, c);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Matrix3d rot = random_rotation(rng);
    SurfaceMesh m = mesh;
    for (auto& v : m.vertices) v = rot * v;
    FieldMatrix g = f;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const Vec3 t = rot * Vec3(f(i, 1), f(i, 2), f(i, 3));
      g(i, 1) = t.x();
      g(i, 2) = t.y();
      g(i, 3) = t.z();
    }
    FlowConstants rc = c;
    rc.origin = rot * c.origin;
    for (auto& e : rc.wind_basis) e = rot * e;
    const auto turned = integrate_fields(m, g, rc);
    for (int comp = 0; comp < 6; ++comp) CHECK(std::abs(turned.total.values[comp] - base.total.values[comp]) <= 1e-9);
  }
}

TEST_CASE("vertex-mean integration agrees with a subdivided quadrature oracle") {
  for (const auto& mesh : {gen_cube(6), gen_thin_plate(0.05, 12, 10)}) {
    FieldMatrix f(static_cast<Eigen::Index>(mesh.vertex_count()), 4);
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
      f.row(static_cast<Eigen::Index>(i)) = smooth_field(mesh.vertices[i]);
    FlowConstants c;
    c.origin = Vec3(0.1, 0.2, 0.3);
    const auto got = integrate_fields(mesh, f, c);
    const auto fine = subdivide(subdivide(mesh).mesh).mesh;
    const auto want = quadrature_coefficients(fine, c);
    double scale = 0.0;
    for (double v : want) scale = std::max(scale, std::abs(v));
    for (int comp = 0; comp < 6; ++comp) CHECK(std::abs(got.total.values[comp] - want[comp]) <= 0.01 * scale);
  }
}

TEST_CASE("field metrics examples") {
  const std::vector<double> t{1, 2, 3};
  auto m = field_metrics(t, t);
  CHECK(m.mse == 0.0);
  CHECK(m.r_squared() == 1.0);

  const std::vector<double> mean{2, 2, 2};
  m = field_metrics(mean, t);
  CHECK(m.mse == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.r_squared() == 0.0);

  const std::vector<double> truth{0, 0, 4}, pred{0, 1, 3};
  m = field_metrics(pred, truth);
  CHECK(m.mse == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.r_squared() == doctest::Approx(0.8125).epsilon(1e-15));

  const std::vector<double> flat{5, 5, 5};
  m = field_metrics(t, flat);
  CHECK(m.mse == doctest::Approx(29.0 / 3.0));
  try {
    (void)m.r_squared();
    FAIL("expected undefined value");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::undefined_value);
  }
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(field_metrics(two, t), Error);
}

namespace {

AeroCoefficients single_pid(const std::string& pid, double cxs) {
  AeroCoefficients c;
  Coefficients v;
  v.values[0] = cxs;
  c.by_pid.emplace_back(pid, v);
  c.total = v;
  return c;
}

}  // namespace

TEST_CASE("pid report thresholds") {
  const auto same = pid_report(single_pid("wing", 1.25), single_pid("wing", 1.25), {1.0, 0.3});
  CHECK(same.rows[0].abs_err == 0.0);
  CHECK(same.usable_count == 1);
  CHECK(same.replace_count == 1);

  const auto r = pid_report(single_pid("wing", 1.5), single_pid("wing", 1.0), {1.0, 0.3});
  CHECK(r.rows[0].abs_err == 0.5);
  CHECK(r.rows[0].usable);
  CHECK_FALSE(r.rows[0].replace);

  std::ostringstream out;
  write_report_csv(out, r);
  CHECK(out.str() == "pid,cxs_pred,cxs_true,abs_err,usable,replace\nwing,1.5,1,0.5,true,false\n");

  try {
    pid_report(single_pid("wing", 1.0), single_pid("floor", 1.0), {1.0, 0.3});
    FAIL("expected report error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::report);
    CHECK(std::string(e.what()).find("floor") != std::string::npos);
  }
  CHECK_THROWS_AS(pid_report(single_pid("a", 0), single_pid("a", 0), {0.2, 0.3}), Error);
}

TEST_CASE("report counts equal per-row passes") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    AeroCoefficients a, b;
    const int parts = 1 + trial % 20;
    for (int k = 0; k < parts; ++k) {
      Coefficients x, y;
      x.values[0] = u(rng);
      y.values[0] = u(rng);
      a.by_pid.emplace_back("part" + std::to_string(k), x);
      b.by_pid.emplace_back("part" + std::to_string(k), y);
    }
    const auto r = pid_report(a, b, {0.8, 0.25});
    int usable = 0, replace = 0;
    for (const auto& row : r.rows) {
      usable += row.abs_err <= 0.8;
      replace += row.abs_err <= 0.25;
    }
    CHECK(r.usable_count == usable);
    CHECK(r.replace_count == replace);
  }
}

TEST_CASE("field CSV round trip") {
  FieldMatrix f(3, 4);
  f << 1.0, 0.1, -2.5e-3, 0, 1.0 / 3.0, 4, 5, 6, -7e10, 0, 0, 1e-300;
  std::stringstream s;
  write_fields_csv(s, f);
  CHECK(s.str().rfind("vertex_id,p,taux,tauy,tauz\n0,", 0) == 0);
  CHECK(read_fields_csv(s) == f);

  std::istringstream bad("vertex_id,p,taux,tauy,tauz\n0,1,2,3\n");
  CHECK_THROWS_AS(read_fields_csv(bad), Error);
  std::istringstream skip("vertex_id,p,taux,tauy,tauz\n1,1,2,3,4\n");
  CHECK_THROWS_AS(read_fields_csv(skip), Error);
  CHECK_THROWS_AS(read_fields_file("/nonexistent/fields.csv"), Error);
}
