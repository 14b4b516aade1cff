#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "gist/error.hpp"
#include "gist/spectral.hpp"
#include "gist/workflow.hpp"

namespace gist {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Check make(const std::string& suite, const std::string& name, bool pass, double value, const std::string& bound,
           const std::string& detail = {}) {
  return Check{suite, name, pass, value, bound, detail};
}

struct NamedGraph {
  std::string name;
  MeshGraph graph;
};

std::vector<NamedGraph> gauge_graphs() {
  return {{"C4", cycle_graph(4)}, {"C6", cycle_graph(6)}, {"icosahedron", build_graph(gen_icosahedron())}};
}

// Smooth, map-dependent test field on a sphere.
RowMatrix sphere_targets(const SurfaceMesh& mesh, const std::array<double, kMapFeatures>& map) {
  RowMatrix t(static_cast<Eigen::Index>(mesh.vertex_count()), kOutputDim);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& x = mesh.vertices[v];
    t.row(static_cast<Eigen::Index>(v)) << 800.0 * x.x() * x.x() - 300.0 * x.y() + 150.0 * map[1] * x.z() +
                                               2000.0 * map[0],
        20.0 + 5.0 * x.z(), -4.0 * x.x() * (1.0 + 0.2 * map[2]), 3.0 * x.y() * x.z();
  }
  return t;
}

FieldMatrix constant_fields(std::size_t n, double p, const Vec3& tau = Vec3::Zero()) {
  FieldMatrix f(static_cast<Eigen::Index>(n), kFieldChannels);
  for (Eigen::Index i = 0; i < f.rows(); ++i) f.row(i) << p, tau.x(), tau.y(), tau.z();
  return f;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"gauge", "unbiased", "mismatch", "thinwall", "gradcheck", "loads", "all"};
  return names;
}

std::vector<Check> verify_gauge(int rotations) {
  std::vector<Check> out;
  const auto filter = FilterSpec::low_pass();
  for (const auto& [name, g] : gauge_graphs()) {
    const auto eig = symmetric_eigenpairs(g);
    const auto reference = symmetric_eigen_kernel(g, filter);
    double worst = 0.0, basis_change = 0.0;
    for (int s = 0; s < rotations; ++s) {
      const auto rotated = regauge(eig, 1000 + static_cast<std::uint64_t>(s));
      worst = std::max(worst, (kernel_from_eigenpairs(rotated, filter) - reference).cwiseAbs().maxCoeff());
      basis_change = std::max(basis_change, (rotated.vectors - eig.vectors).cwiseAbs().maxCoeff());
    }
    out.push_back(make("gauge", name + "_kernel_invariant", worst <= 1e-10, worst, "<= 1e-10",
                       std::to_string(rotations) + " rotations"));
    // The transforms must actually move the eigenbasis.
    out.push_back(make("gauge", name + "_basis_moved", basis_change >= 1e-3, basis_change, ">= 1e-3"));
  }
  return out;
}

std::vector<Check> verify_unbiased(int seeds) {
  std::vector<Check> out;
  const auto filter = FilterSpec::low_pass();
  const int r = 64;
  const std::vector<NamedGraph> graphs{{"P8", path_graph(8)},
                                       {"C6", cycle_graph(6)},
                                       {"K5", complete_graph(5)},
                                       {"icosahedron", build_graph(gen_icosahedron())},
                                       {"icosphere1", build_graph(gen_icosphere(1))}};
  for (const auto& [name, g] : graphs) {
    const auto p = random_walk_matrix(g);
    const auto exact = exact_kernel(p, filter);
    const int n = g.vertex_count();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n), sq = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < seeds; ++s) {
      const auto emb = spectral_embed(p, filter, r, static_cast<std::uint64_t>(s), 1);
      const Eigen::MatrixXd k = emb.phi * emb.phi.transpose();
      sum += k;
      sq += k.cwiseProduct(k);
    }
    const Eigen::MatrixXd mean = sum / seeds;
    const Eigen::MatrixXd var = (sq - seeds * mean.cwiseProduct(mean)) / (seeds - 1);
    double worst = 0.0;
    int outside = 0, pairs = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double se = std::sqrt(std::max(var(i, j), 0.0) / seeds);
        const double z = std::abs(mean(i, j) - exact(i, j)) / se;
        worst = std::max(worst, z);
        outside += z > 3.0;
        ++pairs;
      }
    out.push_back(make("unbiased", name + "_mean_within_3se", outside == 0, worst, "max |z| <= 3",
                       std::to_string(outside) + "/" + std::to_string(pairs) + " pairs outside, " +
                           std::to_string(seeds) + " seeds, r=" + std::to_string(r)));
  }

  const auto p = random_walk_matrix(build_graph(gen_icosphere(1)));
  std::vector<double> rs{64, 256, 1024, 4096}, errs;
  std::string detail;
  for (double rr : rs) {
    errs.push_back(estimator_error(p, filter, static_cast<int>(rr), 20, 7000));
    detail += fmt("%g", rr) + ":" + fmt("%.3e", errs.back()) + " ";
  }
  detail.pop_back();
  const double slope = loglog_slope(rs, errs);
  out.push_back(make("unbiased", "error_rate_slope", slope >= -0.6 && slope <= -0.4, slope, "in [-0.6, -0.4]", detail));
  return out;
}

std::vector<Check> verify_thinwall() {
  std::vector<Check> out;
  const int n = 16;
  const auto mesh = gen_thin_plate(0.01, n, n);
  const auto k = exact_kernel(random_walk_matrix(build_graph(mesh)), FilterSpec::low_pass());
  double worst = 0.0;
  int pairs = 0;
  for (int i = 4; i < n - 4; ++i)
    for (int j = 4; j < n - 4; ++j) {
      const int up = thin_plate_vertex(n, n, true, i, j), down = thin_plate_vertex(n, n, false, i, j);
      const int next = thin_plate_vertex(n, n, true, i + 1, j);
      const double in_sheet = k(up, next);
      require(in_sheet > 0.0, ErrorKind::verification, "in-sheet neighbor kernel is not positive");
      worst = std::max(worst, std::abs(k(up, down)) / in_sheet);
      ++pairs;
    }
  out.push_back(make("thinwall", "cross_over_in_sheet", worst <= 0.1, worst, "<= 0.1",
                     std::to_string(pairs) + " mid-sheet pairs, gap 0.01"));
  return out;
}

std::vector<Check> verify_mismatch() {
  const auto curve = mismatch_curve({1, 2, 3}, FilterSpec::low_pass(), 1, 1, KernelSource::exact);
  bool decreasing = true;
  std::string detail;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0 && !(curve[i].mean_mismatch < curve[i - 1].mean_mismatch)) decreasing = false;
    detail += std::to_string(curve[i].coarse_vertices) + "->" + std::to_string(curve[i].fine_vertices) + ":" +
              fmt("%.4e", curve[i].mean_mismatch) + " ";
  }
  detail.pop_back();
  return {make("mismatch", "strictly_decreasing", decreasing, curve.back().mean_mismatch, "strictly decreasing",
               detail)};
}

std::vector<Check> verify_gradcheck() {
  std::vector<Check> out;
  const auto mesh = gen_icosphere(1);
  const std::array<double, kMapFeatures> map{-0.01, 0.5, 2.0, 1.0, 3.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ModelConfig cfg;
    cfg.hidden = 6;
    cfg.blocks = 2;
    cfg.k = 5;
    cfg.seed = seed;
    auto model = init_model(cfg);
    model.r = 16;
    model.embed_seed = seed + 100;
    for (auto& b : model.params.blocks) b.theta1 = 4.0 + static_cast<double>(seed);
    const auto sample = make_sample(mesh, map, sphere_targets(mesh, map));
    const FieldSample* ptr = &sample;
    model.norm = Normalization::fit(std::span<const FieldSample* const>(&ptr, 1));
    const auto ctx = prepare_context(mesh, model);
    const auto r = gradient_check(model, sample, ctx.emb, ctx.attn);
    out.push_back(make("gradcheck", "seed" + std::to_string(seed), r.max_rel_error <= 1e-5, r.max_rel_error,
                       "<= 1e-5", std::to_string(r.checked) + " parameters, N=" + std::to_string(sample.size())));
  }
  return out;
}

std::vector<Check> verify_loads() {
  std::vector<Check> out;
  const FlowConstants base;
  const double q = base.dynamic_pressure();
  out.push_back(make("loads", "dynamic_pressure", std::abs(q - 1531.25) <= 1e-15 * 1531.25, q, "1531.25 Pa"));

  double worst = 0.0;
  for (int div : {1, 4}) {
    const auto cube = gen_cube(div);
    for (double p : {1.0, -731.5, 1e5}) {
      FlowConstants c;
      c.origin = Vec3(0.3, -0.2, 0.7);
      Vec3 f = Vec3::Zero(), m = Vec3::Zero();
      double area = 0.0;
      for (const auto& e : element_loads(cube, constant_fields(cube.vertex_count(), p), c)) {
        f += e.force;
        m += e.moment;
        area += e.area;
      }
      worst = std::max({worst, f.norm() / (std::abs(p) * area), m.norm() / (std::abs(p) * area)});
    }
  }
  out.push_back(make("loads", "closed_cube_zero_load", worst <= 1e-9, worst, "<= 1e-9 relative"));

  {
    const auto tri = load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    const auto e = element_loads(tri, constant_fields(3, 10.0, Vec3(1, 0, 0)), base).at(0);
    const double err = (e.force - Vec3(0.5, 0, 5)).norm() + std::abs(e.area - 0.5);
    out.push_back(make("loads", "unit_triangle_force", err == 0.0, err, "exact (0.5, 0, 5)"));
  }
  {
    SurfaceMesh panel;
    panel.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
    panel.faces = {Face{0, 1, 2}, Face{0, 2, 3}};
    panel.face_pids = {"panel", "panel"};
    const auto c = integrate_fields(panel, constant_fields(4, 3062.5), base).total;
    const double err = std::abs(c.czs() - 2.0) + std::abs(c.cxs());
    out.push_back(make("loads", "panel_czs", err <= 1e-14, err, "CzS = 2"));
  }

  double worst_rel = 0.0;
  for (double alpha : {-2.0, 0.5, 1.5, 4.0})
    for (const auto& mp : default_map_points()) {
      const auto mesh = gen_wing_flap(alpha, 2 * kDefaultResolution);
      const auto constants = map_constants(mp);
      const auto got = integrate_fields(mesh, manufactured_fields(mesh, mp, constants), constants).total;
      const auto want = quadrature_coefficients(mesh, mp, constants);
      const double moment_scale = std::hypot(want.cmxs(), want.cmys(), want.cmzs());
      worst_rel = std::max({worst_rel, std::abs(got.cxs() - want.cxs()) / std::abs(want.cxs()),
                            std::abs(got.czs() - want.czs()) / std::abs(want.czs())});
      for (int k = 3; k < 6; ++k) worst_rel = std::max(worst_rel, std::abs(got.values[k] - want.values[k]) / moment_scale);
    }
  out.push_back(make("loads", "quadrature_oracle", worst_rel <= 0.01, worst_rel, "<= 0.01 relative",
                     "wing resolution 48, 4 angles x 6 map points"));
  return out;
}

std::vector<Check> run_verify_suite(const std::string& suite) {
  if (suite == "gauge") return verify_gauge();
  if (suite == "unbiased") return verify_unbiased();
  if (suite == "mismatch") return verify_mismatch();
  if (suite == "thinwall") return verify_thinwall();
  if (suite == "gradcheck") return verify_gradcheck();
  if (suite == "loads") return verify_loads();
  if (suite == "all") {
    std::vector<Check> all;
    for (const auto& name : verify_suite_names()) {
      if (name == "all") continue;
      auto part = run_verify_suite(name);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  std::string valid;
  for (const auto& n : verify_suite_names()) valid += (valid.empty() ? "" : ", ") + n;
  fail(ErrorKind::parameter, "unknown suite '" + suite + "'; valid suites: " + valid);
}

}  // namespace gist
