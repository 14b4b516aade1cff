#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gist/error.hpp"
#include "gist/loads.hpp"
#include "gist/operator.hpp"

using namespace gist;

namespace {

// Smooth field on the unit sphere, conditioned on the map vector.
RowMatrix sphere_targets(const SurfaceMesh& mesh, const std::array<double, 5>& map) {
  RowMatrix t(static_cast<Eigen::Index>(mesh.vertex_count()), 4);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& x = mesh.vertices[v];
    t.row(static_cast<Eigen::Index>(v)) << 800.0 * x.x() * x.x() - 300.0 * x.y() + 150.0 * map[1] * x.z() +
                                               2000.0 * map[0],
        20.0 + 5.0 * x.z(), -4.0 * x.x() * (1.0 + 0.2 * map[2]), 3.0 * x.y() * x.z();
  }
  return t;
}

struct Fixture {
  SurfaceMesh mesh;
  GistModel model;
  FieldSample sample;
  MeshContext ctx;
};

Fixture make_fixture(const SurfaceMesh& mesh, int hidden, int blocks, std::uint64_t seed, int r = 32, int k = 6) {
  Fixture f;
  f.mesh = mesh;
  ModelConfig cfg;
  cfg.hidden = hidden;
  cfg.blocks = blocks;
  cfg.k = k;
  cfg.seed = seed;
  f.model = init_model(cfg);
  f.model.r = r;
  f.model.embed_seed = seed + 100;
  const std::array<double, 5> map{-0.01, 0.5, 2.0, 1.0, 3.0};
  f.sample = make_sample(mesh, map, sphere_targets(mesh, map));
  const FieldSample* ptr = &f.sample;
  f.model.norm = Normalization::fit(std::span<const FieldSample* const>(&ptr, 1));
  f.ctx = prepare_context(mesh, f.model);
  return f;
}

double max_abs_diff(const RowMatrix& a, const RowMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("init_model is deterministic and sized by formula") {
  ModelConfig cfg;
  cfg.hidden = 8;
  cfg.blocks = 2;
  const auto a = init_model(cfg), b = init_model(cfg);
  CHECK(a.params.flatten() == b.params.flatten());
  for (int h : {1, 3, 8})
    for (int blocks : {0, 1, 3}) {
      ModelConfig c;
      c.hidden = h;
      c.blocks = blocks;
      CHECK(init_model(c).params.size() == parameter_count(kInputDim, h, blocks));
      CHECK(init_model(c).params.flatten().size() == parameter_count(kInputDim, h, blocks));
    }
  CHECK(parameter_count(11, 8, 2) == 11 * 8 + 8 + 2 * (64 + 8 + 2) + 32 + 4);
  cfg.seed = 2;
  CHECK(init_model(cfg).params.flatten() != a.params.flatten());
  CHECK(a.params.blocks[0].theta1 == 1.0);
  CHECK(a.params.blocks[1].theta2 == 0.0);
  cfg.hidden = 0;
  CHECK_THROWS_AS(init_model(cfg), Error);
}

TEST_CASE("attention weights examples") {
  AttentionGraph attn;
  attn.n = 1;
  attn.offsets = {0, 2};
  attn.neighbors = {0, 0};
  const std::vector<double> k{0.0, std::log(2.0)};
  const auto w = softmax_rows(attn, k, 1.0, 0.0);
  CHECK(w[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const auto shifted = softmax_rows(attn, k, 1.0, 5.0);
  CHECK(std::abs(shifted[0] - w[0]) <= 1e-15);
  CHECK(std::abs(shifted[1] - w[1]) <= 1e-15);

  const std::vector<double> flat{0.3, 0.3};
  const auto u = softmax_rows(attn, flat, 2.5, -1.0);
  CHECK(u[0] == 0.5);
  CHECK(u[1] == 0.5);
}

TEST_CASE("attention graph structure") {
  const auto mesh = gen_icosphere(2);
  auto f = make_fixture(mesh, 4, 1, 3, 64, 10);
  const auto& attn = f.ctx.attn;
  CHECK(attn.n == 162);
  for (int i = 0; i < attn.n; ++i) {
    CHECK(attn.row_size(i) == 11);
    CHECK(attn.neighbors[attn.offsets[i]] == i);
  }
  for (double v : attn.kernel) CHECK(std::isfinite(v));
  const auto w = attention_weights(f.ctx.emb, attn, 3.0, 0.7);
  for (int i = 0; i < attn.n; ++i) {
    double s = 0.0;
    for (int e = attn.offsets[i]; e < attn.offsets[i + 1]; ++e) s += w[e];
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }

  // Small meshes: every list holds min(k + 1, N) entries.
  const auto ico = gen_icosahedron();
  const auto g = build_graph(ico);
  const auto emb = spectral_embed(random_walk_matrix(g), FilterSpec::low_pass(), 16, 1);
  const auto big_k = build_attention(g, emb, 40);
  for (int i = 0; i < 12; ++i) CHECK(big_k.row_size(i) == 12);
  const auto full = build_attention(g, emb, 5, 0, true);
  for (int i = 0; i < 12; ++i) CHECK(full.row_size(i) == 6);
  CHECK_THROWS_AS(build_attention(build_graph(gen_icosphere(1)), emb, 4), Error);
}

TEST_CASE("forward shape on the icosahedron") {
  auto f = make_fixture(gen_icosahedron(), 8, 2, 1, 16, 4);
  const auto out = forward(f.model, f.sample, f.ctx.emb, f.ctx.attn);
  CHECK(out.rows() == 12);
  CHECK(out.cols() == 4);
  CHECK(out.allFinite());
  CHECK(forward(f.model, f.sample, f.ctx.emb, f.ctx.attn) == out);

  const auto other = prepare_context(gen_icosphere(1), f.model);
  CHECK_THROWS_AS(forward(f.model, f.sample, other.emb, other.attn), Error);
}

TEST_CASE("forward is permutation equivariant") {
  auto f = make_fixture(gen_icosphere(1), 6, 2, 5, 24, 6);
  const int n = f.sample.size();
  REQUIRE(n <= 50);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto pmesh = permute_vertices(f.mesh, perm);
  SpectralEmbedding pemb = f.ctx.emb;
  for (int i = 0; i < n; ++i) pemb.phi.row(perm[i]) = f.ctx.emb.phi.row(i);
  const auto pattn = build_attention(build_graph(pmesh), pemb, f.model.config.k);
  FieldSample ps = f.sample;
  for (int i = 0; i < n; ++i) {
    ps.geometry.row(perm[i]) = f.sample.geometry.row(i);
    ps.targets.row(perm[i]) = f.sample.targets.row(i);
  }
  const auto out = forward(f.model, f.sample, f.ctx.emb, f.ctx.attn);
  const auto pout = forward(f.model, ps, pemb, pattn);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, (pout.row(perm[i]) - out.row(i)).cwiseAbs().maxCoeff());
  CHECK(worst <= 1e-12);
}

TEST_CASE("without blocks the model is pointwise") {
  auto f = make_fixture(gen_icosphere(1), 8, 0, 2, 16, 4);
  f.sample.geometry.row(7) = f.sample.geometry.row(3);
  const auto out = forward(f.model, f.sample, f.ctx.emb, f.ctx.attn);
  CHECK(out.row(7) == out.row(3));
}

TEST_CASE("forward depends on the embedding only through inner products") {
  for (int level : {0, 1}) {
    auto f = make_fixture(gen_icosphere(level), 6, 2, 7, 20, 5);
    REQUIRE(f.sample.size() <= 100);
    const Eigen::MatrixXd q = random_orthogonal(f.model.r, 77);
    SpectralEmbedding rotated = f.ctx.emb;
    rotated.phi = f.ctx.emb.phi * q;
    const auto attn_q = build_attention(build_graph(f.mesh), rotated, f.model.config.k);
    CHECK(attn_q.neighbors == f.ctx.attn.neighbors);
    const auto a = forward(f.model, f.sample, f.ctx.emb, f.ctx.attn);
    const auto b = forward(f.model, f.sample, rotated, attn_q);
    const auto c = forward(f.model, f.sample, rotated, f.ctx.attn);
    CHECK(max_abs_diff(a, b) / f.model.norm.out_std.maxCoeff() <= 1e-10);
    CHECK(max_abs_diff(forward_normalized(f.model, f.sample, f.ctx.emb, f.ctx.attn),
                       forward_normalized(f.model, f.sample, rotated, f.ctx.attn)) <= 1e-10);
    CHECK(max_abs_diff(b, c) == 0.0);
  }
}

TEST_CASE("loss examples") {
  RowMatrix t(2, 4);
  t << 1, 2, 3, 4, 5, 6, 7, 8;
  const Eigen::RowVectorXd unit = Eigen::RowVectorXd::Ones(4);
  CHECK(loss(t, t, unit) == 0.0);
  CHECK(loss((t.array() + 1.0).matrix(), t, unit) == 1.0);
  RowMatrix p = t;
  p(0, 0) += 2.0;  // (2/2)^2 = 1 with std 2 on channel 0
  p(1, 3) -= 3.0;  // 9
  Eigen::RowVectorXd sd(4);
  sd << 2, 1, 1, 1;
  CHECK(loss(p, t, sd) == doctest::Approx(10.0 / 8.0).epsilon(1e-15));
  CHECK_THROWS_AS(loss(t.topRows(1), t, unit), Error);
}

TEST_CASE("gradient basics") {
  auto f = make_fixture(gen_icosphere(1), 5, 2, 11, 16, 5);
  FieldSample exact = f.sample;
  exact.targets = forward(f.model, f.sample, f.ctx.emb, f.ctx.attn);
  const auto zero = gradients(f.model, exact, f.ctx.emb, f.ctx.attn);
  CHECK(zero.loss <= 1e-24);
  for (double g : zero.grad.flatten()) CHECK(std::abs(g) <= 1e-12);

  const auto one = gradients(f.model, f.sample, f.ctx.emb, f.ctx.attn);
  const auto two = gradients(f.model, f.sample, f.ctx.emb, f.ctx.attn, 2.0);
  const auto g1 = one.grad.flatten(), g2 = two.grad.flatten();
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == 2.0 * g1[i]);
  CHECK(two.loss == 2.0 * one.loss);
  const auto pred = forward(f.model, f.sample, f.ctx.emb, f.ctx.attn);
  CHECK(one.loss == doctest::Approx(loss(pred, f.sample.targets, f.model.norm.out_std)).epsilon(1e-12));
}

TEST_CASE("gradients match central finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto f = make_fixture(gen_icosphere(1), 6, 2, seed, 16, 5);
    REQUIRE(f.sample.size() <= 50);
    // Sharpen attention so the kernel path carries real gradient.
    for (auto& b : f.model.params.blocks) b.theta1 = 4.0 + static_cast<double>(seed);
    const auto r = gradient_check(f.model, f.sample, f.ctx.emb, f.ctx.attn);
    CHECK(r.checked == f.model.params.size());
    CHECK(r.max_rel_error <= 1e-5);
  }
}

TEST_CASE("training basics") {
  auto f = make_fixture(gen_icosahedron(), 8, 1, 4, 16, 4);
  const Example ex{&f.sample, &f.ctx};
  TrainOptions opts;
  opts.epochs = 0;
  const auto before = f.model.params.flatten();
  CHECK(train(f.model, std::span<const Example>(&ex, 1), opts).empty());
  CHECK(f.model.params.flatten() == before);

  GistModel a = f.model, b = f.model;
  opts.epochs = 20;
  opts.learning_rate = 0.01;
  opts.seed = 3;
  const auto ha = train(a, std::span<const Example>(&ex, 1), opts);
  const auto hb = train(b, std::span<const Example>(&ex, 1), opts);
  CHECK(ha.size() == 20);
  CHECK(ha == hb);
  CHECK(a.params.flatten() == b.params.flatten());

  GistModel wild = f.model;
  opts.learning_rate = 1e8;
  try {
    train(wild, std::span<const Example>(&ex, 1), opts);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::divergence);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("single-sample overfit") {
  auto f = make_fixture(gen_icosphere(1), 16, 2, 21, 16, 6);
  REQUIRE(f.sample.size() <= 100);
  const Example ex{&f.sample, &f.ctx};
  TrainOptions opts;
  opts.epochs = 2000;
  opts.learning_rate = 0.02;
  opts.seed = 1;
  const auto initial = gradients(f.model, f.sample, f.ctx.emb, f.ctx.attn).loss;
  const auto history = train(f.model, std::span<const Example>(&ex, 1), opts);
  const auto final_loss = gradients(f.model, f.sample, f.ctx.emb, f.ctx.attn).loss;
  CHECK(final_loss <= 1e-3 * initial);
  CHECK(history.back() < history.front());
  for (const auto& b : f.model.params.blocks) {
    const auto w = attention_weights(f.ctx.emb, f.ctx.attn, b.theta1, b.theta2);
    for (int i = 0; i < f.ctx.attn.n; ++i) {
      double s = 0.0;
      for (int e = f.ctx.attn.offsets[i]; e < f.ctx.attn.offsets[i + 1]; ++e) s += w[e];
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("checkpoint round trip") {
  auto f = make_fixture(gen_icosahedron(), 5, 2, 8, 16, 4);
  f.model.domain_min = -2.0;
  f.model.domain_max = 3.0;
  f.model.params.blocks[1].theta2 = 0.1 + 1e-17;
  const auto text = checkpoint_to_json(f.model);
  CHECK(text.find("\"gist-mini-1\"") != std::string::npos);
  const auto back = checkpoint_from_json(text);
  CHECK(back.params.flatten() == f.model.params.flatten());
  CHECK(back.norm.out_std == f.model.norm.out_std);
  CHECK(back.filter.coefficients == f.model.filter.coefficients);
  CHECK(back.r == f.model.r);
  CHECK(back.domain_max == 3.0);
  CHECK(checkpoint_to_json(back) == text);
  CHECK(forward(back, f.sample, f.ctx.emb, f.ctx.attn) == forward(f.model, f.sample, f.ctx.emb, f.ctx.attn));
  CHECK_THROWS_AS(checkpoint_from_json("{}"), Error);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.json"), Error);
}

TEST_CASE("model trained on level 2 transfers to level 3") {
  const auto coarse = gen_icosphere(2), fine = gen_icosphere(3);
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.blocks = 2;
  cfg.k = 8;
  cfg.seed = 5;
  auto model = init_model(cfg);
  model.r = 32;
  const std::vector<std::array<double, 5>> maps{
      {-0.01, 0.5, 2.0, 1.0, 3.0}, {0.0, 0.0, 0.0, 0.0, 0.0}, {0.01, -0.5, -2.0, -1.0, -3.0}, {0.005, 1.0, 1.0, 0.0, 0.0}};
  std::vector<FieldSample> train_set;
  for (const auto& m : maps) train_set.push_back(make_sample(coarse, m, sphere_targets(coarse, m)));
  std::vector<const FieldSample*> ptrs;
  for (const auto& s : train_set) ptrs.push_back(&s);
  model.norm = Normalization::fit(ptrs);
  const auto ctx = prepare_context(coarse, model);
  std::vector<Example> ex;
  for (const auto& s : train_set) ex.push_back({&s, &ctx});
  TrainOptions opts;
  opts.epochs = 400;
  opts.learning_rate = 0.01;
  opts.final_learning_rate = 1e-4;
  train(model, ex, opts);

  const std::array<double, 5> held{-0.005, 0.25, 1.0, 0.5, 1.5};
  auto pressure_r2 = [&](const SurfaceMesh& mesh) {
    const auto s = make_sample(mesh, held, sphere_targets(mesh, held));
    const auto c = prepare_context(mesh, model);
    const auto pred = forward(model, s, c.emb, c.attn);
    std::vector<double> p, t;
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      p.push_back(pred(i, 0));
      t.push_back(s.targets(i, 0));
    }
    return field_metrics(p, t).r_squared();
  };
  const double r2_coarse = pressure_r2(coarse), r2_fine = pressure_r2(fine);
  MESSAGE("level 2 R2 " << r2_coarse << ", level 3 R2 " << r2_fine);
  CHECK(r2_coarse > 0.9);
  CHECK(r2_fine >= 0.9 * r2_coarse);
}
