#include "gist/operator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gist/error.hpp"

namespace gist {

// ---- samples ---------------------------------------------------------------

RowMatrix FieldSample::inputs() const {
  RowMatrix x(geometry.rows(), kInputDim);
  x.leftCols(kGeometryFeatures) = geometry;
  for (int c = 0; c < kMapFeatures; ++c) x.col(kGeometryFeatures + c).setConstant(map[c]);
  return x;
}

void FieldSample::validate() const {
  require(geometry.cols() == kGeometryFeatures && geometry.rows() > 0, ErrorKind::shape,
          "sample geometry must be N x 6");
  require(geometry.allFinite(), ErrorKind::shape, "sample geometry is not finite");
  if (targets.size() > 0) {
    require(targets.rows() == geometry.rows() && targets.cols() == kOutputDim, ErrorKind::shape,
            "sample targets must be N x 4");
    require(targets.allFinite(), ErrorKind::shape, "sample targets are not finite");
  }
}

FieldSample make_sample(const SurfaceMesh& mesh, const std::array<double, kMapFeatures>& map, RowMatrix targets) {
  FieldSample s;
  const auto normals = vertex_normals(mesh);
  s.geometry.resize(static_cast<Eigen::Index>(mesh.vertex_count()), kGeometryFeatures);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    s.geometry.row(i).head<3>() = mesh.vertices[v].transpose();
    s.geometry.row(i).tail<3>() = normals[v].transpose();
  }
  s.map = map;
  s.targets = std::move(targets);
  s.validate();
  return s;
}

// ---- attention -------------------------------------------------------------

AttentionGraph build_attention(const MeshGraph& graph, const SpectralEmbedding& emb, int k, int radius, bool full) {
  const int n = graph.vertex_count();
  require(emb.vertex_count() == n, ErrorKind::shape,
          "embedding has " + std::to_string(emb.vertex_count()) + " rows for a " + std::to_string(n) + "-vertex mesh");
  require(k >= 1, ErrorKind::parameter, "attention k must be >= 1");
  require(!full || n <= 2000, ErrorKind::size, "full attention is limited to N <= 2000");
  if (radius <= 0) radius = std::max(1, 2 * emb.filter.degree());
  const int want = std::min(k + 1, n);

  AttentionGraph attn;
  attn.n = n;
  attn.offsets.assign(1, 0);
  std::vector<int> hop(n, -1), candidates;
  std::vector<std::pair<double, int>> scored;
  for (int i = 0; i < n; ++i) {
    candidates.clear();
    if (full) {
      candidates.resize(n);
      std::iota(candidates.begin(), candidates.end(), 0);
    } else {
      // Bounded BFS; widen past `radius` only if too few vertices are reachable.
      candidates.push_back(i);
      hop[i] = 0;
      for (std::size_t head = 0; head < candidates.size(); ++head) {
        const int v = candidates[head];
        if (hop[v] >= radius && static_cast<int>(candidates.size()) >= want) break;
        for (int w : graph.neighbors(v))
          if (hop[w] < 0) {
            hop[w] = hop[v] + 1;
            candidates.push_back(w);
          }
      }
      for (int v : candidates) hop[v] = -1;
      for (int v = 0; static_cast<int>(candidates.size()) < want && v < n; ++v)
        if (std::find(candidates.begin(), candidates.end(), v) == candidates.end()) candidates.push_back(v);
    }
    scored.clear();
    for (int j : candidates)
      if (j != i) scored.emplace_back(emb.phi.row(i).dot(emb.phi.row(j)), j);
    const auto cut = scored.begin() + (want - 1);
    std::partial_sort(scored.begin(), cut, scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    attn.neighbors.push_back(i);
    attn.kernel.push_back(emb.phi.row(i).squaredNorm());
    for (auto it = scored.begin(); it != cut; ++it) {
      attn.neighbors.push_back(it->second);
      attn.kernel.push_back(it->first);
    }
    attn.offsets.push_back(static_cast<int>(attn.neighbors.size()));
  }
  return attn;
}

std::vector<double> attention_kernels(const SpectralEmbedding& emb, const AttentionGraph& attn) {
  require(emb.vertex_count() == attn.n, ErrorKind::shape, "embedding and attention graph sizes differ");
  std::vector<double> out(attn.neighbors.size());
  for (int i = 0; i < attn.n; ++i)
    for (int e = attn.offsets[i]; e < attn.offsets[i + 1]; ++e)
      out[e] = emb.phi.row(i).dot(emb.phi.row(attn.neighbors[e]));
  return out;
}

std::vector<double> softmax_rows(const AttentionGraph& attn, std::span<const double> kernels, double theta1,
                                 double theta2) {
  std::vector<double> w(kernels.size());
  for (int i = 0; i < attn.n; ++i) {
    const int b = attn.offsets[i], e = attn.offsets[i + 1];
    double top = -INFINITY;
    for (int x = b; x < e; ++x) {
      w[x] = theta1 * kernels[x] + theta2;
      top = std::max(top, w[x]);
    }
    double sum = 0.0;
    for (int x = b; x < e; ++x) sum += (w[x] = std::exp(w[x] - top));
    for (int x = b; x < e; ++x) w[x] /= sum;
  }
  return w;
}

std::vector<double> attention_weights(const SpectralEmbedding& emb, const AttentionGraph& attn, double theta1,
                                      double theta2) {
  const auto k = attention_kernels(emb, attn);
  return softmax_rows(attn, k, theta1, theta2);
}

// ---- parameters ------------------------------------------------------------

void ModelConfig::validate() const {
  require(hidden >= 1, ErrorKind::parameter, "hidden width must be >= 1");
  require(blocks >= 0, ErrorKind::parameter, "block count must be >= 0");
  require(k >= 1, ErrorKind::parameter, "attention k must be >= 1");
}

std::size_t parameter_count(int in, int h, int blocks) {
  const auto H = static_cast<std::size_t>(h);
  return static_cast<std::size_t>(in) * H + H + static_cast<std::size_t>(blocks) * (H * H + H + 2) +
         H * kOutputDim + kOutputDim;
}

std::size_t Params::size() const {
  std::size_t s = enc_w.size() + enc_b.size() + dec_w.size() + dec_b.size();
  for (const auto& b : blocks) s += b.w.size() + b.b.size() + 2;
  return s;
}

namespace {

template <typename F>
void visit(Params& p, F&& f) {
  auto span_of = [&](auto& m) { f(std::span<double>(m.data(), static_cast<std::size_t>(m.size()))); };
  span_of(p.enc_w);
  span_of(p.enc_b);
  for (auto& b : p.blocks) {
    span_of(b.w);
    span_of(b.b);
    f(std::span<double>(&b.theta1, 1));
    f(std::span<double>(&b.theta2, 1));
  }
  span_of(p.dec_w);
  span_of(p.dec_b);
}

}  // namespace

std::vector<double> Params::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  visit(const_cast<Params&>(*this), [&](std::span<double> s) { out.insert(out.end(), s.begin(), s.end()); });
  return out;
}

void Params::unflatten(std::span<const double> values) {
  require(values.size() == size(), ErrorKind::shape, "parameter vector length mismatch");
  std::size_t at = 0;
  visit(*this, [&](std::span<double> s) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), s.size(), s.begin());
    at += s.size();
  });
}

Params Params::zeros_like() const {
  Params z = *this;
  visit(z, [](std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); });
  return z;
}

bool Params::all_finite() const {
  bool ok = true;
  visit(const_cast<Params&>(*this), [&](std::span<double> s) {
    for (double v : s) ok = ok && std::isfinite(v);
  });
  return ok;
}

Normalization Normalization::identity() {
  Normalization n;
  n.in_mean = Eigen::RowVectorXd::Zero(kInputDim);
  n.in_std = Eigen::RowVectorXd::Ones(kInputDim);
  n.out_mean = Eigen::RowVectorXd::Zero(kOutputDim);
  n.out_std = Eigen::RowVectorXd::Ones(kOutputDim);
  return n;
}

Normalization Normalization::fit(std::span<const FieldSample* const> samples) {
  require(!samples.empty(), ErrorKind::parameter, "cannot fit normalization on no samples");
  Eigen::RowVectorXd s1 = Eigen::RowVectorXd::Zero(kInputDim), s2 = s1;
  Eigen::RowVectorXd t1 = Eigen::RowVectorXd::Zero(kOutputDim), t2 = t1;
  double count = 0.0;
  for (const auto* s : samples) {
    s->validate();
    require(s->targets.rows() == s->geometry.rows(), ErrorKind::shape, "training sample has no targets");
    const RowMatrix x = s->inputs();
    s1 += x.colwise().sum();
    s2 += x.array().square().matrix().colwise().sum();
    t1 += s->targets.colwise().sum();
    t2 += s->targets.array().square().matrix().colwise().sum();
    count += static_cast<double>(x.rows());
  }
  auto finish = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, Eigen::RowVectorXd& mean,
                    Eigen::RowVectorXd& sd) {
    mean = a / count;
    sd = (b / count - mean.array().square().matrix()).cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index c = 0; c < sd.size(); ++c)
      if (sd(c) <= 1e-12 * std::max(1.0, std::abs(mean(c)))) sd(c) = 1.0;
  };
  Normalization n;
  finish(s1, s2, n.in_mean, n.in_std);
  finish(t1, t2, n.out_mean, n.out_std);
  return n;
}

GistModel init_model(const ModelConfig& config) {
  config.validate();
  GistModel m;
  m.config = config;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](RowMatrix& w, int rows, int cols) {
    w.resize(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * normal(rng);
  };
  const int h = config.hidden;
  fill(m.params.enc_w, kInputDim, h);
  m.params.enc_b = Eigen::RowVectorXd::Zero(h);
  m.params.blocks.resize(config.blocks);
  for (auto& b : m.params.blocks) {
    fill(b.w, h, h);
    b.b = Eigen::RowVectorXd::Zero(h);
    b.theta1 = 1.0;
    b.theta2 = 0.0;
  }
  fill(m.params.dec_w, h, kOutputDim);
  m.params.dec_b = Eigen::RowVectorXd::Zero(kOutputDim);
  return m;
}

MeshContext prepare_context(const SurfaceMesh& mesh, const GistModel& model) {
  const auto graph = build_graph(mesh);
  MeshContext ctx;
  ctx.emb = spectral_embed(random_walk_matrix(graph), model.filter, model.r, model.embed_seed);
  ctx.attn = build_attention(graph, ctx.emb, model.config.k, 0, model.config.full_attention);
  return ctx;
}

// ---- forward / backward ----------------------------------------------------

namespace {

struct Cache {
  RowMatrix x;                             // normalized inputs
  std::vector<RowMatrix> h;                // B + 1 hidden states
  std::vector<RowMatrix> v;                // per block values
  std::vector<std::vector<double>> a;      // per block attention weights
  std::vector<double> kernels;
  RowMatrix out;                           // normalized outputs
};

void check_inputs(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                  const AttentionGraph& attn) {
  sample.validate();
  require(emb.vertex_count() == sample.size(), ErrorKind::shape,
          "embedding has " + std::to_string(emb.vertex_count()) + " rows, sample has " +
              std::to_string(sample.size()) + " vertices");
  require(attn.n == sample.size(), ErrorKind::shape, "attention graph size does not match the sample");
  require(static_cast<int>(model.params.blocks.size()) == model.config.blocks, ErrorKind::shape,
          "model block count mismatch");
}

// M = A V over the attention rows.
RowMatrix mix(const AttentionGraph& attn, const std::vector<double>& a, const RowMatrix& v) {
  RowMatrix m = RowMatrix::Zero(v.rows(), v.cols());
  for (int i = 0; i < attn.n; ++i)
    for (int e = attn.offsets[i]; e < attn.offsets[i + 1]; ++e) m.row(i) += a[e] * v.row(attn.neighbors[e]);
  return m;
}

void run_forward(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                 const AttentionGraph& attn, Cache& c) {
  check_inputs(model, sample, emb, attn);
  const auto& p = model.params;
  c.x = ((sample.inputs().rowwise() - model.norm.in_mean).array().rowwise() / model.norm.in_std.array()).matrix();
  c.h.clear();
  c.v.clear();
  c.a.clear();
  c.h.push_back(((c.x * p.enc_w).rowwise() + p.enc_b).array().tanh().matrix());
  if (!p.blocks.empty()) c.kernels = attention_kernels(emb, attn);
  for (const auto& b : p.blocks) {
    c.v.push_back((c.h.back() * b.w).rowwise() + b.b);
    c.a.push_back(softmax_rows(attn, c.kernels, b.theta1, b.theta2));
    c.h.push_back((c.h.back() + mix(attn, c.a.back(), c.v.back())).array().tanh().matrix());
  }
  c.out = (c.h.back() * p.dec_w).rowwise() + p.dec_b;
}

RowMatrix normalized_targets(const GistModel& model, const FieldSample& sample) {
  require(sample.targets.rows() == sample.geometry.rows(), ErrorKind::shape, "sample has no targets");
  return ((sample.targets.rowwise() - model.norm.out_mean).array().rowwise() / model.norm.out_std.array()).matrix();
}

}  // namespace

RowMatrix forward_normalized(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                             const AttentionGraph& attn) {
  Cache c;
  run_forward(model, sample, emb, attn, c);
  return c.out;
}

RowMatrix forward(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                  const AttentionGraph& attn) {
  const RowMatrix out = forward_normalized(model, sample, emb, attn);
  return ((out.array().rowwise() * model.norm.out_std.array()).rowwise() + model.norm.out_mean.array()).matrix();
}

double loss(const RowMatrix& pred, const RowMatrix& target, const Eigen::RowVectorXd& channel_std) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(), ErrorKind::shape,
          "prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) + ", target is " +
              std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
  require(channel_std.size() == pred.cols(), ErrorKind::shape, "one standard deviation per channel required");
  require(pred.size() > 0, ErrorKind::shape, "empty prediction");
  const Eigen::ArrayXXd z = (pred - target).array().rowwise() / channel_std.array();
  return z.square().sum() / static_cast<double>(pred.size());
}

LossAndGrad gradients(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                      const AttentionGraph& attn, double scale) {
  Cache c;
  run_forward(model, sample, emb, attn, c);
  const RowMatrix y = normalized_targets(model, sample);
  const auto& p = model.params;

  LossAndGrad out;
  const RowMatrix diff = c.out - y;
  out.loss = diff.squaredNorm() / static_cast<double>(diff.size());
  out.grad = p.zeros_like();
  auto& g = out.grad;

  RowMatrix d_out = diff * (2.0 * scale / static_cast<double>(diff.size()));
  g.dec_w = c.h.back().transpose() * d_out;
  g.dec_b = d_out.colwise().sum();
  RowMatrix dh = d_out * p.dec_w.transpose();

  for (int bi = static_cast<int>(p.blocks.size()) - 1; bi >= 0; --bi) {
    const auto& b = p.blocks[bi];
    const auto& a = c.a[bi];
    const RowMatrix& h_in = c.h[bi];
    const RowMatrix& h_out = c.h[bi + 1];
    const RowMatrix& v = c.v[bi];
    const RowMatrix dz = (dh.array() * (1.0 - h_out.array().square())).matrix();

    RowMatrix dv = RowMatrix::Zero(v.rows(), v.cols());
    double dtheta1 = 0.0, dtheta2 = 0.0;
    std::vector<double> da;
    for (int i = 0; i < attn.n; ++i) {
      const int s = attn.offsets[i], e = attn.offsets[i + 1];
      double weighted = 0.0;
      da.resize(e - s);
      for (int x = s; x < e; ++x) {
        const int j = attn.neighbors[x];
        dv.row(j) += a[x] * dz.row(i);
        da[x - s] = dz.row(i).dot(v.row(j));
        weighted += a[x] * da[x - s];
      }
      for (int x = s; x < e; ++x) {
        const double dl = a[x] * (da[x - s] - weighted);
        dtheta1 += dl * c.kernels[x];
        dtheta2 += dl;
      }
    }
    g.blocks[bi].w = h_in.transpose() * dv;
    g.blocks[bi].b = dv.colwise().sum();
    g.blocks[bi].theta1 = dtheta1;
    g.blocks[bi].theta2 = dtheta2;
    dh = dz + dv * b.w.transpose();
  }

  const RowMatrix dz0 = (dh.array() * (1.0 - c.h[0].array().square())).matrix();
  g.enc_w = c.x.transpose() * dz0;
  g.enc_b = dz0.colwise().sum();
  out.loss *= scale;
  return out;
}

GradCheckResult gradient_check(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                               const AttentionGraph& attn, double step, double floor) {
  const auto analytic = gradients(model, sample, emb, attn).grad.flatten();
  const RowMatrix y = normalized_targets(model, sample);
  GistModel probe = model;
  auto theta = model.params.flatten();
  auto eval = [&](std::size_t i, double value) {
    const double saved = theta[i];
    theta[i] = value;
    probe.params.unflatten(theta);
    theta[i] = saved;
    const RowMatrix out = forward_normalized(probe, sample, emb, attn);
    return (out - y).squaredNorm() / static_cast<double>(out.size());
  };
  GradCheckResult r;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double fd = (eval(i, theta[i] + step) - eval(i, theta[i] - step)) / (2.0 * step);
    const double rel = std::abs(analytic[i] - fd) / std::max({std::abs(analytic[i]), std::abs(fd), floor});
    if (rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst_index = i;
    }
    ++r.checked;
  }
  return r;
}

// ---- training --------------------------------------------------------------

std::vector<double> train(GistModel& model, std::span<const Example> data, const TrainOptions& opts) {
  std::vector<double> history;
  if (opts.epochs <= 0) return history;
  require(!data.empty(), ErrorKind::parameter, "training set is empty");
  require(opts.learning_rate > 0.0 && std::isfinite(opts.learning_rate), ErrorKind::parameter,
          "learning rate must be positive");
  require(opts.momentum >= 0.0 && opts.momentum < 1.0, ErrorKind::parameter, "momentum must be in [0, 1)");
  for (const auto& ex : data) require(ex.sample && ex.context, ErrorKind::parameter, "incomplete training example");

  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  auto theta = model.params.flatten();
  std::vector<double> velocity(theta.size(), 0.0);
  const double lr_end = opts.final_learning_rate < 0.0 ? opts.learning_rate : opts.final_learning_rate;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const double t = opts.epochs > 1 ? static_cast<double>(epoch) / (opts.epochs - 1) : 0.0;
    const double lr = lr_end + 0.5 * (opts.learning_rate - lr_end) * (1.0 + std::cos(std::numbers::pi * t));
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const auto& ex = data[idx];
      const auto lg = gradients(model, *ex.sample, ex.context->emb, ex.context->attn);
      if (!std::isfinite(lg.loss))
        fail(ErrorKind::divergence, "non-finite loss in epoch " + std::to_string(epoch + 1));
      total += lg.loss;
      const auto g = lg.grad.flatten();
      for (std::size_t i = 0; i < theta.size(); ++i) {
        velocity[i] = opts.momentum * velocity[i] + g[i];
        theta[i] -= lr * velocity[i];
      }
      model.params.unflatten(theta);
      if (!model.params.all_finite())
        fail(ErrorKind::divergence, "non-finite parameters in epoch " + std::to_string(epoch + 1));
    }
    history.push_back(total / static_cast<double>(data.size()));
    if (opts.on_epoch) opts.on_epoch(epoch + 1, history.back());
  }
  return history;
}

// ---- checkpoint ------------------------------------------------------------

namespace {

using nlohmann::json;

json to_list(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>& m) {
  return json(std::vector<double>(m.data(), m.data() + m.size()));
}

void from_list(const json& j, RowMatrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  const auto v = j.get<std::vector<double>>();
  require(static_cast<Eigen::Index>(v.size()) == rows * cols, ErrorKind::parse,
          "checkpoint array '" + name + "' has " + std::to_string(v.size()) + " values, expected " +
              std::to_string(rows * cols));
  m.resize(rows, cols);
  std::copy(v.begin(), v.end(), m.data());
}

void from_list(const json& j, Eigen::RowVectorXd& m, Eigen::Index cols, const std::string& name) {
  RowMatrix tmp;
  from_list(j, tmp, 1, cols, name);
  m = tmp.row(0);
}

}  // namespace

std::string checkpoint_to_json(const GistModel& m) {
  json j;
  j["version"] = "gist-mini-1";
  j["config"] = {{"hidden", m.config.hidden},
                 {"blocks", m.config.blocks},
                 {"k", m.config.k},
                 {"seed", m.config.seed},
                 {"full_attention", m.config.full_attention},
                 {"input_dim", kInputDim}};
  j["embedding"] = {{"filter", m.filter.coefficients}, {"r", m.r}, {"seed", m.embed_seed}};
  j["domain"] = {{"alpha_min", m.domain_min}, {"alpha_max", m.domain_max}};
  j["normalization"] = {{"in_mean", to_list(m.norm.in_mean)},
                        {"in_std", to_list(m.norm.in_std)},
                        {"out_mean", to_list(m.norm.out_mean)},
                        {"out_std", to_list(m.norm.out_std)}};
  json p;
  p["enc_w"] = to_list(m.params.enc_w);
  p["enc_b"] = to_list(m.params.enc_b);
  p["blocks"] = json::array();
  for (const auto& b : m.params.blocks)
    p["blocks"].push_back({{"w", to_list(b.w)}, {"b", to_list(b.b)}, {"theta1", b.theta1}, {"theta2", b.theta2}});
  p["dec_w"] = to_list(m.params.dec_w);
  p["dec_b"] = to_list(m.params.dec_b);
  j["parameters"] = p;
  return j.dump(1) + "\n";
}

GistModel checkpoint_from_json(const std::string& text) {
  GistModel m;
  try {
    const json j = json::parse(text);
    const auto version = j.at("version").get<std::string>();
    require(version == "gist-mini-1", ErrorKind::parse, "unsupported checkpoint version '" + version + "'");
    const auto& c = j.at("config");
    m.config.hidden = c.at("hidden").get<int>();
    m.config.blocks = c.at("blocks").get<int>();
    m.config.k = c.at("k").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.full_attention = c.at("full_attention").get<bool>();
    require(c.at("input_dim").get<int>() == kInputDim, ErrorKind::parse, "checkpoint input width mismatch");
    m.config.validate();
    const auto& e = j.at("embedding");
    m.filter.coefficients = e.at("filter").get<std::vector<double>>();
    m.filter.validate();
    m.r = e.at("r").get<int>();
    m.embed_seed = e.at("seed").get<std::uint64_t>();
    m.domain_min = j.at("domain").at("alpha_min").get<double>();
    m.domain_max = j.at("domain").at("alpha_max").get<double>();
    const auto& n = j.at("normalization");
    from_list(n.at("in_mean"), m.norm.in_mean, kInputDim, "in_mean");
    from_list(n.at("in_std"), m.norm.in_std, kInputDim, "in_std");
    from_list(n.at("out_mean"), m.norm.out_mean, kOutputDim, "out_mean");
    from_list(n.at("out_std"), m.norm.out_std, kOutputDim, "out_std");
    const int h = m.config.hidden;
    const auto& p = j.at("parameters");
    from_list(p.at("enc_w"), m.params.enc_w, kInputDim, h, "enc_w");
    from_list(p.at("enc_b"), m.params.enc_b, h, "enc_b");
    const auto& blocks = p.at("blocks");
    require(static_cast<int>(blocks.size()) == m.config.blocks, ErrorKind::parse, "checkpoint block count mismatch");
    for (const auto& b : blocks) {
      BlockParams bp;
      from_list(b.at("w"), bp.w, h, h, "block w");
      from_list(b.at("b"), bp.b, h, "block b");
      bp.theta1 = b.at("theta1").get<double>();
      bp.theta2 = b.at("theta2").get<double>();
      m.params.blocks.push_back(std::move(bp));
    }
    from_list(p.at("dec_w"), m.params.dec_w, h, kOutputDim, "dec_w");
    from_list(p.at("dec_b"), m.params.dec_b, kOutputDim, "dec_b");
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("checkpoint: ") + e.what());
  }
  require(m.params.all_finite(), ErrorKind::parse, "checkpoint has non-finite parameters");
  return m;
}

void save_checkpoint(const GistModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(model);
  require(static_cast<bool>(out), ErrorKind::io, "write failed for '" + path + "'");
}

GistModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace gist
