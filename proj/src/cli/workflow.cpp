#include "gist/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "gist/error.hpp"

namespace gist {

void TrainingConfig::validate() const {
  model.validate();
  filter.validate();
  require(r >= 1, ErrorKind::parameter, "r must be >= 1");
  require(epochs >= 0, ErrorKind::parameter, "epochs must be >= 0");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorKind::parameter, "learning rate must be > 0");
  require(final_learning_rate < 0.0 || (std::isfinite(final_learning_rate) && final_learning_rate <= learning_rate),
          ErrorKind::parameter, "final learning rate must be <= learning rate");
  require(momentum >= 0.0 && momentum < 1.0, ErrorKind::parameter, "momentum must be in [0, 1)");
}

LoadedDataset load_dataset(const DatasetManifest& manifest) {
  LoadedDataset d;
  d.manifest = manifest;
  d.meshes.resize(manifest.configurations.size());
  for (const auto& c : manifest.configurations) {
    require(c.id >= 0 && c.id < static_cast<int>(d.meshes.size()), ErrorKind::parse,
            "configuration id out of range: " + std::to_string(c.id));
    d.meshes[c.id] = read_mesh_file((manifest.root / c.mesh).string());
  }
  d.samples.reserve(manifest.samples.size());
  for (const auto& s : manifest.samples) {
    const auto& mesh = d.meshes.at(s.configuration);
    auto fields = read_fields_file((manifest.root / s.fields).string());
    require(fields.rows() == static_cast<Eigen::Index>(mesh.vertex_count()), ErrorKind::shape,
            s.fields + " does not match its mesh");
    d.samples.push_back(make_sample(mesh, manifest.map_point(s.map_point).values(), std::move(fields)));
  }
  return d;
}

TrainResult train_surrogate(const LoadedDataset& data, const TrainingConfig& config,
                            const std::function<void(int, double)>& on_epoch) {
  config.validate();
  const auto& m = data.manifest;
  TrainResult out;
  out.model = init_model(config.model);
  out.model.r = config.r;
  out.model.filter = config.filter;
  out.model.embed_seed = config.embed_seed;
  out.model.domain_min = m.alpha_min(Split::train);
  out.model.domain_max = m.alpha_max(Split::train);

  std::vector<MeshContext> contexts(data.meshes.size());
  std::vector<bool> used(data.meshes.size(), false);
  std::vector<const FieldSample*> train_samples;
  std::vector<Example> examples;
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    if (m.samples[i].split != Split::train) continue;
    used[m.samples[i].configuration] = true;
    train_samples.push_back(&data.samples[i]);
  }
  require(!train_samples.empty(), ErrorKind::parameter, "dataset has no training samples");
  for (std::size_t c = 0; c < contexts.size(); ++c)
    if (used[c]) contexts[c] = prepare_context(data.meshes[c], out.model);
  for (std::size_t i = 0; i < m.samples.size(); ++i)
    if (m.samples[i].split == Split::train) examples.push_back({&data.samples[i], &contexts[m.samples[i].configuration]});
  out.model.norm = Normalization::fit(train_samples);

  TrainOptions opts;
  opts.epochs = config.epochs;
  opts.learning_rate = config.learning_rate;
  opts.final_learning_rate = config.final_learning_rate;
  opts.momentum = config.momentum;
  opts.seed = config.shuffle_seed;
  if (on_epoch) opts.on_epoch = on_epoch;
  const auto t0 = std::chrono::steady_clock::now();
  out.history = train(out.model, examples, opts);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

double pct_error(double got, double want) { return 100.0 * std::abs(got - want) / std::abs(want); }

std::vector<double> column(const RowMatrix& m, int c) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, c);
  return v;
}

}  // namespace

Evaluation evaluate(const GistModel& model, const LoadedDataset& data, const std::vector<Split>& splits) {
  const auto& m = data.manifest;
  Evaluation ev;
  std::vector<std::optional<MeshContext>> contexts(data.meshes.size());
  std::vector<double> all_pred, all_true;
  double sum_cx = 0.0, sum_cz = 0.0;
  ev.min_r2 = 1.0;
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    const auto& s = m.samples[i];
    if (std::find(splits.begin(), splits.end(), s.split) == splits.end()) continue;
    auto& ctx = contexts[s.configuration];
    if (!ctx) ctx = prepare_context(data.meshes[s.configuration], model);
    const auto& mp = m.map_point(s.map_point);
    const auto pred = forward(model, data.samples[i], ctx->emb, ctx->attn);

    SampleEvaluation row;
    row.configuration = s.configuration;
    row.map_point = s.map_point;
    row.alpha = m.configuration(s.configuration).alpha;
    row.split = s.split;
    const auto p = column(pred, 0), t = column(data.samples[i].targets, 0);
    const auto metrics = field_metrics(p, t);
    row.pressure_r2 = metrics.r_squared();
    row.pressure_mse = metrics.mse;
    all_pred.insert(all_pred.end(), p.begin(), p.end());
    all_true.insert(all_true.end(), t.begin(), t.end());
    row.predicted = integrate_fields(data.meshes[s.configuration], pred, map_constants(mp, m.constants)).total;
    row.oracle = analytic_coefficients(row.alpha, mp, m.resolution);
    row.cxs_error_pct = pct_error(row.predicted.cxs(), row.oracle.cxs());
    row.czs_error_pct = pct_error(row.predicted.czs(), row.oracle.czs());

    ev.min_r2 = std::min(ev.min_r2, row.pressure_r2);
    ev.max_cxs_error_pct = std::max(ev.max_cxs_error_pct, row.cxs_error_pct);
    ev.max_czs_error_pct = std::max(ev.max_czs_error_pct, row.czs_error_pct);
    sum_cx += row.cxs_error_pct;
    sum_cz += row.czs_error_pct;
    ev.rows.push_back(std::move(row));
  }
  require(!ev.rows.empty(), ErrorKind::parameter, "no samples in the requested splits");
  ev.pooled_r2 = field_metrics(all_pred, all_true).r_squared();
  ev.mean_cxs_error_pct = sum_cx / static_cast<double>(ev.rows.size());
  ev.mean_czs_error_pct = sum_cz / static_cast<double>(ev.rows.size());
  return ev;
}

void write_evaluation_csv(std::ostream& out, const Evaluation& ev) {
  out << "configuration,alpha_deg,map_point,split,pressure_r2,pressure_mse,cxs,cxs_oracle,cxs_error_pct,czs,"
         "czs_oracle,czs_error_pct\n";
  char buf[512];
  for (const auto& r : ev.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.configuration,
                  r.alpha, r.map_point.c_str(), to_string(r.split), r.pressure_r2, r.pressure_mse, r.predicted.cxs(),
                  r.oracle.cxs(), r.cxs_error_pct, r.predicted.czs(), r.oracle.czs(), r.czs_error_pct);
    out << buf;
  }
}

FieldMatrix predict_fields(const GistModel& model, const SurfaceMesh& mesh, const MapPoint& map) {
  map.validate();
  const auto ctx = prepare_context(mesh, model);
  return forward(model, make_sample(mesh, map.values()), ctx.emb, ctx.attn);
}

double efficiency(double cxs, double czs) {
  require(cxs != 0.0, ErrorKind::undefined_value, "efficiency undefined for CxS = 0");
  return std::abs(czs) / cxs;
}

std::vector<double> alpha_grid(double lo, double hi, int count) {
  require(count >= 1, ErrorKind::parameter, "alpha grid is empty");
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, ErrorKind::parameter, "alpha grid needs min <= max");
  std::vector<double> a(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) a[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return a;
}

std::vector<SweepRow> design_sweep(const GistModel& model, const std::vector<double>& alphas, const MapPoint& map,
                                   int resolution, bool with_oracle) {
  require(!alphas.empty(), ErrorKind::parameter, "alpha grid is empty");
  map.validate();
  const auto constants = map_constants(map);
  std::vector<SweepRow> rows;
  for (double a : alphas) {
    const auto mesh = gen_wing_flap(a, resolution);
    const auto c = integrate_fields(mesh, predict_fields(model, mesh, map), constants).total;
    SweepRow row;
    row.alpha = a;
    row.cxs = c.cxs();
    row.czs = c.czs();
    row.efficiency = efficiency(c.cxs(), c.czs());
    row.out_of_domain = a < model.domain_min - 1e-9 || a > model.domain_max + 1e-9;
    if (with_oracle) row.oracle = analytic_coefficients(a, map, resolution);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  const bool oracle = !rows.empty() && rows.front().oracle.has_value();
  out << "alpha_deg,cxs,czs,efficiency,out_of_domain";
  if (oracle) out << ",oracle_cxs,oracle_czs,oracle_efficiency";
  out << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%s", r.alpha, r.cxs, r.czs, r.efficiency,
                  r.out_of_domain ? "true" : "false");
    out << buf;
    if (oracle) {
      const auto& o = *r.oracle;
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g", o.cxs(), o.czs(), efficiency(o.cxs(), o.czs()));
      out << buf;
    }
    out << '\n';
  }
}

std::string format_check(const Check& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", c.value);
  std::string s = std::string(c.pass ? "PASS" : "FAIL") + " " + c.suite + "/" + c.name + " value=" + buf +
                  " bound=\"" + c.bound + "\"";
  if (!c.detail.empty()) s += " detail=\"" + c.detail + "\"";
  return s;
}

}  // namespace gist
