#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "gist/cli.hpp"
#include "gist/error.hpp"
#include "gist/parallel.hpp"
#include "gist/spectral.hpp"
#include "gist/workflow.hpp"

namespace gist {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(p, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::io, "cannot open " + path + " for writing");
  f << text;
  f.close();
  require(static_cast<bool>(f), ErrorKind::io, "failed writing " + path);
}

std::vector<double> parse_doubles(const std::string& csv, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used > 0 && used == tok.size() && std::isfinite(x), ErrorKind::parameter,
            what + ": cannot parse '" + tok + "'");
    v.push_back(x);
  }
  return v;
}

Thresholds parse_thresholds(const std::string& csv) {
  const auto v = parse_doubles(csv, "--thresholds");
  require(v.size() == 2, ErrorKind::parameter, "--thresholds expects usable,replace");
  require(v[1] > 0.0 && v[1] <= v[0], ErrorKind::parameter, "--thresholds needs 0 < replace <= usable");
  return {v[0], v[1]};
}

MapPoint find_map_point(const std::string& name) {
  std::string valid;
  for (const auto& mp : default_map_points()) {
    if (mp.name == name) return mp;
    valid += (valid.empty() ? "" : ", ") + mp.name;
  }
  fail(ErrorKind::parameter, "unknown map point '" + name + "'; valid: " + valid);
}

SurfaceMesh mesh_source(const std::string& path, int icosphere_level) {
  if (!path.empty()) return read_mesh_file(path);
  return gen_icosphere(icosphere_level);
}

// Effective configuration of the selected subcommand, as re-loadable TOML.
void echo_config(std::ostream& out, const CLI::App& sub) {
  std::stringstream ss(sub.config_to_str(true, false));
  std::string line;
  out << "# gist " << sub.get_name() << " effective configuration\n";
  while (std::getline(ss, line))
    if (!line.empty()) out << "# " << line << '\n';
  out << "# threads = " << default_thread_count() << '\n';
}

struct GenArgs {
  std::string out;
  DatasetConfig cfg;
};

struct EmbedArgs {
  std::string mesh, out, filter = "0.25,0.5,0.25";
  int level = 2, r = 64;
  std::uint64_t seed = 1;
};

struct KernelArgs {
  std::string mesh, out, filter = "0.25,0.5,0.25";
  int level = 1, r = 256, seeds = 8;
  std::uint64_t seed = 1;
  double max_error = -1.0;
};

struct TrainArgs {
  std::string data, out, eval_out, filter = "0.25,0.5,0.25";
  TrainingConfig cfg;
  std::uint64_t seed = 1;
  int log_every = 50;
};

struct PredictArgs {
  std::string model, mesh, out, map_point = "straight_nominal";
};

struct ReportArgs {
  std::string model, pred, mesh, fields, out, thresholds, map_point = "straight_nominal";
};

struct SweepArgs {
  std::string model, out, map_point = "straight_nominal";
  double alpha_min = -2.0, alpha_max = 4.0;
  int steps = 13, resolution = kDefaultResolution;
  bool oracle = false;
};

struct BenchArgs {
  std::string levels = "2,3,4,5,6", out, filter = "0.25,0.5,0.25";
  int r = 64;
  double min_seconds = 0.2;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  a.cfg.validate();
  const auto m = generate_dataset(a.cfg, a.out);
  out << "configurations " << m.configurations.size() << " samples " << m.samples.size() << " train "
      << m.samples_in(Split::train).size() << " val " << m.samples_in(Split::val).size() << " test "
      << m.samples_in(Split::test).size() << '\n';
  out << "wrote " << (std::filesystem::path(a.out) / "manifest.json").string() << '\n';
  return kExitOk;
}

int cmd_embed(const EmbedArgs& a, std::ostream& out) {
  const auto filter = parse_filter(a.filter);
  require(a.r >= 1, ErrorKind::parameter, "--r must be >= 1");
  const auto mesh = mesh_source(a.mesh, a.level);
  const auto p = random_walk_matrix(build_graph(mesh));
  const auto t0 = std::chrono::steady_clock::now();
  const auto emb = spectral_embed(p, filter, a.r, a.seed);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream text;
  write_embedding(text, emb);
  write_text(a.out, text.str());
  out << "n " << emb.vertex_count() << " r " << emb.r << " seconds " << fmt("%.4g", dt) << '\n';
  return kExitOk;
}

int cmd_kernel_check(const KernelArgs& a, std::ostream& out) {
  const auto filter = parse_filter(a.filter);
  require(a.r >= 1 && a.seeds >= 1, ErrorKind::parameter, "--r and --seeds must be >= 1");
  const auto mesh = mesh_source(a.mesh, a.level);
  const auto g = build_graph(mesh);
  const auto p = random_walk_matrix(g);
  const auto exact = exact_kernel(p, filter);
  const int n = g.vertex_count();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < a.seeds; ++s) {
    const auto emb = spectral_embed(p, filter, a.r, a.seed + static_cast<std::uint64_t>(s));
    mean += emb.phi * emb.phi.transpose();
  }
  mean /= a.seeds;
  const double err_single = estimator_error(p, filter, a.r, a.seeds, a.seed);
  const Eigen::MatrixXd diff = (mean - exact).cwiseAbs();
  out << "n " << n << " r " << a.r << " seeds " << a.seeds << '\n';
  out << "mean_abs_error_single " << fmt("%.6e", err_single) << '\n';
  out << "mean_abs_error_averaged " << fmt("%.6e", diff.sum() / (double(n) * n)) << '\n';
  out << "max_abs_error_averaged " << fmt("%.6e", diff.maxCoeff()) << '\n';
  if (!a.out.empty()) {
    std::ostringstream csv;
    csv << "i,j,exact,estimate\n";
    char buf[128];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (i == j || g.has_edge(i, j)) {
          std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", i, j, exact(i, j), mean(i, j));
          csv << buf;
        }
    write_text(a.out, csv.str());
  }
  if (a.max_error >= 0.0 && err_single > a.max_error) {
    out << "FAIL kernel-check mean_abs_error_single > " << a.max_error << '\n';
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_train(TrainArgs a, std::ostream& out) {
  a.cfg.filter = parse_filter(a.filter);
  a.cfg.model.seed = a.seed;
  a.cfg.shuffle_seed = a.seed;
  a.cfg.validate();
  require(a.log_every >= 1, ErrorKind::parameter, "--log-every must be >= 1");
  const auto data = load_dataset(load_manifest(a.data));
  out << "training on " << data.manifest.samples_in(Split::train).size() << " samples, "
      << parameter_count(kInputDim, a.cfg.model.hidden, a.cfg.model.blocks) << " parameters\n";
  const auto result = train_surrogate(data, a.cfg, [&](int epoch, double loss) {
    if (epoch % a.log_every == 0 || epoch == 1) out << "epoch " << epoch << " loss " << fmt("%.6g", loss) << std::endl;
  });
  save_checkpoint(result.model, a.out);
  out << "train_seconds " << fmt("%.3f", result.seconds) << '\n';
  out << "wrote " << a.out << '\n';

  std::vector<Split> held_out;
  if (!data.manifest.samples_in(Split::val).empty()) held_out.push_back(Split::val);
  if (!data.manifest.samples_in(Split::test).empty()) held_out.push_back(Split::test);
  if (held_out.empty()) return kExitOk;
  const auto ev = evaluate(result.model, data, held_out);
  out << "held_out samples " << ev.rows.size() << " pooled_pressure_r2 " << fmt("%.5f", ev.pooled_r2) << " min_r2 "
      << fmt("%.5f", ev.min_r2) << '\n';
  out << "cxs_error_pct max " << fmt("%.3f", ev.max_cxs_error_pct) << " mean " << fmt("%.3f", ev.mean_cxs_error_pct)
      << '\n';
  out << "czs_error_pct max " << fmt("%.3f", ev.max_czs_error_pct) << " mean " << fmt("%.3f", ev.mean_czs_error_pct)
      << '\n';
  if (!a.eval_out.empty()) {
    std::ostringstream csv;
    write_evaluation_csv(csv, ev);
    write_text(a.eval_out, csv.str());
  }
  return kExitOk;
}

FieldMatrix predicted_for(const std::string& model_path, const std::string& pred_path, const SurfaceMesh& mesh,
                          const MapPoint& mp) {
  if (!pred_path.empty()) return read_fields_file(pred_path);
  return predict_fields(load_checkpoint(model_path), mesh, mp);
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto mp = find_map_point(a.map_point);
  const auto model = load_checkpoint(a.model);
  const auto mesh = read_mesh_file(a.mesh);
  const auto fields = predict_fields(model, mesh, mp);
  std::ostringstream csv;
  write_fields_csv(csv, fields);
  write_text(a.out, csv.str());
  const auto c = integrate_fields(mesh, fields, map_constants(mp)).total;
  for (int i = 0; i < 6; ++i) out << kCoefficientNames[i] << ' ' << fmt("%.8g", c.values[i]) << '\n';
  if (const double alpha = infer_flap_angle(mesh); alpha < model.domain_min || alpha > model.domain_max)
    out << "out_of_domain=true\n";
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto thresholds = parse_thresholds(a.thresholds);
  require(a.model.empty() != a.pred.empty(), ErrorKind::parameter, "give exactly one of --model or --pred");
  const auto mp = find_map_point(a.map_point);
  const auto mesh = read_mesh_file(a.mesh);
  const auto truth = read_fields_file(a.fields);
  const auto pred = predicted_for(a.model, a.pred, mesh, mp);
  const auto constants = map_constants(mp);
  const auto report =
      pid_report(integrate_fields(mesh, pred, constants), integrate_fields(mesh, truth, constants), thresholds);
  std::ostringstream csv;
  write_report_csv(csv, report);
  if (a.out.empty())
    out << csv.str();
  else
    write_text(a.out, csv.str());
  out << "usable " << report.usable_count << '/' << report.rows.size() << " replace " << report.replace_count << '/'
      << report.rows.size() << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  require(a.steps >= 1, ErrorKind::parameter, "--alpha-steps must be >= 1 (empty grid)");
  const auto alphas = alpha_grid(a.alpha_min, a.alpha_max, a.steps);
  const auto mp = find_map_point(a.map_point);
  require(a.resolution >= 4, ErrorKind::parameter, "--resolution must be >= 4");
  for (double x : alphas) gen_wing_flap(x, 4);  // bounds check before any work
  const auto model = load_checkpoint(a.model);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = design_sweep(model, alphas, mp, a.resolution, a.oracle);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  if (a.out.empty())
    out << csv.str();
  else
    write_text(a.out, csv.str());
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].efficiency > rows[best].efficiency) best = i;
  out << "predicted_efficiency_argmax_deg " << fmt("%.6g", rows[best].alpha) << '\n';
  out << "sweep_seconds " << fmt("%.3f", dt) << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::ostream& out) {
  const auto checks = run_verify_suite(suite);
  int failed = 0;
  for (const auto& c : checks) {
    out << format_check(c) << '\n';
    failed += !c.pass;
  }
  out << "summary " << checks.size() - failed << '/' << checks.size() << " passed\n";
  return failed == 0 ? kExitOk : kExitVerification;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto filter = parse_filter(a.filter);
  std::vector<int> levels;
  for (double x : parse_doubles(a.levels, "--levels")) {
    require(x == std::floor(x) && x >= 0 && x <= 8, ErrorKind::parameter, "--levels must be integers in [0, 8]");
    levels.push_back(static_cast<int>(x));
  }
  require(a.r >= 1, ErrorKind::parameter, "--r must be >= 1");
  const auto res = scaling_bench(levels, filter, a.r, default_thread_count(), a.min_seconds);
  std::ostringstream csv;
  csv << "n,seconds\n";
  for (const auto& row : res.rows) csv << row.n << ',' << fmt("%.6e", row.seconds) << '\n';
  if (!a.out.empty()) write_text(a.out, csv.str());
  out << csv.str();
  if (res.rows.size() >= 2) out << "slope " << fmt("%.4f", res.slope) << '\n';
  return kExitOk;
}

void add_filter(CLI::App* sub, std::string& target) {
  sub->add_option("--filter", target, "Polynomial filter coefficients c0,c1,...")->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gist: spectral graph operator surrogate for surface fields"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);

  GenArgs gen;
  auto* s_gen = app.add_subcommand("gen", "Generate the synthetic wing/flap dataset");
  s_gen->add_option("--out", gen.out, "Output directory")->required();
  s_gen->add_option("--configurations", gen.cfg.configurations)->capture_default_str();
  s_gen->add_option("--alpha-min", gen.cfg.alpha_min)->capture_default_str();
  s_gen->add_option("--alpha-max", gen.cfg.alpha_max)->capture_default_str();
  s_gen->add_option("--resolution", gen.cfg.resolution)->capture_default_str();
  s_gen->add_option("--seed", gen.cfg.seed)->capture_default_str();

  EmbedArgs emb;
  auto* s_emb = app.add_subcommand("embed", "Random-projection spectral embedding of a mesh");
  s_emb->add_option("--mesh", emb.mesh, "OBJ mesh (default: icosphere)");
  s_emb->add_option("--icosphere", emb.level, "Icosphere level when no mesh is given")->capture_default_str();
  s_emb->add_option("--r", emb.r)->capture_default_str();
  s_emb->add_option("--seed", emb.seed)->capture_default_str();
  add_filter(s_emb, emb.filter);
  s_emb->add_option("--out", emb.out, "Embedding text file")->required();

  KernelArgs kc;
  auto* s_kc = app.add_subcommand("kernel-check", "Compare kernel estimates with the exact kernel");
  s_kc->add_option("--mesh", kc.mesh, "OBJ mesh (default: icosphere)");
  s_kc->add_option("--icosphere", kc.level)->capture_default_str();
  s_kc->add_option("--r", kc.r)->capture_default_str();
  s_kc->add_option("--seed", kc.seed)->capture_default_str();
  s_kc->add_option("--seeds", kc.seeds, "Embeddings averaged")->capture_default_str();
  s_kc->add_option("--max-error", kc.max_error, "Fail if the single-seed mean error exceeds this");
  add_filter(s_kc, kc.filter);
  s_kc->add_option("--out", kc.out, "CSV of exact vs averaged estimates on edges");

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "Train the operator on a generated dataset");
  s_tr->add_option("--data", tr.data, "manifest.json")->required();
  s_tr->add_option("--out", tr.out, "Checkpoint path")->required();
  s_tr->add_option("--eval-out", tr.eval_out, "Held-out evaluation CSV");
  s_tr->add_option("--hidden", tr.cfg.model.hidden)->capture_default_str();
  s_tr->add_option("--blocks", tr.cfg.model.blocks)->capture_default_str();
  s_tr->add_option("--k", tr.cfg.model.k, "Attention neighbors")->capture_default_str();
  s_tr->add_flag("--full-attention", tr.cfg.model.full_attention);
  s_tr->add_option("--r", tr.cfg.r)->capture_default_str();
  add_filter(s_tr, tr.filter);
  s_tr->add_option("--seed", tr.seed, "Initialization and shuffling seed")->capture_default_str();
  s_tr->add_option("--embed-seed", tr.cfg.embed_seed)->capture_default_str();
  s_tr->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
  s_tr->add_option("--lr", tr.cfg.learning_rate)->capture_default_str();
  s_tr->add_option("--lr-final", tr.cfg.final_learning_rate, "Cosine-decay target; < 0 keeps lr constant")
      ->capture_default_str();
  s_tr->add_option("--momentum", tr.cfg.momentum)->capture_default_str();
  s_tr->add_option("--log-every", tr.log_every)->capture_default_str();

  PredictArgs pr;
  auto* s_pr = app.add_subcommand("predict", "Predict surface fields for a mesh");
  s_pr->add_option("--model", pr.model)->required();
  s_pr->add_option("--mesh", pr.mesh)->required();
  s_pr->add_option("--map-point", pr.map_point)->capture_default_str();
  s_pr->add_option("--out", pr.out, "Field CSV")->required();

  ReportArgs rp;
  auto* s_rp = app.add_subcommand("report", "Per-PID load report against reference fields");
  s_rp->add_option("--mesh", rp.mesh)->required();
  s_rp->add_option("--fields", rp.fields, "Reference field CSV")->required();
  s_rp->add_option("--model", rp.model, "Checkpoint to predict with");
  s_rp->add_option("--pred", rp.pred, "Predicted field CSV");
  s_rp->add_option("--map-point", rp.map_point)->capture_default_str();
  s_rp->add_option("--thresholds", rp.thresholds, "usable,replace (absolute CxS error)")->required();
  s_rp->add_option("--out", rp.out, "Report CSV (default: stdout)");

  SweepArgs sw;
  auto* s_sw = app.add_subcommand("sweep", "Flap-angle design sweep");
  s_sw->add_option("--model", sw.model)->required();
  s_sw->add_option("--alpha-min", sw.alpha_min)->capture_default_str();
  s_sw->add_option("--alpha-max", sw.alpha_max)->capture_default_str();
  s_sw->add_option("--alpha-steps", sw.steps)->capture_default_str();
  s_sw->add_option("--map-point", sw.map_point)->capture_default_str();
  s_sw->add_option("--resolution", sw.resolution)->capture_default_str();
  s_sw->add_flag("--oracle", sw.oracle, "Add analytic ground-truth columns");
  s_sw->add_option("--out", sw.out, "Sweep CSV (default: stdout)");

  std::string suite;
  auto* s_vf = app.add_subcommand("verify", "Run an invariant suite");
  s_vf->add_option("suite", suite, "gauge|unbiased|mismatch|thinwall|gradcheck|loads|all")
      ->required()
      ->check(CLI::IsMember(verify_suite_names()));

  BenchArgs bn;
  auto* s_bn = app.add_subcommand("bench", "Embedding time vs mesh size");
  s_bn->add_option("--levels", bn.levels, "Icosphere levels")->capture_default_str();
  s_bn->add_option("--r", bn.r)->capture_default_str();
  s_bn->add_option("--min-seconds", bn.min_seconds, "Minimum timed duration per size")->capture_default_str();
  add_filter(s_bn, bn.filter);
  s_bn->add_option("--out", bn.out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  echo_config(out, *sub);
  try {
    if (sub == s_gen) return cmd_gen(gen, out);
    if (sub == s_emb) return cmd_embed(emb, out);
    if (sub == s_kc) return cmd_kernel_check(kc, out);
    if (sub == s_tr) return cmd_train(tr, out);
    if (sub == s_pr) return cmd_predict(pr, out);
    if (sub == s_rp) return cmd_report(rp, out);
    if (sub == s_sw) return cmd_sweep(sw, out);
    if (sub == s_vf) return cmd_verify(suite, out);
    if (sub == s_bn) return cmd_bench(bn, out);
  } catch (const Error& e) {
    err << "gist: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::io: return kExitIo;
      case ErrorKind::verification: return kExitVerification;
      default: return kExitValidation;
    }
  } catch (const std::exception& e) {
    err << "gist: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace gist
