#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gist/datagen.hpp"
#include "gist/loads.hpp"
#include "gist/operator.hpp"

namespace gist {

/// Model and optimizer settings for train_surrogate.
struct TrainingConfig {
  ModelConfig model{32, 2, 16, 1, false};
  int r = 64;
  FilterSpec filter = FilterSpec::low_pass();
  std::uint64_t embed_seed = 1;
  int epochs = 1500;
  double learning_rate = 5e-3;
  double final_learning_rate = 1e-5;
  double momentum = 0.9;
  std::uint64_t shuffle_seed = 1;

  void validate() const;
};

/// Dataset held in memory: one mesh and context per configuration, one
/// sample per (configuration, map point).
struct LoadedDataset {
  DatasetManifest manifest;
  std::vector<SurfaceMesh> meshes;  // by configuration id
  std::vector<FieldSample> samples; // parallel to manifest.samples
};

LoadedDataset load_dataset(const DatasetManifest& manifest);

struct TrainResult {
  GistModel model;
  std::vector<double> history;
  double seconds = 0.0;
};

/// Fits normalization and trains on the train split.
TrainResult train_surrogate(const LoadedDataset& data, const TrainingConfig& config,
                            const std::function<void(int, double)>& on_epoch = {});

struct SampleEvaluation {
  int configuration = 0;
  std::string map_point;
  double alpha = 0.0;
  Split split = Split::train;
  double pressure_r2 = 0.0;
  double pressure_mse = 0.0;
  Coefficients predicted;
  Coefficients oracle;  // analytic_coefficients
  double cxs_error_pct = 0.0;
  double czs_error_pct = 0.0;
};

struct Evaluation {
  std::vector<SampleEvaluation> rows;
  double pooled_r2 = 0.0;
  double min_r2 = 0.0;
  double max_cxs_error_pct = 0.0, mean_cxs_error_pct = 0.0;
  double max_czs_error_pct = 0.0, mean_czs_error_pct = 0.0;
};

/// Pressure R^2 and CxS/CzS error vs the analytic oracle on the given splits.
Evaluation evaluate(const GistModel& model, const LoadedDataset& data, const std::vector<Split>& splits);

void write_evaluation_csv(std::ostream& out, const Evaluation& eval);

/// Physical-unit fields for one mesh and operating condition.
FieldMatrix predict_fields(const GistModel& model, const SurfaceMesh& mesh, const MapPoint& map);

struct SweepRow {
  double alpha = 0.0;
  double cxs = 0.0, czs = 0.0, efficiency = 0.0;
  bool out_of_domain = false;
  std::optional<Coefficients> oracle;
};

/// Efficiency = |CzS| / CxS.
double efficiency(double cxs, double czs);

/// `count` evenly spaced values over [lo, hi]; count 1 gives {lo}.
std::vector<double> alpha_grid(double lo, double hi, int count);

/// Predicted coefficients over an alpha grid; rows outside the model's
/// training range are flagged.
std::vector<SweepRow> design_sweep(const GistModel& model, const std::vector<double>& alphas, const MapPoint& map,
                                   int resolution, bool with_oracle);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// One machine-readable check outcome.
struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string bound;  // human-readable bar, e.g. "<= 1e-10"
  std::string detail;
};

std::string format_check(const Check& c);

const std::vector<std::string>& verify_suite_names();

/// Runs one named suite ("all" runs every suite) with fixed seeds.
std::vector<Check> run_verify_suite(const std::string& suite);

/// Suites, individually.
std::vector<Check> verify_gauge(int rotations = 20);
std::vector<Check> verify_unbiased(int seeds = 500);
std::vector<Check> verify_thinwall();
std::vector<Check> verify_mismatch();
std::vector<Check> verify_gradcheck();
std::vector<Check> verify_loads();

}  // namespace gist
