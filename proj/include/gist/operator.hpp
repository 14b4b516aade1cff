#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gist/graph.hpp"
#include "gist/mesh.hpp"
#include "gist/spectral.hpp"

namespace gist {

inline constexpr int kGeometryFeatures = 6;  // position, vertex normal
inline constexpr int kMapFeatures = 5;       // heave, pitch, yaw, roll, steer
inline constexpr int kInputDim = kGeometryFeatures + kMapFeatures;
inline constexpr int kOutputDim = 4;         // p, tau_x, tau_y, tau_z

/// One mesh + operating condition + per-vertex targets.
struct FieldSample {
  RowMatrix geometry;  // N x 6
  std::array<double, kMapFeatures> map{};
  RowMatrix targets;   // N x 4, may be empty for inference

  int size() const { return static_cast<int>(geometry.rows()); }
  RowMatrix inputs() const;  // N x 11, map broadcast
  void validate() const;
};

FieldSample make_sample(const SurfaceMesh& mesh, const std::array<double, kMapFeatures>& map,
                        RowMatrix targets = {});

/// Per-vertex neighbor lists in CSR form. Each row holds i itself plus its
/// top-k neighbors by kernel estimate.
struct AttentionGraph {
  int n = 0;
  std::vector<int> offsets;    // n + 1
  std::vector<int> neighbors;
  std::vector<double> kernel;  // estimate per entry, at build time

  int row_size(int i) const { return offsets[i + 1] - offsets[i]; }
};

/// Candidates are graph vertices within `radius` hops (0 means 2 * filter
/// degree, the support of f(P) f(P)^T). full = every vertex (N <= 2000).
AttentionGraph build_attention(const MeshGraph& graph, const SpectralEmbedding& emb, int k, int radius = 0,
                               bool full = false);

/// <phi_i, phi_j> for every attention entry.
std::vector<double> attention_kernels(const SpectralEmbedding& emb, const AttentionGraph& attn);

/// Row-wise softmax of theta1 * <phi_i, phi_j> + theta2 over neighbors.
std::vector<double> attention_weights(const SpectralEmbedding& emb, const AttentionGraph& attn, double theta1,
                                      double theta2);
std::vector<double> softmax_rows(const AttentionGraph& attn, std::span<const double> kernels, double theta1,
                                 double theta2);

struct ModelConfig {
  int hidden = 64;
  int blocks = 3;
  int k = 16;
  std::uint64_t seed = 1;
  bool full_attention = false;

  void validate() const;
};

struct BlockParams {
  RowMatrix w;          // h x h
  Eigen::RowVectorXd b; // h
  double theta1 = 1.0;
  double theta2 = 0.0;
};

/// Trainable parameters; also used as the gradient container.
struct Params {
  RowMatrix enc_w;  // in x h
  Eigen::RowVectorXd enc_b;
  std::vector<BlockParams> blocks;
  RowMatrix dec_w;  // h x 4
  Eigen::RowVectorXd dec_b;

  std::size_t size() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);
  Params zeros_like() const;
  bool all_finite() const;
};

std::size_t parameter_count(int input_dim, int hidden, int blocks);

struct Normalization {
  Eigen::RowVectorXd in_mean, in_std;    // kInputDim
  Eigen::RowVectorXd out_mean, out_std;  // kOutputDim

  static Normalization identity();
  /// Z-score statistics over all vertices of the given samples; zero
  /// spreads are replaced by 1.
  static Normalization fit(std::span<const FieldSample* const> samples);
};

struct GistModel {
  ModelConfig config;
  Params params;
  Normalization norm = Normalization::identity();
  // Embedding settings the model was trained with.
  FilterSpec filter = FilterSpec::low_pass();
  int r = 128;
  std::uint64_t embed_seed = 1;
  // Training-domain bounds on the geometry parameter (for out-of-domain flags).
  double domain_min = 0.0, domain_max = 0.0;
};

GistModel init_model(const ModelConfig& config);

/// Embedding + attention graph for one mesh.
struct MeshContext {
  SpectralEmbedding emb;
  AttentionGraph attn;
};

MeshContext prepare_context(const SurfaceMesh& mesh, const GistModel& model);

/// Normalized-space forward pass; returns N x 4 (normalized outputs).
RowMatrix forward_normalized(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                             const AttentionGraph& attn);

/// Physical-unit predictions.
RowMatrix forward(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                  const AttentionGraph& attn);

/// Mean over all entries of ((pred - target) / channel_std)^2.
double loss(const RowMatrix& pred, const RowMatrix& target, const Eigen::RowVectorXd& channel_std);

struct LossAndGrad {
  double loss = 0.0;
  Params grad;
};

/// Exact reverse-mode gradient of scale * loss.
LossAndGrad gradients(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                      const AttentionGraph& attn, double scale = 1.0);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Central finite differences on every parameter.
/// rel = |a - f| / max(|a|, |f|, floor).
GradCheckResult gradient_check(const GistModel& model, const FieldSample& sample, const SpectralEmbedding& emb,
                               const AttentionGraph& attn, double step = 1e-5, double floor = 1e-5);

struct Example {
  const FieldSample* sample = nullptr;
  const MeshContext* context = nullptr;
};

struct TrainOptions {
  double learning_rate = 1e-3;
  double final_learning_rate = -1.0;  // < 0: constant rate; else cosine decay
  double momentum = 0.9;
  int epochs = 100;
  std::uint64_t seed = 1;
  std::function<void(int epoch, double loss)> on_epoch;
};

/// Momentum gradient descent over shuffled samples; returns mean loss per epoch.
std::vector<double> train(GistModel& model, std::span<const Example> data, const TrainOptions& opts);

std::string checkpoint_to_json(const GistModel& model);
GistModel checkpoint_from_json(const std::string& text);
void save_checkpoint(const GistModel& model, const std::string& path);
GistModel load_checkpoint(const std::string& path);

}  // namespace gist
