#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gist/graph.hpp"

namespace gist {

/// Polynomial spectral filter f(P) = sum_k c_k P^k.
struct FilterSpec {
  std::vector<double> coefficients;

  static constexpr int kMaxDegree = 16;

  /// Low-pass default [0.25, 0.5, 0.25].
  static FilterSpec low_pass();
  static FilterSpec identity() { return {{1.0}}; }

  void validate() const;
  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  double operator()(double x) const;
};

FilterSpec parse_filter(const std::string& csv);
std::string format_filter(const FilterSpec& filter);

/// N x r random-projection embedding; row i is phi_i.
struct SpectralEmbedding {
  RowMatrix phi;
  int r = 0;
  std::uint64_t seed = 0;
  FilterSpec filter;

  int vertex_count() const { return static_cast<int>(phi.rows()); }
};

using KernelMatrix = Eigen::MatrixXd;

/// Horner evaluation of f(P) X with sparse products only.
RowMatrix apply_filter(const SparseOperator& p, const FilterSpec& filter, const RowMatrix& x);

/// Columns of R are generated in fixed blocks of this width, each from its
/// own stream keyed by (seed, block), so the output does not depend on how
/// blocks are scheduled across threads.
inline constexpr int kEmbedBlockColumns = 32;

/// Gaussian block of R for column block `block`: entries N(0, 1/r).
RowMatrix projection_block(int n, int r, std::uint64_t seed, int block);

/// Phi = f(P) R with E[R R^T] = I. `threads` <= 0 means default_thread_count().
SpectralEmbedding spectral_embed(const SparseOperator& p, const FilterSpec& filter, int r, std::uint64_t seed,
                                 int threads = 0);

double kernel_estimate(const SpectralEmbedding& emb, int i, int j);

inline constexpr int kExactKernelMaxN = 5000;
inline constexpr int kEigenKernelMaxN = 500;

/// f(P) f(P)^T from sparse products against the identity.
KernelMatrix exact_kernel(const SparseOperator& p, const FilterSpec& filter);

struct Eigenpairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Eigenpairs of D^-1/2 A D^-1/2.
Eigenpairs symmetric_eigenpairs(const MeshGraph& graph);

/// sum_l f(mu_l)^2 u_l u_l^T.
KernelMatrix kernel_from_eigenpairs(const Eigenpairs& eig, const FilterSpec& filter);

KernelMatrix symmetric_eigen_kernel(const MeshGraph& graph, const FilterSpec& filter);

/// Random gauge transform: sign flips on every eigenvector and a random
/// orthogonal rotation inside each cluster of eigenvalues closer than `tol`.
Eigenpairs regauge(const Eigenpairs& eig, std::uint64_t seed, double tol = 1e-8);

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix.
Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed);

enum class KernelSource { estimate, exact };

struct MismatchPoint {
  int coarse_vertices = 0;
  int fine_vertices = 0;
  double mean_mismatch = 0.0;
};

/// Mean |K^n(i,j) - K^n'(i,j)| over all coarse vertex pairs i <= j between
/// consecutive icosphere levels. In estimate mode it is also averaged over
/// `seeds` embeddings.
std::vector<MismatchPoint> mismatch_curve(const std::vector<int>& levels, const FilterSpec& filter, int r, int seeds,
                                          KernelSource source);

/// Mean |K_hat(i,j) - K(i,j)| over pairs i <= j and `seeds` embeddings.
double estimator_error(const SparseOperator& p, const FilterSpec& filter, int r, int seeds,
                       std::uint64_t first_seed = 0);

struct BenchRow {
  int n = 0;
  double seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double slope = 0.0;
};

/// Times spectral_embed on icosphere levels (graph construction excluded).
/// Each row is the fastest of repeated runs lasting at least `min_seconds`.
BenchResult scaling_bench(const std::vector<int>& levels, const FilterSpec& filter, int r, int threads = 1,
                          double min_seconds = 0.05);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Text export: header `GIST-EMB N r seed`, then N rows of r decimals.
void write_embedding(std::ostream& out, const SpectralEmbedding& emb);
SpectralEmbedding read_embedding(std::istream& in);

}  // namespace gist
