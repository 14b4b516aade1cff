#include "gist/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "gist/error.hpp"
#include "gist/parallel.hpp"

namespace gist {

FilterSpec FilterSpec::low_pass() { return {{0.25, 0.5, 0.25}}; }

void FilterSpec::validate() const {
  require(!coefficients.empty(), ErrorKind::parameter, "filter has no coefficients");
  require(degree() <= kMaxDegree, ErrorKind::parameter,
          "filter degree " + std::to_string(degree()) + " exceeds " + std::to_string(kMaxDegree));
  bool any = false;
  for (double c : coefficients) {
    require(std::isfinite(c), ErrorKind::parameter, "filter coefficient is not finite");
    any = any || c != 0.0;
  }
  require(any, ErrorKind::parameter, "filter coefficients are all zero");
}

double FilterSpec::operator()(double x) const {
  double y = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) y = y * x + *it;
  return y;
}

FilterSpec parse_filter(const std::string& csv) {
  FilterSpec f;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      f.coefficients.push_back(std::stod(item, &used));
      require(used == item.size(), ErrorKind::parameter, "bad filter coefficient '" + item + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::parameter, "bad filter coefficient '" + item + "'");
    }
  }
  f.validate();
  return f;
}

std::string format_filter(const FilterSpec& filter) {
  std::string out;
  char buf[64];
  for (std::size_t k = 0; k < filter.coefficients.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", filter.coefficients[k]);
    if (k) out += ',';
    out += buf;
  }
  return out;
}

RowMatrix apply_filter(const SparseOperator& p, const FilterSpec& filter, const RowMatrix& x) {
  filter.validate();
  require(x.rows() == p.n, ErrorKind::shape,
          "input has " + std::to_string(x.rows()) + " rows, operator has " + std::to_string(p.n));
  require(x.cols() >= 1, ErrorKind::shape, "input has no columns");
  const auto& c = filter.coefficients;
  RowMatrix y = c.back() * x;
  RowMatrix tmp;
  for (int k = filter.degree() - 1; k >= 0; --k) {
    p.multiply(y, tmp);
    y.swap(tmp);
    if (c[k] != 0.0) y.noalias() += c[k] * x;
  }
  return y;
}

RowMatrix projection_block(int n, int r, std::uint64_t seed, int block) {
  const int first = block * kEmbedBlockColumns;
  const int width = std::min(kEmbedBlockColumns, r - first);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), 0x9e3779b9u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(r)));
  RowMatrix out(n, width);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < width; ++c) out(i, c) = normal(rng);
  return out;
}

SpectralEmbedding spectral_embed(const SparseOperator& p, const FilterSpec& filter, int r, std::uint64_t seed,
                                 int threads) {
  require(r >= 1, ErrorKind::parameter, "embedding dimension r must be >= 1");
  filter.validate();
  SpectralEmbedding emb;
  emb.r = r;
  emb.seed = seed;
  emb.filter = filter;
  emb.phi.resize(p.n, r);
  const int blocks = (r + kEmbedBlockColumns - 1) / kEmbedBlockColumns;
  parallel_for(blocks, threads > 0 ? threads : default_thread_count(), [&](int b) {
    const RowMatrix out = apply_filter(p, filter, projection_block(p.n, r, seed, b));
    emb.phi.middleCols(b * kEmbedBlockColumns, out.cols()) = out;
  });
  return emb;
}

double kernel_estimate(const SpectralEmbedding& emb, int i, int j) {
  const int n = emb.vertex_count();
  require(i >= 0 && j >= 0 && i < n && j < n, ErrorKind::index,
          "vertex pair (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for N = " +
              std::to_string(n));
  return emb.phi.row(i).dot(emb.phi.row(j));
}

KernelMatrix exact_kernel(const SparseOperator& p, const FilterSpec& filter) {
  require(p.n <= kExactKernelMaxN, ErrorKind::size,
          "exact kernel limited to N <= " + std::to_string(kExactKernelMaxN) + ", got " + std::to_string(p.n));
  const RowMatrix f = apply_filter(p, filter, RowMatrix::Identity(p.n, p.n));
  KernelMatrix k(p.n, p.n);
  k.noalias() = f * f.transpose();
  return k;
}

Eigenpairs symmetric_eigenpairs(const MeshGraph& graph) {
  require(graph.vertex_count() <= kEigenKernelMaxN, ErrorKind::size,
          "eigen kernel limited to N <= " + std::to_string(kEigenKernelMaxN));
  const Eigen::MatrixXd sym = symmetric_walk_matrix(graph).to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  require(solver.info() == Eigen::Success, ErrorKind::verification, "symmetric eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

KernelMatrix kernel_from_eigenpairs(const Eigenpairs& eig, const FilterSpec& filter) {
  filter.validate();
  Eigen::VectorXd weight(eig.values.size());
  for (Eigen::Index l = 0; l < weight.size(); ++l) {
    const double fl = filter(eig.values(l));
    weight(l) = fl * fl;
  }
  return eig.vectors * weight.asDiagonal() * eig.vectors.transpose();
}

KernelMatrix symmetric_eigen_kernel(const MeshGraph& graph, const FilterSpec& filter) {
  return kernel_from_eigenpairs(symmetric_eigenpairs(graph), filter);
}

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

Eigenpairs regauge(const Eigenpairs& eig, std::uint64_t seed, double tol) {
  Eigenpairs out = eig;
  const Eigen::Index n = eig.values.size();
  std::mt19937_64 rng(seed);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && eig.values(end) - eig.values(end - 1) < tol) ++end;
    const Eigen::Index m = end - start;
    if (m > 1) {
      const Eigen::MatrixXd q = random_orthogonal(static_cast<int>(m), rng());
      out.vectors.middleCols(start, m) = eig.vectors.middleCols(start, m) * q;
    }
    start = end;
  }
  for (Eigen::Index l = 0; l < n; ++l)
    if (rng() & 1u) out.vectors.col(l) = -out.vectors.col(l);
  return out;
}

namespace {

struct Level {
  SparseOperator p;
  std::vector<int> to_finest;  // vertex index in the finest mesh of the sequence
};

double coarse_pair_mismatch(const Eigen::MatrixXd& coarse, const Eigen::MatrixXd& fine_restricted) {
  const Eigen::Index n = coarse.rows();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) sum += std::abs(coarse(i, j) - fine_restricted(i, j));
  return sum / (static_cast<double>(n) * (n + 1) / 2.0);
}

Eigen::MatrixXd restrict_kernel(const Eigen::MatrixXd& k, const std::vector<int>& index) {
  const Eigen::Index n = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = k(index[i], index[j]);
  return out;
}

Eigen::MatrixXd gram(const RowMatrix& phi, const std::vector<int>& rows) {
  RowMatrix sub(static_cast<Eigen::Index>(rows.size()), phi.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = phi.row(rows[i]);
  return sub * sub.transpose();
}

}  // namespace

std::vector<MismatchPoint> mismatch_curve(const std::vector<int>& levels, const FilterSpec& filter, int r, int seeds,
                                          KernelSource source) {
  require(levels.size() >= 2, ErrorKind::parameter, "mismatch curve needs at least 2 levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    require(levels[i] > levels[i - 1], ErrorKind::parameter, "levels must be strictly ascending");
  filter.validate();
  if (source == KernelSource::estimate) {
    require(r >= 1, ErrorKind::parameter, "embedding dimension r must be >= 1");
    require(seeds >= 1, ErrorKind::parameter, "need at least one seed");
  }

  // Build the sequence by subdivision so coarse vertices keep their indices.
  std::vector<SurfaceMesh> meshes;
  SurfaceMesh current = gen_icosphere(levels.front());
  int at = levels.front();
  meshes.push_back(current);
  for (std::size_t li = 1; li < levels.size(); ++li) {
    while (at < levels[li]) {
      current = subdivide(current).mesh;
      ++at;
    }
    meshes.push_back(current);
  }

  std::vector<MismatchPoint> out;
  for (std::size_t li = 0; li + 1 < meshes.size(); ++li) {
    const SparseOperator pc = random_walk_matrix(build_graph(meshes[li]));
    const SparseOperator pf = random_walk_matrix(build_graph(meshes[li + 1]));
    std::vector<int> corr(static_cast<std::size_t>(pc.n));
    for (int v = 0; v < pc.n; ++v) corr[v] = v;
    std::vector<int> identity = corr;

    MismatchPoint pt;
    pt.coarse_vertices = pc.n;
    pt.fine_vertices = pf.n;
    if (source == KernelSource::exact) {
      pt.mean_mismatch = coarse_pair_mismatch(exact_kernel(pc, filter), restrict_kernel(exact_kernel(pf, filter), corr));
    } else {
      double total = 0.0;
      for (int s = 0; s < seeds; ++s) {
        const auto ec = spectral_embed(pc, filter, r, static_cast<std::uint64_t>(s));
        const auto ef = spectral_embed(pf, filter, r, static_cast<std::uint64_t>(s));
        total += coarse_pair_mismatch(gram(ec.phi, identity), gram(ef.phi, corr));
      }
      pt.mean_mismatch = total / seeds;
    }
    out.push_back(pt);
  }
  return out;
}

double estimator_error(const SparseOperator& p, const FilterSpec& filter, int r, int seeds, std::uint64_t first_seed) {
  require(seeds >= 1, ErrorKind::parameter, "need at least one seed");
  const KernelMatrix k = exact_kernel(p, filter);
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto emb = spectral_embed(p, filter, r, first_seed + static_cast<std::uint64_t>(s));
    const Eigen::MatrixXd est = emb.phi * emb.phi.transpose();
    total += coarse_pair_mismatch(est, k);
  }
  return total / seeds;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::parameter, "slope fit needs >= 2 matching points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, ErrorKind::parameter, "log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  require(sxx > 0, ErrorKind::parameter, "log-log fit needs distinct x values");
  return sxy / sxx;
}

BenchResult scaling_bench(const std::vector<int>& levels, const FilterSpec& filter, int r, int threads,
                          double min_seconds) {
  require(!levels.empty(), ErrorKind::parameter, "benchmark needs at least one size");
  for (std::size_t i = 1; i < levels.size(); ++i)
    require(levels[i] > levels[i - 1], ErrorKind::parameter, "benchmark sizes must be ascending");
  using clock = std::chrono::steady_clock;
  BenchResult result;
  std::vector<double> xs, ys;
  for (int level : levels) {
    const SparseOperator p = random_walk_matrix(build_graph(gen_icosphere(level)));
    double best = 1e300, spent = 0.0;
    int runs = 0;
    while (runs < 3 || spent < min_seconds) {
      const auto t0 = clock::now();
      const auto emb = spectral_embed(p, filter, r, static_cast<std::uint64_t>(runs), threads);
      const double dt = std::chrono::duration<double>(clock::now() - t0).count();
      if (emb.phi.rows() != p.n) fail(ErrorKind::verification, "embedding has wrong shape");
      best = std::min(best, dt);
      spent += dt;
      ++runs;
    }
    result.rows.push_back({p.n, best});
    xs.push_back(p.n);
    ys.push_back(best);
  }
  if (xs.size() >= 2) result.slope = loglog_slope(xs, ys);
  return result;
}

void write_embedding(std::ostream& out, const SpectralEmbedding& emb) {
  out << "GIST-EMB " << emb.vertex_count() << ' ' << emb.r << ' ' << emb.seed << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < emb.phi.rows(); ++i) {
    for (Eigen::Index c = 0; c < emb.phi.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", emb.phi(i, c));
      if (c) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

SpectralEmbedding read_embedding(std::istream& in) {
  std::string magic;
  long long n = -1, r = -1;
  unsigned long long seed = 0;
  in >> magic >> n >> r >> seed;
  require(in && magic == "GIST-EMB" && n >= 0 && r >= 1, ErrorKind::parse, "bad embedding header");
  SpectralEmbedding emb;
  emb.r = static_cast<int>(r);
  emb.seed = seed;
  emb.phi.resize(n, r);
  for (long long i = 0; i < n; ++i)
    for (long long c = 0; c < r; ++c) {
      in >> emb.phi(i, c);
      require(static_cast<bool>(in), ErrorKind::parse, "embedding row " + std::to_string(i + 2) + " is short");
    }
  return emb;
}

}  // namespace gist
