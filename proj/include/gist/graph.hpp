#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gist/mesh.hpp"

namespace gist {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Undirected vertex adjacency in compressed form; neighbor lists are sorted.
class MeshGraph {
 public:
  MeshGraph() = default;

  /// Builds from an edge list; duplicates and orientation are ignored.
  /// Self-loops are rejected.
  static MeshGraph from_edges(int vertex_count, std::span<const std::pair<int, int>> edges);

  int vertex_count() const { return static_cast<int>(offsets_.empty() ? 0 : offsets_.size() - 1); }
  std::size_t edge_count() const { return neighbors_.size() / 2; }
  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const int> neighbors(int v) const {
    return {neighbors_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }
  bool has_edge(int a, int b) const;

  /// Breadth-first hop distances from `source`; unreachable vertices get -1.
  std::vector<int> hop_distances(int source) const;
  int component_count() const;

 private:
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
};

MeshGraph build_graph(const SurfaceMesh& mesh);

// Small reference graphs used by tests and verification suites.
MeshGraph path_graph(int n);
MeshGraph cycle_graph(int n);
MeshGraph complete_graph(int n);

/// Compressed-row sparse matrix. The random-walk operator P = D^-1 A is
/// the main instance; L = I - P is never stored.
struct SparseOperator {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  /// y = A x for an N x c row-major block.
  void multiply(const RowMatrix& x, RowMatrix& y) const;
  RowMatrix to_dense() const;
  double max_row_sum_error() const;
};

SparseOperator random_walk_matrix(const MeshGraph& graph);

/// D^-1/2 A D^-1/2, symmetric and similar to P.
SparseOperator symmetric_walk_matrix(const MeshGraph& graph);

/// Returns Q A Q^T where Q maps old index v to perm[v].
SparseOperator permute_operator(const SparseOperator& op, const std::vector<int>& perm);

}  // namespace gist
