#include "gist/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "gist/error.hpp"

namespace gist {

MeshGraph MeshGraph::from_edges(int vertex_count, std::span<const std::pair<int, int>> edges) {
  require(vertex_count >= 0, ErrorKind::parameter, "negative vertex count");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(vertex_count));
  for (auto [a, b] : edges) {
    require(a >= 0 && b >= 0 && a < vertex_count && b < vertex_count, ErrorKind::index, "edge endpoint out of range");
    require(a != b, ErrorKind::parameter, "self-loop at vertex " + std::to_string(a));
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  MeshGraph g;
  g.offsets_.assign(static_cast<std::size_t>(vertex_count) + 1, 0);
  for (int v = 0; v < vertex_count; ++v) {
    auto& list = adj[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    g.offsets_[v + 1] = g.offsets_[v] + static_cast<int>(list.size());
  }
  g.neighbors_.reserve(static_cast<std::size_t>(g.offsets_.back()));
  for (const auto& list : adj) g.neighbors_.insert(g.neighbors_.end(), list.begin(), list.end());
  return g;
}

bool MeshGraph::has_edge(int a, int b) const {
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<int> MeshGraph::hop_distances(int source) const {
  std::vector<int> dist(static_cast<std::size_t>(vertex_count()), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : neighbors(v))
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

int MeshGraph::component_count() const {
  std::vector<char> seen(static_cast<std::size_t>(vertex_count()), 0);
  int components = 0;
  std::vector<int> stack;
  for (int s = 0; s < vertex_count(); ++s) {
    if (seen[s]) continue;
    ++components;
    stack.push_back(s);
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : neighbors(v))
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
  }
  return components;
}

MeshGraph build_graph(const SurfaceMesh& mesh) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mesh.face_count() * 3);
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) edges.emplace_back(f[e], f[(e + 1) % 3]);
  return MeshGraph::from_edges(static_cast<int>(mesh.vertex_count()), edges);
}

MeshGraph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return MeshGraph::from_edges(n, edges);
}

MeshGraph cycle_graph(int n) {
  require(n >= 3, ErrorKind::parameter, "cycle needs at least 3 vertices");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return MeshGraph::from_edges(n, edges);
}

MeshGraph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return MeshGraph::from_edges(n, edges);
}

void SparseOperator::multiply(const RowMatrix& x, RowMatrix& y) const {
  require(x.rows() == n, ErrorKind::shape,
          "operator of size " + std::to_string(n) + " applied to " + std::to_string(x.rows()) + " rows");
  y.resize(n, x.cols());
  for (int i = 0; i < n; ++i) {
    auto yi = y.row(i);
    yi.setZero();
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) yi.noalias() += values[p] * x.row(cols[p]);
  }
}

RowMatrix SparseOperator::to_dense() const {
  RowMatrix d = RowMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) d(i, cols[p]) += values[p];
  return d;
}

double SparseOperator::max_row_sum_error() const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += values[p];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

namespace {

template <class Weight>
SparseOperator adjacency_operator(const MeshGraph& graph, Weight weight) {
  SparseOperator op;
  op.n = graph.vertex_count();
  op.row_ptr.resize(static_cast<std::size_t>(op.n) + 1, 0);
  for (int i = 0; i < op.n; ++i) {
    require(graph.degree(i) > 0, ErrorKind::zero_degree, "vertex " + std::to_string(i) + " is isolated");
    for (int j : graph.neighbors(i)) {
      op.cols.push_back(j);
      op.values.push_back(weight(i, j));
    }
    op.row_ptr[i + 1] = static_cast<int>(op.cols.size());
  }
  return op;
}

}  // namespace

SparseOperator random_walk_matrix(const MeshGraph& graph) {
  return adjacency_operator(graph, [&](int i, int) { return 1.0 / graph.degree(i); });
}

SparseOperator symmetric_walk_matrix(const MeshGraph& graph) {
  return adjacency_operator(graph, [&](int i, int j) {
    return 1.0 / std::sqrt(static_cast<double>(graph.degree(i)) * graph.degree(j));
  });
}

SparseOperator permute_operator(const SparseOperator& op, const std::vector<int>& perm) {
  require(static_cast<int>(perm.size()) == op.n, ErrorKind::shape, "permutation length differs from operator size");
  std::vector<int> inverse(perm.size());
  for (std::size_t v = 0; v < perm.size(); ++v) inverse[perm[v]] = static_cast<int>(v);
  SparseOperator out;
  out.n = op.n;
  out.row_ptr.resize(static_cast<std::size_t>(op.n) + 1, 0);
  for (int new_row = 0; new_row < op.n; ++new_row) {
    const int old_row = inverse[new_row];
    std::vector<std::pair<int, double>> entries;
    for (int p = op.row_ptr[old_row]; p < op.row_ptr[old_row + 1]; ++p)
      entries.emplace_back(perm[op.cols[p]], op.values[p]);
    std::sort(entries.begin(), entries.end());
    for (auto [c, v] : entries) {
      out.cols.push_back(c);
      out.values.push_back(v);
    }
    out.row_ptr[new_row + 1] = static_cast<int>(out.cols.size());
  }
  return out;
}

}  // namespace gist
