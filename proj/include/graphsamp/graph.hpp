#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace graphsamp {

struct Edge {
  int i = 0;
  int j = 0;
  double w = 1.0;
};

// Undirected weighted graph on nodes 0..n-1. Edges are canonicalized to
// i < j and kept sorted; self-loops, duplicates, out-of-range endpoints and
// nonpositive weights are rejected at construction.
class Graph {
 public:
  Graph(int n, std::vector<Edge> edges);

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Weighted degrees d_i = sum_j w_ij.
  std::vector<double> degrees() const;

  bool is_connected() const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

// Symmetric sparse matrix. Stores the upper triangle (row <= col) once and
// keeps a full CSC expansion for fast products.
class SparseSymMatrix {
 public:
  SparseSymMatrix(int n, const std::vector<Eigen::Triplet<double>>& upper);

  int dim() const { return n_; }
  const std::vector<Eigen::Triplet<double>>& upper() const { return upper_; }
  const Eigen::SparseMatrix<double>& full() const { return full_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return full_ * x; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(full_); }

 private:
  int n_ = 0;
  std::vector<Eigen::Triplet<double>> upper_;
  Eigen::SparseMatrix<double> full_;
};

// Symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2}. Every node must
// have positive degree; throws EmptyGraph for n = 0, IsolatedNode otherwise.
SparseSymMatrix normalized_laplacian(const Graph& g);

// Ring lattice of even `degree` with probabilistic rewiring. Retries with
// incremented seeds (up to 100) until the result is connected.
Graph gen_small_world(int n, int degree, double rewire_p, std::uint64_t seed);

// Planted-partition graph: `communities` near-equal blocks, edge probability
// p_in inside a block and p_out across blocks, unit weights. Same
// connectivity retry policy as gen_small_world.
Graph gen_community(int n, int communities, double p_in, double p_out,
                    std::uint64_t seed);

struct LoadedGraph {
  Graph graph;
  bool connected = true;
};

// Text format: header "n m", then m lines "i j w"; '#' starts a comment.
LoadedGraph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& g, const std::filesystem::path& path);

// Serializes to the canonical edge-list text (what save_graph writes).
std::string graph_to_text(const Graph& g);

// Atomic file write: temp file in the target directory, then rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace graphsamp
