#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "graphsamp/graph.hpp"

namespace graphsamp {

inline constexpr int kDefaultDenseCap = 4096;

// Lowest part of a symmetric matrix's spectrum: the k smallest eigenvalues
// in ascending order and, when computed densely, the matching orthonormal
// eigenvector block (n x k).
struct SpectrumSlice {
  int k = 0;
  Eigen::VectorXd lambdas;
  std::optional<Eigen::MatrixXd> basis;
};

// Full dense eigendecomposition, truncated to the k smallest pairs. Refuses
// to run above dense_cap nodes.
SpectrumSlice dense_spectrum(const SparseSymMatrix& mat, int k,
                             int dense_cap = kDefaultDenseCap);

// One Lanczos pass with full reorthogonalization: runs m_steps iterations
// from a seeded random start vector and returns the k-th smallest Ritz
// value. Requires k < m_steps <= dim.
double lanczos_lambda_k(const SparseSymMatrix& mat, int k, int m_steps,
                        std::uint64_t seed);

// Step-escalation driver around lanczos_lambda_k: grows the subspace until
// two runs 10 steps apart agree to 1e-8 (exact once m_steps reaches dim).
double lanczos_lambda_k_auto(const SparseSymMatrix& mat, int k,
                             std::uint64_t seed);

// Chebyshev-series approximation on [0, lambda_max] of the smoothed step
// g(lambda) = 1 / (1 + exp(alpha * (lambda - lambda_k))). coeffs[0] holds
// the already-halved constant term, so evaluate() is a plain dot product
// with T_0..T_order.
struct ChebyshevFilter {
  int order = 0;
  Eigen::VectorXd coeffs;
  double lambda_max = 2.0;
  double lambda_k = 0.0;
  double alpha = 0.0;

  double evaluate(double lambda) const;  // Clenshaw recurrence
  double target(double lambda) const;    // the smoothed step itself
};

ChebyshevFilter chebyshev_fit(double lambda_k, int order, double alpha,
                              double lambda_max = 2.0);

// Dense n x n spectral filter operator.
struct FilterMatrix {
  Eigen::MatrixXd values;
  int dim() const { return static_cast<int>(values.rows()); }
};

// Exact ideal low-pass projector V_k V_k^T from a dense spectrum slice.
FilterMatrix ideal_lowpass_exact(const SpectrumSlice& slice);

// Polynomial filter applied columnwise through the three-term Chebyshev
// recurrence; touches the matrix only via products. Dense-cap guarded.
FilterMatrix apply_filter_dense(const ChebyshevFilter& filter,
                                const SparseSymMatrix& mat,
                                int dense_cap = kDefaultDenseCap);

}  // namespace graphsamp
