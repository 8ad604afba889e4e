#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "graphsamp/sampling.hpp"
#include "graphsamp/spectral.hpp"

namespace graphsamp {

struct ResidualInfo {
  Eigen::VectorXd deltas;  // eigenvalues of I - Psi, ascending
  double t_norm2 = 0.0;    // squared norm of the truncation vector
};

struct Reconstruction {
  Eigen::VectorXd x_hat;
  std::string method;  // "ls" or "mia"
  std::optional<ResidualInfo> residual_info;
};

// Least-squares bandlimited recovery x_hat = V_K (C V_K)^+ y_S. The
// pseudo-inverse is SVD-based with threshold sigma > rank_tol * sigma_1.
Reconstruction ls_reconstruct(const SpectrumSlice& basis, const SamplingSet& s,
                              const Eigen::VectorXd& y_s,
                              double rank_tol = 1e-10);

// Inversion-free recovery x_hat = T[:, S] * gamma_tilde * y_S using the
// cached truncated Neumann sum; matrix-vector products only.
Reconstruction mia_reconstruct(const FilterMatrix& t_poly, const SamplingSet& s,
                               const Eigen::VectorXd& y_s);

// Expected LS MSE under iid noise: sigma2 * sum_i 1/(1 - delta_i).
double predict_ls_mse(const Eigen::VectorXd& deltas, double sigma2);

// Upper bound on the truncated-recovery MSE:
// t_norm2 + sigma2 * sum_i (1 - delta_i^{L+1})^2 / (1 - delta_i).
double predict_mia_mse_bound(const Eigen::VectorXd& deltas, double sigma2,
                             int trunc_L, double t_norm2);

// Neumann truncation residual t = V_K Phi^{L+1} Psi^{-1} (C V_K)^T x_S,
// the signal component dropped by cutting the series after L terms.
Eigen::VectorXd truncation_vector(const SpectrumSlice& basis,
                                  const SamplingSet& s, int trunc_L,
                                  const Eigen::VectorXd& x_s);

// Squared Euclidean distance between a recovery and the ground truth.
double mse(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x);

// Precomputed n x m recovery operator for repeated LS solves against a
// fixed (basis, S) pair.
class LsOperator {
 public:
  LsOperator(const SpectrumSlice& basis, const SamplingSet& s,
             double rank_tol = 1e-10);
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& y_s) const;

 private:
  Eigen::MatrixXd recovery_;
};

}  // namespace graphsamp
