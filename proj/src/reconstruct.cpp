#include "graphsamp/reconstruct.hpp"

#include <cmath>
#include <string>

#include "graphsamp/errors.hpp"

namespace graphsamp {

namespace {

// (C V_K)^+ as K x m via thin SVD with relative rank threshold.
Eigen::MatrixXd pinv_rows(const Eigen::MatrixXd& rows, double rank_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  const double thr = sv.size() > 0 ? rank_tol * sv(0) : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

void check_deltas(const Eigen::VectorXd& deltas) {
  for (Eigen::Index i = 0; i < deltas.size(); ++i) {
    // Qualified sets put delta in [0, 1); tolerate eigensolver jitter below 0.
    if (!(deltas(i) >= -1e-9 && deltas(i) < 1.0))
      throw DeltaOutOfRange("delta " + std::to_string(deltas(i)) +
                            " outside [0, 1)");
  }
}

}  // namespace

LsOperator::LsOperator(const SpectrumSlice& basis, const SamplingSet& s,
                       double rank_tol) {
  if (!is_qualified(s, basis, rank_tol))
    throw NotQualified("least-squares recovery needs a qualified sampling set");
  const Eigen::MatrixXd rows = basis_rows(*basis.basis, s.indices);
  recovery_.noalias() = (*basis.basis) * pinv_rows(rows, rank_tol);
}

Eigen::VectorXd LsOperator::reconstruct(const Eigen::VectorXd& y_s) const {
  if (y_s.size() != recovery_.cols())
    throw ShapeMismatch("observation length " + std::to_string(y_s.size()) +
                        " does not match sample count " +
                        std::to_string(recovery_.cols()));
  return recovery_ * y_s;
}

Reconstruction ls_reconstruct(const SpectrumSlice& basis, const SamplingSet& s,
                              const Eigen::VectorXd& y_s, double rank_tol) {
  if (y_s.size() != s.m())
    throw ShapeMismatch("observation length " + std::to_string(y_s.size()) +
                        " does not match sample count " + std::to_string(s.m()));
  LsOperator op(basis, s, rank_tol);
  Reconstruction out;
  out.method = "ls";
  out.x_hat = op.reconstruct(y_s);
  ResidualInfo info;
  info.deltas = delta_spectrum(psi_matrix(basis, s.indices));
  out.residual_info = info;
  return out;
}

Reconstruction mia_reconstruct(const FilterMatrix& t_poly, const SamplingSet& s,
                               const Eigen::VectorXd& y_s) {
  if (!s.gamma_tilde)
    throw MissingGamma("recovery needs the cached truncated Neumann matrix");
  const auto& gamma = *s.gamma_tilde;
  const int m = s.m();
  if (gamma.rows() != m || gamma.cols() != m)
    throw ShapeMismatch("cached matrix is " + std::to_string(gamma.rows()) +
                        "x" + std::to_string(gamma.cols()) + " for " +
                        std::to_string(m) + " samples");
  if (y_s.size() != m)
    throw ShapeMismatch("observation length " + std::to_string(y_s.size()) +
                        " does not match sample count " + std::to_string(m));
  const int n = t_poly.dim();
  for (int idx : s.indices)
    if (idx < 0 || idx >= n)
      throw ShapeMismatch("sample index out of range for the filter matrix");
  const Eigen::VectorXd z = gamma * y_s;
  Eigen::VectorXd x_hat = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < m; ++c)
    x_hat += z(c) * t_poly.values.col(s.indices[static_cast<std::size_t>(c)]);
  Reconstruction out;
  out.method = "mia";
  out.x_hat = std::move(x_hat);
  return out;
}

double predict_ls_mse(const Eigen::VectorXd& deltas, double sigma2) {
  check_deltas(deltas);
  if (!(sigma2 >= 0.0)) throw InvalidArgument("noise variance must be >= 0");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < deltas.size(); ++i) acc += 1.0 / (1.0 - deltas(i));
  return sigma2 * acc;
}

double predict_mia_mse_bound(const Eigen::VectorXd& deltas, double sigma2,
                             int trunc_L, double t_norm2) {
  check_deltas(deltas);
  if (!(sigma2 >= 0.0)) throw InvalidArgument("noise variance must be >= 0");
  if (trunc_L < 0) throw InvalidArgument("truncation order must be >= 0");
  if (!(t_norm2 >= 0.0))
    throw InvalidArgument("truncation residual norm must be >= 0");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < deltas.size(); ++i) {
    const double g = 1.0 - std::pow(deltas(i), trunc_L + 1);
    acc += g * g / (1.0 - deltas(i));
  }
  return t_norm2 + sigma2 * acc;
}

Eigen::VectorXd truncation_vector(const SpectrumSlice& basis,
                                  const SamplingSet& s, int trunc_L,
                                  const Eigen::VectorXd& x_s) {
  if (trunc_L < 0) throw InvalidArgument("truncation order must be >= 0");
  if (!is_qualified(s, basis))
    throw NotQualified("truncation residual needs a qualified sampling set");
  if (x_s.size() != s.m())
    throw ShapeMismatch("observation length does not match sample count");
  const Eigen::MatrixXd rows = basis_rows(*basis.basis, s.indices);
  const Eigen::Index k = rows.cols();
  Eigen::MatrixXd psi(k, k);
  psi.noalias() = rows.transpose() * rows;
  Eigen::VectorXd w = psi.llt().solve(rows.transpose() * x_s);
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(k, k) - psi;
  for (int l = 0; l <= trunc_L; ++l) w = phi * w;
  return (*basis.basis) * w;
}

double mse(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x) {
  if (x_hat.size() != x.size())
    throw ShapeMismatch("vector lengths differ: " + std::to_string(x_hat.size()) +
                        " vs " + std::to_string(x.size()));
  return (x_hat - x).squaredNorm();
}

}  // namespace graphsamp
