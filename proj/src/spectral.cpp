#include "graphsamp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "graphsamp/errors.hpp"
#include "graphsamp/parallel.hpp"
#include "graphsamp/rng.hpp"

namespace graphsamp {

SpectrumSlice dense_spectrum(const SparseSymMatrix& mat, int k, int dense_cap) {
  const int n = mat.dim();
  if (n > dense_cap)
    throw DimensionCap("dense spectrum: " + std::to_string(n) + " nodes exceeds cap " +
                       std::to_string(dense_cap));
  if (k < 1 || k > n)
    throw InvalidArgument("spectrum slice size must lie in [1, n]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(mat.dense());
  if (solver.info() != Eigen::Success)
    throw NotConverged("dense eigensolver failed");
  SpectrumSlice out;
  out.k = k;
  out.lambdas = solver.eigenvalues().head(k);
  out.basis = solver.eigenvectors().leftCols(k);
  return out;
}

namespace {

struct TridiagResult {
  Eigen::VectorXd diag;
  Eigen::VectorXd subdiag;
};

// Lanczos recurrence with full reorthogonalization (two MGS sweeps per step).
// Throws Breakdown when the residual collapses before m_steps iterations.
TridiagResult lanczos_tridiag(const SparseSymMatrix& mat, int m_steps,
                              std::uint64_t seed) {
  const int n = mat.dim();
  Eigen::MatrixXd q(n, m_steps);
  Eigen::VectorXd diag(m_steps);
  Eigen::VectorXd subdiag(std::max(0, m_steps - 1));

  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  q.col(0) = v;

  for (int j = 0; j < m_steps; ++j) {
    Eigen::VectorXd w = mat.apply(q.col(j));
    diag(j) = q.col(j).dot(w);
    w -= diag(j) * q.col(j);
    if (j > 0) w -= subdiag(j - 1) * q.col(j - 1);
    for (int sweep = 0; sweep < 2; ++sweep)
      for (int i = 0; i <= j; ++i) w -= q.col(i).dot(w) * q.col(i);
    if (j + 1 == m_steps) break;
    const double beta = w.norm();
    if (beta < 1e-12)
      throw Breakdown("lanczos residual collapsed at step " + std::to_string(j + 1));
    subdiag(j) = beta;
    q.col(j + 1) = w / beta;
  }
  return {diag, subdiag};
}

double lanczos_ritz_k(const SparseSymMatrix& mat, int k, int m_steps,
                      std::uint64_t seed) {
  // A collapse means the Krylov space hit an invariant subspace; restart
  // from a fresh vector a few times before giving up.
  for (int attempt = 0;; ++attempt) {
    try {
      const auto t = lanczos_tridiag(mat, m_steps, seed + static_cast<std::uint64_t>(attempt));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
      solver.computeFromTridiagonal(t.diag, t.subdiag, Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success)
        throw NotConverged("tridiagonal eigensolver failed");
      return solver.eigenvalues()(k - 1);
    } catch (const Breakdown&) {
      if (attempt >= 7) throw;
    }
  }
}

}  // namespace

double lanczos_lambda_k(const SparseSymMatrix& mat, int k, int m_steps,
                        std::uint64_t seed) {
  const int n = mat.dim();
  if (k < 1 || k > n) throw InvalidArgument("eigenvalue index out of range");
  if (m_steps <= k || m_steps > n)
    throw InvalidArgument("lanczos step count must satisfy k < m_steps <= n");
  return lanczos_ritz_k(mat, k, m_steps, seed);
}

double lanczos_lambda_k_auto(const SparseSymMatrix& mat, int k,
                             std::uint64_t seed) {
  const int n = mat.dim();
  if (k < 1 || k > n) throw InvalidArgument("eigenvalue index out of range");
  int m = std::min(n, std::max(2 * k, k + 50));
  if (m <= k) m = std::min(n, k + 1);
  if (m == n) return lanczos_ritz_k(mat, k, n, seed);
  for (int iter = 0; iter < 64; ++iter) {
    const int m2 = std::min(n, m + 10);
    const double a = lanczos_ritz_k(mat, k, m, seed);
    const double b = lanczos_ritz_k(mat, k, m2, seed);
    if (std::abs(a - b) <= 1e-8 || m2 == n) return b;
    m = std::min(n, 2 * m);
    if (m == n) return lanczos_ritz_k(mat, k, n, seed);
  }
  throw NotConverged("lanczos estimate did not stabilize");
}

double ChebyshevFilter::target(double lambda) const {
  const double z = alpha * (lambda - lambda_k);
  if (z > 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double ChebyshevFilter::evaluate(double lambda) const {
  const double y = (2.0 * lambda - lambda_max) / lambda_max;
  double b1 = 0.0, b2 = 0.0;
  for (int j = order; j >= 1; --j) {
    const double t = 2.0 * y * b1 - b2 + coeffs(j);
    b2 = b1;
    b1 = t;
  }
  return y * b1 - b2 + coeffs(0);
}

namespace {

double clenshaw_unit(const Eigen::VectorXd& c, double x) {
  const int p = static_cast<int>(c.size()) - 1;
  double b1 = 0.0, b2 = 0.0;
  for (int j = p; j >= 1; --j) {
    const double t = 2.0 * x * b1 - b2 + c(j);
    b2 = b1;
    b1 = t;
  }
  return x * b1 - b2 + c(0);
}

// One-sided max deviation scan of target - polynomial on a uniform grid of
// the unit interval; also records per-point errors for the exchange step.
double scan_error(const ChebyshevFilter& f, const Eigen::VectorXd& c, int n,
                  std::vector<double>* xs, std::vector<double>* es) {
  const double half = f.lambda_max / 2.0;
  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * i / (n - 1);
    const double e = f.target(half * (x + 1.0)) - clenshaw_unit(c, x);
    if (xs) (*xs)[static_cast<std::size_t>(i)] = x;
    if (es) (*es)[static_cast<std::size_t>(i)] = e;
    dev = std::max(dev, std::abs(e));
  }
  return dev;
}

// Equioscillation polish of the truncated series: classic exchange on p+2
// alternating error extrema, with a best-seen safeguard so the result is
// never worse than the plain series. Deterministic.
void remez_polish(ChebyshevFilter& f) {
  const int p = f.order;
  const int r = p + 2;
  const int grid_n = 8192;
  std::vector<double> xs(grid_n), es(grid_n);
  Eigen::VectorXd best = f.coeffs;
  double best_dev = scan_error(f, best, grid_n, &xs, &es);
  Eigen::VectorXd cur = best;

  auto extract_reference = [&](std::vector<double>& ref) {
    ref.clear();
    std::vector<double> mag;
    int start = 0;
    for (int i = 1; i <= grid_n; ++i) {
      if (i == grid_n || (es[static_cast<std::size_t>(i)] >= 0) !=
                             (es[static_cast<std::size_t>(start)] >= 0)) {
        int pick = start;
        for (int t = start; t < i; ++t)
          if (std::abs(es[static_cast<std::size_t>(t)]) >
              std::abs(es[static_cast<std::size_t>(pick)]))
            pick = t;
        ref.push_back(xs[static_cast<std::size_t>(pick)]);
        mag.push_back(std::abs(es[static_cast<std::size_t>(pick)]));
        start = i;
      }
    }
    // Sign segments alternate by construction; trim the weaker end until
    // exactly p+2 points remain.
    while (static_cast<int>(ref.size()) > r) {
      if (mag.front() <= mag.back()) {
        ref.erase(ref.begin());
        mag.erase(mag.begin());
      } else {
        ref.pop_back();
        mag.pop_back();
      }
    }
    return static_cast<int>(ref.size()) == r;
  };

  std::vector<double> ref;
  for (int iter = 0; iter < 40; ++iter) {
    if (!extract_reference(ref)) break;
    Eigen::MatrixXd a(r, r);
    Eigen::VectorXd b(r);
    const double half = f.lambda_max / 2.0;
    for (int i = 0; i < r; ++i) {
      const double x = ref[static_cast<std::size_t>(i)];
      double t0 = 1.0, t1 = x;
      a(i, 0) = 1.0;
      if (p >= 1) a(i, 1) = t1;
      for (int j = 2; j <= p; ++j) {
        const double t2 = 2.0 * x * t1 - t0;
        a(i, j) = t2;
        t0 = t1;
        t1 = t2;
      }
      a(i, p + 1) = (i % 2 == 0) ? 1.0 : -1.0;
      b(i) = f.target(half * (x + 1.0));
    }
    const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
    cur = sol.head(p + 1);
    const double dev = scan_error(f, cur, grid_n, &xs, &es);
    if (dev < best_dev * (1.0 - 1e-9)) {
      best_dev = dev;
      best = cur;
    } else if (dev <= best_dev * (1.0 + 1e-6)) {
      break;  // equioscillation reached
    }
  }
  f.coeffs = best;
}

}  // namespace

ChebyshevFilter chebyshev_fit(double lambda_k, int order, double alpha,
                              double lambda_max) {
  if (!(lambda_max > 0.0)) throw InvalidArgument("lambda_max must be positive");
  if (!(lambda_k > 0.0 && lambda_k < lambda_max))
    throw InvalidCutoff("cutoff must lie strictly inside (0, lambda_max)");
  if (order < 1) throw InvalidArgument("polynomial order must be >= 1");
  if (!(alpha > 0.0)) throw InvalidArgument("steepness must be positive");

  ChebyshevFilter f;
  f.order = order;
  f.lambda_max = lambda_max;
  f.lambda_k = lambda_k;
  f.alpha = alpha;
  f.coeffs = Eigen::VectorXd::Zero(order + 1);

  // Chebyshev-Gauss quadrature for the series coefficients
  //   c_j = (2/N) sum_i g(x(theta_i)) cos(j theta_i),  theta_i = pi(i+1/2)/N.
  // N far above the order gives the true truncated series, not an
  // interpolant.
  const int quad_n = std::max(1024, 4 * (order + 1));
  const double half = lambda_max / 2.0;
  std::vector<double> g(static_cast<std::size_t>(quad_n));
  std::vector<double> theta(static_cast<std::size_t>(quad_n));
  for (int i = 0; i < quad_n; ++i) {
    theta[static_cast<std::size_t>(i)] =
        std::numbers::pi * (i + 0.5) / quad_n;
    const double x = half * (std::cos(theta[static_cast<std::size_t>(i)]) + 1.0);
    g[static_cast<std::size_t>(i)] = f.target(x);
  }
  for (int j = 0; j <= order; ++j) {
    double acc = 0.0;
    for (int i = 0; i < quad_n; ++i)
      acc += g[static_cast<std::size_t>(i)] *
             std::cos(j * theta[static_cast<std::size_t>(i)]);
    f.coeffs(j) = 2.0 * acc / quad_n;
  }
  f.coeffs(0) /= 2.0;
  remez_polish(f);
  return f;
}

FilterMatrix ideal_lowpass_exact(const SpectrumSlice& slice) {
  if (!slice.basis)
    throw MissingBasis("ideal low-pass projector needs the eigenvector block");
  FilterMatrix out;
  out.values.noalias() = (*slice.basis) * slice.basis->transpose();
  return out;
}

FilterMatrix apply_filter_dense(const ChebyshevFilter& filter,
                                const SparseSymMatrix& mat, int dense_cap) {
  const int n = mat.dim();
  if (n > dense_cap)
    throw DimensionCap("dense filter: " + std::to_string(n) + " nodes exceeds cap " +
                       std::to_string(dense_cap));
  if (n == 0) throw EmptyGraph("dense filter needs a nonempty operator");
  FilterMatrix out;
  out.values.resize(n, n);
  const double scale = 2.0 / filter.lambda_max;
  const auto& c = filter.coeffs;
  const int p = filter.order;
  // Column c of the filter is sum_j coeffs_j T_j(Lhat) e_c with
  // Lhat = (2/lambda_max) L - I, via the three-term recurrence.
  parallel_for(0, n, [&](int col) {
    Eigen::VectorXd t0 = Eigen::VectorXd::Zero(n);
    t0(col) = 1.0;
    Eigen::VectorXd t1 = scale * mat.apply(t0) - t0;
    Eigen::VectorXd acc = c(0) * t0;
    if (p >= 1) acc += c(1) * t1;
    for (int j = 2; j <= p; ++j) {
      Eigen::VectorXd t2 = 2.0 * (scale * mat.apply(t1) - t1) - t0;
      acc += c(j) * t2;
      t0.swap(t1);
      t1.swap(t2);
    }
    out.values.col(col) = acc;
  });
  return out;
}

}  // namespace graphsamp
