#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include <graphsamp/errors.hpp>
#include <graphsamp/graph.hpp>
#include <graphsamp/spectral.hpp>

using namespace graphsamp;

namespace {

Graph path3() { return Graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

Graph cycle(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return Graph(n, edges);
}

// Normalized-Laplacian eigenvalues of the n-cycle from the circulant
// formula 1 - cos(2*pi*j/n), an oracle independent of any eigensolver.
std::vector<double> cycle_spectrum(int n) {
  std::vector<double> lam(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    lam[static_cast<std::size_t>(j)] =
        1.0 - std::cos(2.0 * std::numbers::pi * j / n);
  std::sort(lam.begin(), lam.end());
  return lam;
}

double grid_deviation(const ChebyshevFilter& f, int points = 1000) {
  double dev = 0.0;
  for (int i = 0; i < points; ++i) {
    const double lam = f.lambda_max * i / (points - 1);
    dev = std::max(dev, std::abs(f.evaluate(lam) - f.target(lam)));
  }
  return dev;
}

}  // namespace

TEST_CASE("dense_spectrum reproduces the P3 spectrum with tight residuals") {
  const auto lap = normalized_laplacian(path3());
  const SpectrumSlice s = dense_spectrum(lap, 3);
  REQUIRE(s.k == 3);
  CHECK(s.lambdas(0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(s.lambdas(1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.lambdas(2) == doctest::Approx(2.0).epsilon(1e-10));

  REQUIRE(s.basis.has_value());
  const Eigen::MatrixXd& v = *s.basis;
  const Eigen::MatrixXd dense = lap.dense();
  for (int i = 0; i < 3; ++i)
    CHECK((dense * v.col(i) - s.lambdas(i) * v.col(i)).norm() <= 1e-8);
  CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);
}

TEST_CASE("dense_spectrum matches circulant eigenvalues on cycles") {
  {
    const SpectrumSlice s = dense_spectrum(normalized_laplacian(cycle(4)), 2);
    CHECK(s.lambdas(1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    const int n = 8;
    const SpectrumSlice s = dense_spectrum(normalized_laplacian(cycle(n)), n);
    const auto oracle = cycle_spectrum(n);
    for (int i = 0; i < n; ++i)
      CHECK(s.lambdas(i) ==
            doctest::Approx(oracle[static_cast<std::size_t>(i)]).epsilon(1e-10));
  }
}

TEST_CASE("the connected-graph null vector is D^{1/2} 1") {
  Graph g = gen_small_world(100, 6, 0.1, 3);
  const auto lap = normalized_laplacian(g);
  const SpectrumSlice s = dense_spectrum(lap, 1);
  CHECK(std::abs(s.lambdas(0)) < 1e-9);

  const auto deg = g.degrees();
  Eigen::VectorXd expect(100);
  for (int i = 0; i < 100; ++i) expect(i) = std::sqrt(deg[static_cast<std::size_t>(i)]);
  expect.normalize();
  const double align = std::abs(expect.dot(s.basis->col(0)));
  CHECK(align == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("dense_spectrum guards its preconditions") {
  const auto lap = normalized_laplacian(gen_small_world(12, 4, 0.0, 1));
  CHECK_THROWS_AS(dense_spectrum(lap, 3, /*dense_cap=*/10), DimensionCap);
  CHECK_THROWS_AS(dense_spectrum(lap, 0), InvalidArgument);
  CHECK_THROWS_AS(dense_spectrum(lap, 13), InvalidArgument);
}

TEST_CASE("lanczos agrees with the dense oracle") {
  {
    const auto lap = normalized_laplacian(path3());
    CHECK(lanczos_lambda_k(lap, 2, 3, 7) == doctest::Approx(1.0).epsilon(1e-8));
  }
  {
    const auto lap = normalized_laplacian(gen_small_world(50, 4, 0.1, 5));
    CHECK(std::abs(lanczos_lambda_k_auto(lap, 1, 11)) <= 1e-8);
  }
  {
    const auto lap = normalized_laplacian(gen_small_world(200, 6, 0.1, 9));
    const double dense = dense_spectrum(lap, 10).lambdas(9);
    const double est = lanczos_lambda_k_auto(lap, 10, 21);
    CHECK(std::abs(est - dense) <= 1e-6);
  }
  {
    const auto lap = normalized_laplacian(gen_community(150, 5, 0.3, 0.02, 4));
    const double dense = dense_spectrum(lap, 5).lambdas(4);
    const double est = lanczos_lambda_k_auto(lap, 5, 33);
    CHECK(std::abs(est - dense) <= 1e-6);
  }
}

TEST_CASE("lanczos is deterministic per seed and validates steps") {
  const auto lap = normalized_laplacian(gen_small_world(80, 6, 0.2, 2));
  CHECK(lanczos_lambda_k(lap, 5, 40, 77) == lanczos_lambda_k(lap, 5, 40, 77));
  CHECK_THROWS_AS(lanczos_lambda_k(lap, 5, 5, 1), InvalidArgument);
  CHECK_THROWS_AS(lanczos_lambda_k(lap, 5, 81, 1), InvalidArgument);
  CHECK_THROWS_AS(lanczos_lambda_k(lap, 0, 10, 1), InvalidArgument);
}

TEST_CASE("lanczos reports breakdown when the recurrence collapses") {
  // On the identity matrix every start vector is an eigenvector, so the
  // second basis vector vanishes for any restart seed.
  std::vector<Eigen::Triplet<double>> diag;
  for (int i = 0; i < 8; ++i) diag.emplace_back(i, i, 1.0);
  const SparseSymMatrix ident(8, diag);
  CHECK_THROWS_AS(lanczos_lambda_k(ident, 1, 4, 3), Breakdown);
}

TEST_CASE("ideal_lowpass_exact builds the spectral projector") {
  {
    Graph g(2, {{0, 1, 1.0}});
    const SpectrumSlice s = dense_spectrum(normalized_laplacian(g), 1);
    const FilterMatrix t = ideal_lowpass_exact(s);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(t.values(i, j) == doctest::Approx(0.5).epsilon(1e-12));
  }
  {
    const auto lap = normalized_laplacian(gen_small_world(24, 4, 0.2, 8));
    const SpectrumSlice full = dense_spectrum(lap, 24);
    const FilterMatrix t = ideal_lowpass_exact(full);
    CHECK((t.values - Eigen::MatrixXd::Identity(24, 24)).cwiseAbs().maxCoeff() <
          1e-9);
  }
  {
    const auto lap = normalized_laplacian(gen_small_world(64, 6, 0.15, 21));
    const SpectrumSlice s = dense_spectrum(lap, 9);
    const FilterMatrix t = ideal_lowpass_exact(s);
    CHECK(std::abs(t.values.trace() - 9.0) < 1e-6);
    CHECK((t.values - t.values.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((t.values * t.values - t.values).cwiseAbs().maxCoeff() < 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.values);
    for (int i = 0; i < 64; ++i) {
      const double ev = es.eigenvalues()(i);
      CHECK(std::min(std::abs(ev), std::abs(ev - 1.0)) < 1e-6);
    }
  }
  SpectrumSlice no_basis;
  no_basis.k = 2;
  no_basis.lambdas = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(ideal_lowpass_exact(no_basis), MissingBasis);
}

TEST_CASE("chebyshev_fit hits the documented accuracy marks") {
  const ChebyshevFilter f = chebyshev_fit(1.0, 25, 30.0);
  CHECK(std::abs(f.evaluate(0.0) - 1.0) <= 0.05);
  CHECK(std::abs(f.evaluate(2.0)) <= 0.05);
  CHECK(std::abs(f.evaluate(1.0) - 0.5) <= 0.05);

  const ChebyshevFilter g = chebyshev_fit(0.3, 25, 30.0);
  CHECK(std::abs(g.evaluate(0.3) - 0.5) <= 0.05);

  // Grid deviation meets the 0.02 bound at pipeline-scale cutoffs (the
  // small-world 5% bandwidth regime sits near 0.16).
  for (double lk : {0.162, 0.3, 0.5}) {
    CHECK(grid_deviation(chebyshev_fit(lk, 25, 30.0)) <= 0.02);
  }
}

TEST_CASE("chebyshev_fit error is nonincreasing in the order") {
  const double dev10 = grid_deviation(chebyshev_fit(1.0, 10, 30.0));
  const double dev40 = grid_deviation(chebyshev_fit(1.0, 40, 30.0));
  CHECK(dev40 <= dev10);
}

TEST_CASE("chebyshev_fit endpoint invariants hold across cutoffs") {
  for (double lk = 0.1; lk < 2.0; lk += 0.2) {
    const ChebyshevFilter f = chebyshev_fit(lk, 25, 30.0);
    CHECK(f.evaluate(0.0) >= 0.9);
    CHECK(f.evaluate(0.0) <= 1.1);
    CHECK(f.evaluate(2.0) >= -0.1);
    CHECK(f.evaluate(2.0) <= 0.1);
  }
}

TEST_CASE("chebyshev_fit is deterministic and validates inputs") {
  const ChebyshevFilter a = chebyshev_fit(0.7, 25, 30.0);
  const ChebyshevFilter b = chebyshev_fit(0.7, 25, 30.0);
  CHECK(a.coeffs == b.coeffs);

  CHECK_THROWS_AS(chebyshev_fit(0.0, 25, 30.0), InvalidCutoff);
  CHECK_THROWS_AS(chebyshev_fit(2.0, 25, 30.0), InvalidCutoff);
  CHECK_THROWS_AS(chebyshev_fit(-0.5, 25, 30.0), InvalidCutoff);
  CHECK_THROWS_AS(chebyshev_fit(0.5, 0, 30.0), InvalidArgument);
  CHECK_THROWS_AS(chebyshev_fit(0.5, 25, 0.0), InvalidArgument);
  CHECK_THROWS_AS(chebyshev_fit(0.5, 25, 30.0, -1.0), InvalidArgument);
}

TEST_CASE("apply_filter_dense realizes the polynomial functional calculus") {
  Graph g = gen_small_world(64, 6, 0.15, 33);
  const auto lap = normalized_laplacian(g);
  const SpectrumSlice full = dense_spectrum(lap, 64);
  const ChebyshevFilter f = chebyshev_fit(full.lambdas(9), 25, 30.0);
  const FilterMatrix t = apply_filter_dense(f, lap);

  CHECK((t.values - t.values.transpose()).cwiseAbs().maxCoeff() < 1e-9);

  // Rayleigh quotients against every dense eigenpair.
  for (int i = 0; i < 64; ++i) {
    const Eigen::VectorXd v = full.basis->col(i);
    const double quad = v.dot(t.values * v);
    CHECK(std::abs(quad - f.evaluate(full.lambdas(i))) <= 1e-10);
  }

  // Whole-spectrum consistency: eigenvalues of T^Poly are the fitted
  // polynomial evaluated on the Laplacian spectrum.
  Eigen::VectorXd expect(64);
  for (int i = 0; i < 64; ++i) expect(i) = f.evaluate(full.lambdas(i));
  std::sort(expect.data(), expect.data() + expect.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.values);
  for (int i = 0; i < 64; ++i)
    CHECK(std::abs(es.eigenvalues()(i) - expect(i)) <= 1e-9);
}

TEST_CASE("polynomial filter tracks the exact projector away from the cutoff") {
  Graph g = gen_small_world(200, 8, 0.1, 14);
  const auto lap = normalized_laplacian(g);
  const int k = 20;
  const SpectrumSlice full = dense_spectrum(lap, 200);
  const double lambda_k = full.lambdas(k - 1);
  const ChebyshevFilter f = chebyshev_fit(lambda_k, 25, 30.0);
  const FilterMatrix t_poly = apply_filter_dense(f, lap);

  // Reassemble the comparison excluding eigenpairs within 0.05 of the
  // cutoff, where any polynomial surrogate of the step must smear.
  Eigen::MatrixXd err = Eigen::MatrixXd::Zero(200, 200);
  for (int i = 0; i < 200; ++i) {
    if (std::abs(full.lambdas(i) - lambda_k) < 0.05) continue;
    const double step = i < k ? 1.0 : 0.0;
    const double diff = f.evaluate(full.lambdas(i)) - step;
    err.noalias() += diff * full.basis->col(i) * full.basis->col(i).transpose();
  }
  CHECK(err.cwiseAbs().maxCoeff() <= 0.1);
}

TEST_CASE("apply_filter_dense honors the dense cap") {
  const auto lap = normalized_laplacian(gen_small_world(16, 4, 0.0, 1));
  const ChebyshevFilter f = chebyshev_fit(0.5, 10, 30.0);
  CHECK_THROWS_AS(apply_filter_dense(f, lap, /*dense_cap=*/8), DimensionCap);
}
