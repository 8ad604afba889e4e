// Signal synthesis, noise injection, and the Monte-Carlo experiment driver:
// moment checks, exact SNR bookkeeping, row layout and seeding of the sweep,
// CSV golden output, and config parsing.

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphsamp/errors.hpp"
#include "graphsamp/graph.hpp"
#include "graphsamp/rng.hpp"
#include "graphsamp/signals.hpp"
#include "graphsamp/spectral.hpp"

using namespace graphsamp;

namespace {

SpectrumSlice dense_slice(const Graph& g, int k) {
  return dense_spectrum(normalized_laplacian(g), k);
}

SpectrumSlice identity_slice(int n) {
  SpectrumSlice s;
  s.k = n;
  s.lambdas = Eigen::VectorXd::Zero(n);
  s.basis = Eigen::MatrixXd::Identity(n, n);
  return s;
}

// Drops the trailing wall_ms column from every CSV line so comparisons
// ignore timing jitter.
std::string strip_wall_ms(const std::string& csv) {
  std::string out;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t nl = csv.find('\n', start);
    if (nl == std::string::npos) nl = csv.size();
    const std::string line = csv.substr(start, nl - start);
    const std::size_t comma = line.rfind(',');
    out += comma == std::string::npos ? line : line.substr(0, comma);
    out += '\n';
    start = nl + 1;
  }
  return out;
}

ExperimentConfig smoke_config() {
  ExperimentConfig cfg;
  cfg.graph.model = "small-world";
  cfg.graph.n = 64;
  cfg.graph.degree = 6;
  cfg.graph.rewire_p = 0.1;
  cfg.graph.seed = 7;
  cfg.k = 6;
  cfg.m_grid = {10, 16};
  cfg.snr_db_grid = {std::numeric_limits<double>::infinity()};
  cfg.methods = {"mia", "random"};
  cfg.recon = {"ls", "mia"};
  cfg.trials = 1;
  cfg.trunc_L = 10;
  cfg.poly_p = 25;
  cfg.alpha = 30.0;
  cfg.master_seed = 11;
  return cfg;
}

struct EnvGuard {
  std::string name;
  std::string old_value;
  bool had_value;
  explicit EnvGuard(const char* var) : name(var) {
    const char* v = std::getenv(var);
    had_value = v != nullptr;
    if (had_value) old_value = v;
  }
  ~EnvGuard() {
    if (had_value)
      setenv(name.c_str(), old_value.c_str(), 1);
    else
      unsetenv(name.c_str());
  }
};

}  // namespace

TEST_CASE("bandlimited synthesis lives in the spectral span") {
  auto slice = dense_slice(gen_small_world(48, 6, 0.15, 9), 5);

  SUBCASE("zero spread collapses to the mean coefficient") {
    BandlimitedSignal sig = gen_bandlimited(slice, 2.0, 0.0, 3);
    for (int i = 0; i < 5; ++i) CHECK(sig.coeffs(i) == 2.0);
    const Eigen::VectorXd expect = (*slice.basis) * Eigen::VectorXd::Constant(5, 2.0);
    CHECK((sig.x - expect).norm() <= 1e-12);
  }

  SUBCASE("analysis recovers the synthesis coefficients") {
    BandlimitedSignal sig = gen_bandlimited(slice, 1.0, 0.5, 11);
    const Eigen::VectorXd back = slice.basis->transpose() * sig.x;
    CHECK((back - sig.coeffs).norm() <= 1e-9);
  }

  SUBCASE("no energy leaks outside the low band") {
    BandlimitedSignal sig = gen_bandlimited(slice, 1.0, 0.5, 11);
    const Eigen::VectorXd projected =
        (*slice.basis) * (slice.basis->transpose() * sig.x);
    CHECK((sig.x - projected).norm() <= 1e-9);
  }

  SUBCASE("deterministic per seed") {
    BandlimitedSignal a = gen_bandlimited(slice, 1.0, 0.5, 21);
    BandlimitedSignal b = gen_bandlimited(slice, 1.0, 0.5, 21);
    BandlimitedSignal c = gen_bandlimited(slice, 1.0, 0.5, 22);
    CHECK((a.x - b.x).norm() == 0.0);
    CHECK((a.x - c.x).norm() > 0.0);
  }

  SUBCASE("input guards") {
    SpectrumSlice no_basis;
    no_basis.k = 3;
    no_basis.lambdas = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS((void)gen_bandlimited(no_basis, 1.0, 0.5, 1), MissingBasis);
    CHECK_THROWS_AS((void)gen_bandlimited(slice, 1.0, -0.1, 1), InvalidArgument);
  }
}

TEST_CASE("synthesis coefficients have the requested moments") {
  auto slice = identity_slice(200);  // x == coeffs on the identity basis
  const double mean = 1.0, stddev = 0.5;
  const int reps = 500;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    BandlimitedSignal sig = gen_bandlimited(slice, mean, stddev, 100 + r);
    sum += sig.coeffs.sum();
    sum_sq += sig.coeffs.squaredNorm();
  }
  const double count = 200.0 * reps;
  const double emp_mean = sum / count;
  const double emp_var = sum_sq / count - emp_mean * emp_mean;
  // 4-sigma windows: sd(mean) = 0.5/sqrt(1e5), sd(var) ~ sqrt(2/1e5)*0.25.
  CHECK(std::abs(emp_mean - mean) <= 4.0 * stddev / std::sqrt(count));
  CHECK(std::abs(emp_var - stddev * stddev) <=
        4.0 * std::sqrt(2.0 / count) * stddev * stddev);
}

TEST_CASE("noise injection respects the SNR accounting exactly") {
  Eigen::VectorXd x(4);
  x << 1.0, -2.0, 3.0, 0.5;

  SUBCASE("infinite SNR is a verbatim copy") {
    NoisySamples out = add_noise(x, std::numeric_limits<double>::infinity(), 2.5, 9);
    CHECK(out.sigma2 == 0.0);
    CHECK((out.y - x).norm() == 0.0);
  }

  SUBCASE("0 dB sets the noise variance to the signal power") {
    NoisySamples out = add_noise(x, 0.0, 2.5, 9);
    CHECK(out.sigma2 == doctest::Approx(2.5).epsilon(1e-15));
    CHECK((out.y - x).norm() > 0.0);
  }

  SUBCASE("10 dB divides the power by ten") {
    NoisySamples out = add_noise(x, 10.0, 2.5, 9);
    CHECK(out.sigma2 == doctest::Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("deterministic per seed") {
    NoisySamples a = add_noise(x, 0.0, 2.5, 31);
    NoisySamples b = add_noise(x, 0.0, 2.5, 31);
    NoisySamples c = add_noise(x, 0.0, 2.5, 32);
    CHECK((a.y - b.y).norm() == 0.0);
    CHECK((a.y - c.y).norm() > 0.0);
  }

  SUBCASE("finite SNR needs positive power") {
    CHECK_THROWS_AS((void)add_noise(x, 0.0, 0.0, 9), InvalidArgument);
    CHECK_THROWS_AS((void)add_noise(x, 0.0, -1.0, 9), InvalidArgument);
  }

  SUBCASE("empirical variance matches sigma2") {
    const int n = 100000;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    NoisySamples out = add_noise(zero, 0.0, 4.0, 77);
    REQUIRE(out.sigma2 == doctest::Approx(4.0));
    const double emp_var = out.y.squaredNorm() / n;
    // sd of the sample variance ~ sigma2 * sqrt(2/n).
    CHECK(std::abs(emp_var - 4.0) <= 4.0 * 4.0 * std::sqrt(2.0 / n));
  }
}

TEST_CASE("graph specs dispatch to the matching generator") {
  GraphSpec ws;
  ws.model = "small-world";
  ws.n = 40;
  ws.degree = 4;
  ws.rewire_p = 0.2;
  ws.seed = 5;
  const Graph a = build_graph(ws);
  const Graph b = gen_small_world(40, 4, 0.2, 5);
  REQUIRE(a.num_edges() == b.num_edges());
  CHECK(graph_to_text(a) == graph_to_text(b));

  GraphSpec comm;
  comm.model = "community";
  comm.n = 60;
  comm.communities = 3;
  comm.p_in = 0.4;
  comm.p_out = 0.02;
  comm.seed = 8;
  const Graph c = build_graph(comm);
  const Graph d = gen_community(60, 3, 0.4, 0.02, 8);
  CHECK(graph_to_text(c) == graph_to_text(d));

  GraphSpec bogus;
  bogus.model = "lattice";
  bogus.n = 10;
  CHECK_THROWS_AS((void)build_graph(bogus), InvalidArgument);
}

TEST_CASE("noiseless sweep recovers signals exactly and lays out rows in order") {
  ExperimentConfig cfg = smoke_config();
  ExperimentResult res = run_experiment(cfg);
  // methods x m_grid x snr x recon = 2 * 2 * 1 * 2.
  REQUIRE(res.rows.size() == 8);

  const char* expect_method[] = {"mia", "mia", "mia", "mia",
                                 "random", "random", "random", "random"};
  const int expect_m[] = {10, 10, 16, 16, 10, 10, 16, 16};
  const char* expect_recon[] = {"ls", "mia", "ls", "mia",
                                "ls", "mia", "ls", "mia"};
  for (int i = 0; i < 8; ++i) {
    CHECK(res.rows[static_cast<std::size_t>(i)].method == expect_method[i]);
    CHECK(res.rows[static_cast<std::size_t>(i)].m == expect_m[i]);
    CHECK(res.rows[static_cast<std::size_t>(i)].recon == expect_recon[i]);
    CHECK(res.rows[static_cast<std::size_t>(i)].trials == 1);
    CHECK(std::isinf(res.rows[static_cast<std::size_t>(i)].snr_db));
  }

  for (const auto& row : res.rows) {
    if (row.recon == "ls") {
      // Noiseless bandlimited signals invert exactly through least squares.
      CHECK(row.mean_mse <= 1e-12);
    } else {
      // The truncated path keeps a finite series bias.
      CHECK(std::isfinite(row.mean_mse));
      CHECK(row.mean_mse >= 0.0);
    }
    CHECK(row.stderr_mse == 0.0);  // single trial
  }

  // Cell seeds derive from (method index, m index, snr index).
  CHECK(res.rows[0].seed_base == derive_seed(11, {0, 0, 0}));
  CHECK(res.rows[1].seed_base == derive_seed(11, {0, 0, 0}));
  CHECK(res.rows[2].seed_base == derive_seed(11, {0, 1, 0}));
  CHECK(res.rows[4].seed_base == derive_seed(11, {1, 0, 0}));

  // Rerunning the identical config reproduces everything but timing.
  ExperimentResult again = run_experiment(cfg);
  CHECK(strip_wall_ms(result_csv(res)) == strip_wall_ms(result_csv(again)));
}

TEST_CASE("sweep validation rejects inconsistent configs") {
  ExperimentConfig cfg = smoke_config();
  cfg.k = 0;
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.trials = 0;
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.m_grid.clear();
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.m_grid = {4};  // below the bandwidth
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.methods = {"steepest"};
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.recon = {"tv"};
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.trunc_L = -1;
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.poly_p = 0;
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.alpha = 0.0;
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);

  cfg = smoke_config();
  cfg.m_grid = {100};  // exceeds n = 64
  CHECK_THROWS_AS((void)run_experiment(cfg), BudgetExceedsN);

  cfg = smoke_config();
  cfg.graph.model = "lattice";
  CHECK_THROWS_AS((void)run_experiment(cfg), InvalidArgument);
}

TEST_CASE("master seed steers every stochastic cell") {
  ExperimentConfig cfg = smoke_config();
  cfg.methods = {"random"};
  cfg.recon = {"ls"};
  cfg.snr_db_grid = {0.0};
  cfg.trials = 2;
  cfg.master_seed = 1;
  ExperimentResult a = run_experiment(cfg);
  cfg.master_seed = 2;
  ExperimentResult b = run_experiment(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    if (a.rows[i].mean_mse != b.rows[i].mean_mse) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("mean error degrades as the SNR drops") {
  ExperimentConfig cfg;
  cfg.graph.model = "small-world";
  cfg.graph.n = 48;
  cfg.graph.degree = 6;
  cfg.graph.rewire_p = 0.15;
  cfg.graph.seed = 3;
  cfg.k = 5;
  cfg.m_grid = {12};
  cfg.snr_db_grid = {std::numeric_limits<double>::infinity(), 20.0, 0.0};
  cfg.methods = {"mfn"};
  cfg.recon = {"ls"};
  cfg.trials = 20;
  cfg.master_seed = 5;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.rows.size() == 3);
  const auto& clean = res.rows[0];
  const auto& mid = res.rows[1];
  const auto& loud = res.rows[2];
  CHECK(clean.mean_mse <= 1e-12);
  CHECK(mid.mean_mse > clean.mean_mse);
  // 100x noise power at 3-sigma confidence.
  CHECK(loud.mean_mse > mid.mean_mse + 3.0 * (loud.stderr_mse + mid.stderr_mse));
}

TEST_CASE("worker count does not change the numbers") {
  EnvGuard guard("GRAPHSAMP_THREADS");
  ExperimentConfig cfg = smoke_config();
  cfg.snr_db_grid = {10.0};
  cfg.trials = 3;

  setenv("GRAPHSAMP_THREADS", "1", 1);
  const std::string csv1 = strip_wall_ms(result_csv(run_experiment(cfg)));
  setenv("GRAPHSAMP_THREADS", "4", 1);
  const std::string csv4 = strip_wall_ms(result_csv(run_experiment(cfg)));
  CHECK(csv1 == csv4);
}

TEST_CASE("result CSV uses the pinned header and number rendering") {
  ExperimentResult res;
  ResultRow a;
  a.method = "mia";
  a.recon = "ls";
  a.m = 60;
  a.snr_db = 0.0;
  a.mean_mse = 1.5;
  a.stderr_mse = 0.25;
  a.trials = 50;
  a.seed_base = 123;
  a.wall_ms = 7;
  ResultRow b;
  b.method = "random";
  b.recon = "mia";
  b.m = 60;
  b.snr_db = std::numeric_limits<double>::infinity();
  b.mean_mse = std::numeric_limits<double>::quiet_NaN();
  b.stderr_mse = std::numeric_limits<double>::quiet_NaN();
  b.trials = 0;
  b.seed_base = 456;
  b.wall_ms = 0;
  res.rows = {a, b};

  CHECK(result_csv(res) ==
        "method,recon,m,snr_db,mean_mse,stderr,trials,seed_base,wall_ms\n"
        "mia,ls,60,0,1.5,0.25,50,123,7\n"
        "random,mia,60,inf,nan,nan,0,456,0\n");
}

TEST_CASE("experiment configs parse from JSON with defaults") {
  const std::string full = R"({
    "graph": {"model": "small-world", "n": 64, "degree": 6, "rewire_p": 0.1, "seed": 7},
    "k": 6,
    "m_grid": [10, 16],
    "snr_db_grid": ["inf", 10, 0],
    "methods": ["mia", "random"],
    "recon": ["ls", "mia"],
    "trials": 4,
    "trunc_L": 8,
    "poly_p": 20,
    "alpha": 25.0,
    "signal_mean": 0.5,
    "signal_std": 0.25,
    "master_seed": 99,
    "dense_cap": 2048
  })";
  ExperimentConfig cfg = parse_experiment_config(full);
  CHECK(cfg.graph.model == "small-world");
  CHECK(cfg.graph.n == 64);
  CHECK(cfg.graph.degree == 6);
  CHECK(cfg.graph.seed == 7);
  CHECK(cfg.k == 6);
  CHECK(cfg.m_grid == std::vector<int>{10, 16});
  REQUIRE(cfg.snr_db_grid.size() == 3);
  CHECK(std::isinf(cfg.snr_db_grid[0]));
  CHECK(cfg.snr_db_grid[1] == 10.0);
  CHECK(cfg.snr_db_grid[2] == 0.0);
  CHECK(cfg.methods == std::vector<std::string>{"mia", "random"});
  CHECK(cfg.recon == std::vector<std::string>{"ls", "mia"});
  CHECK(cfg.trials == 4);
  CHECK(cfg.trunc_L == 8);
  CHECK(cfg.poly_p == 20);
  CHECK(cfg.alpha == 25.0);
  CHECK(cfg.signal_mean == 0.5);
  CHECK(cfg.signal_std == 0.25);
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.dense_cap == 2048);

  const std::string minimal = R"({
    "graph": {"model": "community", "n": 100, "seed": 1},
    "k": 4,
    "m_grid": [10],
    "snr_db_grid": [0],
    "methods": ["mfn"],
    "master_seed": 3
  })";
  ExperimentConfig min_cfg = parse_experiment_config(minimal);
  CHECK(min_cfg.recon == std::vector<std::string>{"ls"});
  CHECK(min_cfg.trials == 50);
  CHECK(min_cfg.trunc_L == 10);
  CHECK(min_cfg.poly_p == 25);
  CHECK(min_cfg.graph.communities == 10);
  CHECK(min_cfg.graph.p_in == 0.2);
}

TEST_CASE("experiment config parsing rejects malformed inputs") {
  CHECK_THROWS_AS((void)parse_experiment_config("{ nope"), InvalidArgument);

  // Missing master_seed.
  CHECK_THROWS_AS((void)parse_experiment_config(R"({
    "graph": {"model": "small-world", "n": 64, "seed": 7},
    "k": 6, "m_grid": [10], "snr_db_grid": [0], "methods": ["mia"]
  })"),
                  InvalidArgument);

  // Unknown method.
  CHECK_THROWS_AS((void)parse_experiment_config(R"({
    "graph": {"model": "small-world", "n": 64, "seed": 7},
    "k": 6, "m_grid": [10], "snr_db_grid": [0], "methods": ["annealing"],
    "master_seed": 1
  })"),
                  InvalidArgument);

  // Budget below bandwidth.
  CHECK_THROWS_AS((void)parse_experiment_config(R"({
    "graph": {"model": "small-world", "n": 64, "seed": 7},
    "k": 6, "m_grid": [4], "snr_db_grid": [0], "methods": ["mia"],
    "master_seed": 1
  })"),
                  InvalidArgument);

  // Unparseable SNR string.
  CHECK_THROWS_AS((void)parse_experiment_config(R"({
    "graph": {"model": "small-world", "n": 64, "seed": 7},
    "k": 6, "m_grid": [10], "snr_db_grid": ["loud"], "methods": ["mia"],
    "master_seed": 1
  })"),
                  InvalidArgument);

  // trials must be positive.
  CHECK_THROWS_AS((void)parse_experiment_config(R"({
    "graph": {"model": "small-world", "n": 64, "seed": 7},
    "k": 6, "m_grid": [10], "snr_db_grid": [0], "methods": ["mia"],
    "trials": 0, "master_seed": 1
  })"),
                  InvalidArgument);

  CHECK_THROWS_AS((void)load_experiment_config("/nonexistent/config.json"),
                  InvalidArgument);
}
