#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphsamp/graph.hpp"
#include "graphsamp/spectral.hpp"

namespace graphsamp {

struct BandlimitedSignal {
  Eigen::VectorXd x;
  int k = 0;
  Eigen::VectorXd coeffs;
};

// Spectral coefficients iid Normal(mean, std^2); x = V_K * coeffs.
BandlimitedSignal gen_bandlimited(const SpectrumSlice& basis, double mean,
                                  double stddev, std::uint64_t seed);

struct NoisySamples {
  Eigen::VectorXd y;
  double sigma2 = 0.0;
};

// AWGN at the requested SNR: sigma2 = signal_power / 10^(snr_db/10).
// Infinite snr_db returns the samples untouched with sigma2 = 0.
NoisySamples add_noise(const Eigen::VectorXd& x_s, double snr_db,
                       double signal_power, std::uint64_t seed);

struct GraphSpec {
  std::string model;  // "small-world" or "community"
  int n = 0;
  int degree = 8;
  double rewire_p = 0.1;
  int communities = 10;
  double p_in = 0.2;
  double p_out = 0.002;
  std::uint64_t seed = 0;
};

Graph build_graph(const GraphSpec& spec);

struct ExperimentConfig {
  GraphSpec graph;
  int k = 50;
  std::vector<int> m_grid;
  std::vector<double> snr_db_grid;    // may contain +infinity
  std::vector<std::string> methods;   // subset of {mia, mfn, eoptimal, random}
  std::vector<std::string> recon;     // subset of {ls, mia}
  int trials = 50;
  int trunc_L = 10;
  int poly_p = 25;
  double alpha = 30.0;
  double signal_mean = 1.0;
  double signal_std = 0.5;
  std::uint64_t master_seed = 0;
  int dense_cap = kDefaultDenseCap;
};

struct ResultRow {
  std::string method;
  std::string recon;
  int m = 0;
  double snr_db = 0.0;
  double mean_mse = 0.0;
  double stderr_mse = 0.0;
  int trials = 0;
  std::uint64_t seed_base = 0;
  std::int64_t wall_ms = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
};

// Monte-Carlo sweep: one graph and spectrum per config, one selection per
// (method, max m) with greedy prefixes reused for smaller budgets, then per
// (method, m, snr) cell `trials` signal+noise draws and one row per
// reconstructor. Unqualified (method, m) cells yield NaN rows with zero
// trials instead of aborting. Every draw's seed derives from master_seed
// and the cell coordinates, so reruns are reproducible.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& text);

// CSV with pinned header
// method,recon,m,snr_db,mean_mse,stderr,trials,seed_base,wall_ms.
std::string result_csv(const ExperimentResult& result);

}  // namespace graphsamp
