#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphsamp/spectral.hpp"

namespace graphsamp {

// Ordered sample set S. gamma_tilde caches the truncated Neumann sum
// sum_{l=0}^{L} (I_S - T_S)^l on the final set when the selector provides it.
struct SamplingSet {
  int n = 0;
  std::string method;
  std::vector<int> indices;
  int trunc_L = 0;
  std::optional<Eigen::MatrixXd> gamma_tilde;
  std::vector<double> per_step_scores;
  std::optional<std::uint64_t> seed;

  int m() const { return static_cast<int>(indices.size()); }
};

struct SelectorConfig {
  std::string method = "mia";
  int m = 1;
  int trunc_L = 10;
  std::uint64_t seed = 0;
  double rank_tol = 1e-10;
};

// Full per-step candidate scores (node-indexed, NaN for already-selected
// nodes). Diagnostic output for tests.
struct SelectionTrace {
  std::vector<Eigen::VectorXd> step_scores;
};

// Greedy truncated-Neumann trace minimization: at each step, for every
// candidate i the objective is trace(sum_{l=0}^{L} Gamma_i^l) with
// Gamma_i = I - T[S+i, S+i]; the smallest value wins, ties to the smallest
// node index. Returns S with gamma_tilde on the final set.
SamplingSet mia_sample(const FilterMatrix& t_poly, int m, int trunc_L,
                       SelectionTrace* trace = nullptr);

// Greedy A-optimality: minimizes trace of the pseudo-inverse of
// Psi = (C V_K)^T C V_K, with a rank penalty while rank < K so early steps
// prefer rank growth.
SamplingSet mfn_sample(const SpectrumSlice& basis, int m,
                       double rank_tol = 1e-10, SelectionTrace* trace = nullptr);

// Greedy E-optimality: maximizes the smallest singular value of C V_K
// (smallest over min(|S|, K) directions, so rank growth is rewarded before
// |S| reaches K). Ties to the smallest node index.
SamplingSet eopt_sample(const SpectrumSlice& basis, int m,
                        SelectionTrace* trace = nullptr);

// Uniform without replacement; deterministic per seed.
SamplingSet random_sample(int n, int m, std::uint64_t seed);

// True iff the m x K matrix of V_K rows at S has numerical rank K
// (sigma_K > tol * sigma_1).
bool is_qualified(const SamplingSet& s, const SpectrumSlice& basis,
                  double tol = 1e-10);

// Relative truncation error of the L-term Neumann sum,
// [sum_i delta_i^{L+1}/(1-delta_i)] / trace(Psi^{-1}); cross-checks the
// closed form against the direct trace difference.
double truncation_ratio(const SpectrumSlice& basis, const SamplingSet& s,
                        int trunc_L);

// Shared helpers (also used by tests and the reconstruction module).
Eigen::MatrixXd basis_rows(const Eigen::MatrixXd& basis,
                           const std::vector<int>& indices);
Eigen::MatrixXd psi_matrix(const SpectrumSlice& basis,
                           const std::vector<int>& indices);
// Eigenvalues of I - Psi, ascending.
Eigen::VectorXd delta_spectrum(const Eigen::MatrixXd& psi);
// sum_{l=0}^{L} a^l built by Horner iteration acc <- a * acc + I.
Eigen::MatrixXd neumann_power_sum(const Eigen::MatrixXd& a, int trunc_L);
Eigen::MatrixXd gamma_tilde_matrix(const FilterMatrix& t_poly,
                                   const std::vector<int>& indices,
                                   int trunc_L);

void save_sampling_set(const SamplingSet& s, const std::filesystem::path& path);
SamplingSet load_sampling_set(const std::filesystem::path& path);
std::string sampling_set_to_json(const SamplingSet& s);

}  // namespace graphsamp
