#include "graphsamp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphsamp/errors.hpp"
#include "graphsamp/numfmt.hpp"
#include "graphsamp/parallel.hpp"
#include "graphsamp/rng.hpp"

namespace graphsamp {

namespace {

constexpr double kRankPenalty = 1e12;

void check_budget(int m, int n) {
  if (m < 1 || m > n)
    throw BudgetExceedsN("sample budget " + std::to_string(m) +
                         " outside [1, " + std::to_string(n) + "]");
}

const Eigen::MatrixXd& require_basis(const SpectrumSlice& basis) {
  if (!basis.basis) throw MissingBasis("selector needs the eigenvector block");
  return *basis.basis;
}

// Deterministic argmin scan in node order; strict < keeps the smallest index
// on ties. NaN entries (already-selected nodes) never win.
int argmin_score(const Eigen::VectorXd& scores) {
  int best = -1;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores(i))) continue;
    if (scores(i) < best_val) {
      best_val = scores(i);
      best = i;
    }
  }
  return best;
}

int argmax_score(const Eigen::VectorXd& scores) {
  int best = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores(i))) continue;
    if (scores(i) > best_val) {
      best_val = scores(i);
      best = i;
    }
  }
  return best;
}

}  // namespace

Eigen::MatrixXd basis_rows(const Eigen::MatrixXd& basis,
                           const std::vector<int>& indices) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(indices.size()), basis.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int idx = indices[r];
    if (idx < 0 || idx >= basis.rows())
      throw InvalidArgument("sample index out of range: " + std::to_string(idx));
    rows.row(static_cast<Eigen::Index>(r)) = basis.row(idx);
  }
  return rows;
}

Eigen::MatrixXd psi_matrix(const SpectrumSlice& basis,
                           const std::vector<int>& indices) {
  const Eigen::MatrixXd rows = basis_rows(require_basis(basis), indices);
  Eigen::MatrixXd psi(rows.cols(), rows.cols());
  psi.noalias() = rows.transpose() * rows;
  return psi;
}

Eigen::VectorXd delta_spectrum(const Eigen::MatrixXd& psi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(psi, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NotConverged("eigensolver failed on Psi");
  Eigen::VectorXd deltas = (1.0 - solver.eigenvalues().array()).matrix();
  std::sort(deltas.data(), deltas.data() + deltas.size());
  return deltas;
}

Eigen::MatrixXd neumann_power_sum(const Eigen::MatrixXd& a, int trunc_L) {
  if (trunc_L < 0) throw InvalidArgument("truncation order must be >= 0");
  const Eigen::Index s = a.rows();
  if (a.cols() != s) throw ShapeMismatch("power sum needs a square matrix");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(s, s);
  Eigen::MatrixXd tmp(s, s);
  for (int l = 0; l < trunc_L; ++l) {
    tmp.noalias() = a * acc;
    tmp.diagonal().array() += 1.0;
    acc.swap(tmp);
  }
  return acc;
}

Eigen::MatrixXd gamma_tilde_matrix(const FilterMatrix& t_poly,
                                   const std::vector<int>& indices,
                                   int trunc_L) {
  const Eigen::Index s = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd gamma(s, s);
  for (Eigen::Index r = 0; r < s; ++r)
    for (Eigen::Index c = 0; c < s; ++c)
      gamma(r, c) = (r == c ? 1.0 : 0.0) -
                    t_poly.values(indices[static_cast<std::size_t>(r)],
                                  indices[static_cast<std::size_t>(c)]);
  return neumann_power_sum(gamma, trunc_L);
}

SamplingSet mia_sample(const FilterMatrix& t_poly, int m, int trunc_L,
                       SelectionTrace* trace) {
  const int n = t_poly.dim();
  check_budget(m, n);
  if (trunc_L < 0) throw InvalidArgument("truncation order must be >= 0");

  SamplingSet out;
  out.n = n;
  out.method = "mia";
  out.trunc_L = trunc_L;

  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int step = 0; step < m; ++step) {
    const int s1 = step + 1;
    Eigen::VectorXd scores = Eigen::VectorXd::Constant(n, nan);
    parallel_for(0, n, [&](int i) {
      if (selected[static_cast<std::size_t>(i)]) return;
      Eigen::MatrixXd gamma(s1, s1);
      for (int r = 0; r < s1; ++r) {
        const int ri = r < step ? out.indices[static_cast<std::size_t>(r)] : i;
        for (int c = 0; c < s1; ++c) {
          const int ci = c < step ? out.indices[static_cast<std::size_t>(c)] : i;
          gamma(r, c) = (ri == ci ? 1.0 : 0.0) - t_poly.values(ri, ci);
        }
      }
      // Horner accumulation acc <- gamma * acc + I, L times.
      Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(s1, s1);
      Eigen::MatrixXd tmp(s1, s1);
      for (int l = 0; l < trunc_L; ++l) {
        tmp.noalias() = gamma * acc;
        tmp.diagonal().array() += 1.0;
        acc.swap(tmp);
      }
      scores(i) = acc.trace();
    });
    const int u = argmin_score(scores);
    out.indices.push_back(u);
    selected[static_cast<std::size_t>(u)] = 1;
    out.per_step_scores.push_back(scores(u));
    if (trace) trace->step_scores.push_back(scores);
  }
  out.gamma_tilde = gamma_tilde_matrix(t_poly, out.indices, trunc_L);
  return out;
}

namespace {

// Pseudo-inverse trace of Psi plus a rank penalty: unreached rank directions
// cost kRankPenalty each, so the greedy grows rank first.
double mfn_objective(const Eigen::MatrixXd& psi, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(psi, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd mu = solver.eigenvalues();
  const int k = static_cast<int>(mu.size());
  const double mu_max = std::max(mu(k - 1), 0.0);
  // The caller's tolerance acts on singular values (mu = sigma^2), but the
  // cut must stay above the symmetric-eigensolver noise floor: an exactly
  // singular Psi reports its null eigenvalues as O(k * eps * |Psi|) of either
  // sign, and counting a positive one as rank would both misreport the rank
  // and leak an enormous 1/mu term into the trace.
  const double noise_floor =
      16.0 * static_cast<double>(k) * std::numeric_limits<double>::epsilon();
  const double thr = std::max(rank_tol * rank_tol, noise_floor) * mu_max;
  double trace_pinv = 0.0;
  int rank = 0;
  for (int i = 0; i < k; ++i) {
    if (mu(i) > thr && mu(i) > 0.0) {
      trace_pinv += 1.0 / mu(i);
      ++rank;
    }
  }
  return trace_pinv + static_cast<double>(k - rank) * kRankPenalty;
}

}  // namespace

SamplingSet mfn_sample(const SpectrumSlice& basis, int m, double rank_tol,
                       SelectionTrace* trace) {
  const Eigen::MatrixXd& v = require_basis(basis);
  const int n = static_cast<int>(v.rows());
  const int k = static_cast<int>(v.cols());
  check_budget(m, n);

  SamplingSet out;
  out.n = n;
  out.method = "mfn";

  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd psi_cur = Eigen::MatrixXd::Zero(k, k);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int step = 0; step < m; ++step) {
    Eigen::VectorXd scores = Eigen::VectorXd::Constant(n, nan);
    parallel_for(0, n, [&](int i) {
      if (selected[static_cast<std::size_t>(i)]) return;
      Eigen::MatrixXd psi = psi_cur;
      psi.noalias() += v.row(i).transpose() * v.row(i);
      scores(i) = mfn_objective(psi, rank_tol);
    });
    const int u = argmin_score(scores);
    out.indices.push_back(u);
    selected[static_cast<std::size_t>(u)] = 1;
    psi_cur.noalias() += v.row(u).transpose() * v.row(u);
    out.per_step_scores.push_back(scores(u));
    if (trace) trace->step_scores.push_back(scores);
  }
  return out;
}

SamplingSet eopt_sample(const SpectrumSlice& basis, int m,
                        SelectionTrace* trace) {
  const Eigen::MatrixXd& v = require_basis(basis);
  const int n = static_cast<int>(v.rows());
  const int k = static_cast<int>(v.cols());
  check_budget(m, n);

  SamplingSet out;
  out.n = n;
  out.method = "eoptimal";

  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd psi_cur = Eigen::MatrixXd::Zero(k, k);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int step = 0; step < m; ++step) {
    const int s1 = step + 1;
    Eigen::VectorXd scores = Eigen::VectorXd::Constant(n, nan);
    parallel_for(0, n, [&](int i) {
      if (selected[static_cast<std::size_t>(i)]) return;
      double lambda_min = 0.0;
      if (s1 <= k) {
        // Gram matrix of the selected rows: its smallest eigenvalue is the
        // squared smallest singular value over the min(|S|, K) directions.
        std::vector<int> idx = out.indices;
        idx.push_back(i);
        const Eigen::MatrixXd rows = basis_rows(v, idx);
        Eigen::MatrixXd gram(s1, s1);
        gram.noalias() = rows * rows.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
        lambda_min = solver.eigenvalues()(0);
      } else {
        Eigen::MatrixXd psi = psi_cur;
        psi.noalias() += v.row(i).transpose() * v.row(i);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(psi, Eigen::EigenvaluesOnly);
        lambda_min = solver.eigenvalues()(0);
      }
      scores(i) = std::sqrt(std::max(lambda_min, 0.0));
    });
    const int u = argmax_score(scores);
    out.indices.push_back(u);
    selected[static_cast<std::size_t>(u)] = 1;
    psi_cur.noalias() += v.row(u).transpose() * v.row(u);
    out.per_step_scores.push_back(scores(u));
    if (trace) trace->step_scores.push_back(scores);
  }
  return out;
}

SamplingSet random_sample(int n, int m, std::uint64_t seed) {
  check_budget(m, n);
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  SamplingSet out;
  out.n = n;
  out.method = "random";
  out.seed = seed;
  for (int t = 0; t < m; ++t) {
    const int j = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - t)));
    std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
    out.indices.push_back(pool[static_cast<std::size_t>(t)]);
  }
  return out;
}

bool is_qualified(const SamplingSet& s, const SpectrumSlice& basis, double tol) {
  const Eigen::MatrixXd& v = require_basis(basis);
  const int k = static_cast<int>(v.cols());
  if (s.m() < k) return false;
  const Eigen::MatrixXd rows = basis_rows(v, s.indices);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
  const auto& sv = svd.singularValues();
  if (sv.size() < k) return false;
  return sv(k - 1) > tol * sv(0);
}

double truncation_ratio(const SpectrumSlice& basis, const SamplingSet& s,
                        int trunc_L) {
  if (trunc_L < 0) throw InvalidArgument("truncation order must be >= 0");
  if (!is_qualified(s, basis))
    throw NotQualified("truncation ratio needs a qualified sampling set");
  const Eigen::MatrixXd psi = psi_matrix(basis, s.indices);
  const Eigen::VectorXd deltas = delta_spectrum(psi);
  double numer = 0.0;
  for (Eigen::Index i = 0; i < deltas.size(); ++i)
    numer += std::pow(deltas(i), trunc_L + 1) / (1.0 - deltas(i));
  const Eigen::Index k = psi.rows();
  const double denom =
      psi.llt().solve(Eigen::MatrixXd::Identity(k, k)).trace();
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(k, k) - psi;
  const double partial = neumann_power_sum(phi, trunc_L).trace();
  if (std::abs((denom - partial) - numer) > 1e-8)
    throw Error("truncation tail identity violated: direct " +
                format_double(denom - partial) + " vs closed form " +
                format_double(numer));
  return numer / denom;
}

namespace {

nlohmann::json set_to_json_obj(const SamplingSet& s) {
  nlohmann::json j;
  j["n"] = s.n;
  j["method"] = s.method;
  j["m"] = s.m();
  j["L"] = s.trunc_L;
  j["indices"] = s.indices;
  j["per_step_scores"] = s.per_step_scores;
  if (s.seed) j["seed"] = *s.seed;
  if (s.gamma_tilde) {
    const auto& g = *s.gamma_tilde;
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx",
                  static_cast<unsigned long long>(fnv1a64(
                      g.data(), static_cast<std::size_t>(g.size()) * sizeof(double))));
    j["gamma_digest"] = buf;
  }
  return j;
}

}  // namespace

std::string sampling_set_to_json(const SamplingSet& s) {
  return set_to_json_obj(s).dump(2) + "\n";
}

void save_sampling_set(const SamplingSet& s, const std::filesystem::path& path) {
  write_file_atomic(path, sampling_set_to_json(s));
}

SamplingSet load_sampling_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sampling set: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad sampling set JSON: " + std::string(e.what()));
  }
  SamplingSet s;
  try {
    s.n = j.at("n").get<int>();
    s.method = j.at("method").get<std::string>();
    s.trunc_L = j.at("L").get<int>();
    s.indices = j.at("indices").get<std::vector<int>>();
    if (j.contains("per_step_scores"))
      s.per_step_scores = j.at("per_step_scores").get<std::vector<double>>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.at("m").get<int>() != s.m())
      throw ParseError("sampling set: m does not match indices length");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad sampling set JSON: " + std::string(e.what()));
  }
  std::vector<char> seen(static_cast<std::size_t>(std::max(s.n, 1)), 0);
  for (int idx : s.indices) {
    if (idx < 0 || idx >= s.n)
      throw ParseError("sampling set: index out of range");
    if (seen[static_cast<std::size_t>(idx)]++)
      throw ParseError("sampling set: duplicate index");
  }
  return s;
}

}  // namespace graphsamp
