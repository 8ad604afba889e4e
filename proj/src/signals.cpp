#include "graphsamp/signals.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "graphsamp/errors.hpp"
#include "graphsamp/numfmt.hpp"
#include "graphsamp/reconstruct.hpp"
#include "graphsamp/rng.hpp"
#include "graphsamp/sampling.hpp"

namespace graphsamp {

BandlimitedSignal gen_bandlimited(const SpectrumSlice& basis, double mean,
                                  double stddev, std::uint64_t seed) {
  if (!basis.basis)
    throw MissingBasis("signal synthesis needs the eigenvector block");
  if (!(stddev >= 0.0)) throw InvalidArgument("stddev must be >= 0");
  Rng rng(seed);
  BandlimitedSignal out;
  out.k = basis.k;
  out.coeffs.resize(basis.k);
  for (int i = 0; i < basis.k; ++i) out.coeffs(i) = rng.normal(mean, stddev);
  out.x.noalias() = (*basis.basis) * out.coeffs;
  return out;
}

NoisySamples add_noise(const Eigen::VectorXd& x_s, double snr_db,
                       double signal_power, std::uint64_t seed) {
  NoisySamples out;
  if (std::isinf(snr_db) && snr_db > 0) {
    out.y = x_s;
    out.sigma2 = 0.0;
    return out;
  }
  if (!(signal_power > 0.0))
    throw InvalidArgument("signal power must be positive for finite SNR");
  out.sigma2 = signal_power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(out.sigma2);
  Rng rng(seed);
  out.y = x_s;
  for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y(i) += rng.normal(0.0, sigma);
  return out;
}

Graph build_graph(const GraphSpec& spec) {
  if (spec.model == "small-world")
    return gen_small_world(spec.n, spec.degree, spec.rewire_p, spec.seed);
  if (spec.model == "community")
    return gen_community(spec.n, spec.communities, spec.p_in, spec.p_out,
                         spec.seed);
  throw InvalidArgument("unknown graph model: " + spec.model);
}

namespace {

struct CellStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  int count = 0;
  std::int64_t nanos = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / count; }
  double stderr_mean() const {
    if (count < 2) return 0.0;
    const double var =
        std::max(0.0, (sum_sq - sum * sum / count) / (count - 1));
    return std::sqrt(var / count);
  }
};

SamplingSet select_prefix(const SamplingSet& full, int m) {
  SamplingSet s = full;
  s.indices.resize(static_cast<std::size_t>(m));
  if (s.per_step_scores.size() > static_cast<std::size_t>(m))
    s.per_step_scores.resize(static_cast<std::size_t>(m));
  s.gamma_tilde.reset();
  return s;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.k < 1) throw InvalidArgument("bandwidth must be >= 1");
  if (cfg.trials < 1) throw InvalidArgument("trials must be >= 1");
  if (cfg.m_grid.empty()) throw InvalidArgument("m_grid must be nonempty");
  for (int m : cfg.m_grid)
    if (m < cfg.k)
      throw InvalidArgument("every sample budget must be >= bandwidth");
  if (cfg.snr_db_grid.empty())
    throw InvalidArgument("snr_db_grid must be nonempty");
  if (cfg.methods.empty()) throw InvalidArgument("methods must be nonempty");
  for (const auto& meth : cfg.methods)
    if (meth != "mia" && meth != "mfn" && meth != "eoptimal" && meth != "random")
      throw InvalidArgument("unknown method: " + meth);
  if (cfg.recon.empty()) throw InvalidArgument("recon list must be nonempty");
  for (const auto& r : cfg.recon)
    if (r != "ls" && r != "mia") throw InvalidArgument("unknown recon: " + r);
  if (cfg.trunc_L < 0) throw InvalidArgument("truncation order must be >= 0");
  if (cfg.poly_p < 1) throw InvalidArgument("polynomial order must be >= 1");
  if (!(cfg.alpha > 0.0)) throw InvalidArgument("steepness must be positive");
  if (!(cfg.signal_std >= 0.0)) throw InvalidArgument("signal std must be >= 0");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Graph graph = build_graph(cfg.graph);
  const SparseSymMatrix lap = normalized_laplacian(graph);
  const SpectrumSlice slice = dense_spectrum(lap, cfg.k, cfg.dense_cap);
  const int n = graph.num_nodes();

  const bool need_tpoly =
      std::find(cfg.methods.begin(), cfg.methods.end(), "mia") != cfg.methods.end() ||
      std::find(cfg.recon.begin(), cfg.recon.end(), "mia") != cfg.recon.end();
  FilterMatrix t_poly;
  if (need_tpoly) {
    const ChebyshevFilter filt =
        chebyshev_fit(slice.lambdas(cfg.k - 1), cfg.poly_p, cfg.alpha, 2.0);
    t_poly = apply_filter_dense(filt, lap, cfg.dense_cap);
  }
  const bool want_mia_recon =
      std::find(cfg.recon.begin(), cfg.recon.end(), "mia") != cfg.recon.end();

  const int m_max = *std::max_element(cfg.m_grid.begin(), cfg.m_grid.end());
  if (m_max > n) throw BudgetExceedsN("largest budget exceeds node count");

  ExperimentResult result;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const std::string& method = cfg.methods[mi];
    SamplingSet full;
    if (method == "mia") {
      full = mia_sample(t_poly, m_max, cfg.trunc_L);
    } else if (method == "mfn") {
      full = mfn_sample(slice, m_max);
    } else if (method == "eoptimal") {
      full = eopt_sample(slice, m_max);
    } else {
      full = random_sample(n, m_max,
                           derive_seed(cfg.master_seed, {0x5e1ec7u, mi}));
    }
    for (std::size_t gi = 0; gi < cfg.m_grid.size(); ++gi) {
      const int m = cfg.m_grid[gi];
      SamplingSet sub = select_prefix(full, m);
      sub.trunc_L = cfg.trunc_L;
      const bool qualified = is_qualified(sub, slice);

      std::unique_ptr<LsOperator> ls_op;
      Eigen::MatrixXd t_cols;
      if (qualified) {
        ls_op = std::make_unique<LsOperator>(slice, sub);
        if (want_mia_recon) {
          sub.gamma_tilde = gamma_tilde_matrix(t_poly, sub.indices, cfg.trunc_L);
          t_cols.resize(n, m);
          for (int c = 0; c < m; ++c)
            t_cols.col(c) =
                t_poly.values.col(sub.indices[static_cast<std::size_t>(c)]);
        }
      }

      for (std::size_t si = 0; si < cfg.snr_db_grid.size(); ++si) {
        const double snr_db = cfg.snr_db_grid[si];
        const std::uint64_t seed_base = derive_seed(cfg.master_seed, {mi, gi, si});
        std::vector<CellStats> stats(cfg.recon.size());
        if (qualified) {
          for (int trial = 0; trial < cfg.trials; ++trial) {
            const std::uint64_t sig_seed =
                derive_seed(seed_base, {static_cast<std::uint64_t>(trial), 1});
            const std::uint64_t noise_seed =
                derive_seed(seed_base, {static_cast<std::uint64_t>(trial), 2});
            const BandlimitedSignal sig =
                gen_bandlimited(slice, cfg.signal_mean, cfg.signal_std, sig_seed);
            Eigen::VectorXd x_s(m);
            for (int c = 0; c < m; ++c)
              x_s(c) = sig.x(sub.indices[static_cast<std::size_t>(c)]);
            const double power = sig.x.squaredNorm() / n;
            const NoisySamples obs = add_noise(x_s, snr_db, power, noise_seed);
            for (std::size_t ri = 0; ri < cfg.recon.size(); ++ri) {
              const auto t0 = std::chrono::steady_clock::now();
              Eigen::VectorXd x_hat;
              if (cfg.recon[ri] == "ls") {
                x_hat = ls_op->reconstruct(obs.y);
              } else {
                const Eigen::VectorXd z = (*sub.gamma_tilde) * obs.y;
                x_hat.noalias() = t_cols * z;
              }
              const auto t1 = std::chrono::steady_clock::now();
              stats[ri].nanos +=
                  std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                      .count();
              stats[ri].add(mse(x_hat, sig.x));
            }
          }
        }
        for (std::size_t ri = 0; ri < cfg.recon.size(); ++ri) {
          ResultRow row;
          row.method = method;
          row.recon = cfg.recon[ri];
          row.m = m;
          row.snr_db = snr_db;
          row.seed_base = seed_base;
          if (qualified) {
            row.mean_mse = stats[ri].mean();
            row.stderr_mse = stats[ri].stderr_mean();
            row.trials = stats[ri].count;
            row.wall_ms = stats[ri].nanos / 1000000;
          } else {
            row.mean_mse = std::numeric_limits<double>::quiet_NaN();
            row.stderr_mse = std::numeric_limits<double>::quiet_NaN();
            row.trials = 0;
            row.wall_ms = 0;
          }
          result.rows.push_back(std::move(row));
        }
      }
    }
  }
  return result;
}

namespace {

double snr_from_json(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto parsed = parse_double(v.get<std::string>());
    if (!parsed) throw InvalidArgument("bad SNR value in config");
    return *parsed;
  }
  if (v.is_number()) return v.get<double>();
  throw InvalidArgument("bad SNR value in config");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("bad config JSON: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  try {
    const auto& g = j.at("graph");
    cfg.graph.model = g.at("model").get<std::string>();
    cfg.graph.n = g.at("n").get<int>();
    cfg.graph.seed = g.at("seed").get<std::uint64_t>();
    cfg.graph.degree = g.value("degree", cfg.graph.degree);
    cfg.graph.rewire_p = g.value("rewire_p", cfg.graph.rewire_p);
    cfg.graph.communities = g.value("communities", cfg.graph.communities);
    cfg.graph.p_in = g.value("p_in", cfg.graph.p_in);
    cfg.graph.p_out = g.value("p_out", cfg.graph.p_out);
    cfg.k = j.at("k").get<int>();
    cfg.m_grid = j.at("m_grid").get<std::vector<int>>();
    cfg.snr_db_grid.clear();
    for (const auto& v : j.at("snr_db_grid")) cfg.snr_db_grid.push_back(snr_from_json(v));
    cfg.methods = j.at("methods").get<std::vector<std::string>>();
    cfg.recon = j.value("recon", std::vector<std::string>{"ls"});
    cfg.trials = j.value("trials", cfg.trials);
    cfg.trunc_L = j.value("trunc_L", cfg.trunc_L);
    cfg.poly_p = j.value("poly_p", cfg.poly_p);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.signal_mean = j.value("signal_mean", cfg.signal_mean);
    cfg.signal_std = j.value("signal_std", cfg.signal_std);
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    cfg.dense_cap = j.value("dense_cap", cfg.dense_cap);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("bad config: " + std::string(e.what()));
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string result_csv(const ExperimentResult& result) {
  std::string out =
      "method,recon,m,snr_db,mean_mse,stderr,trials,seed_base,wall_ms\n";
  for (const auto& r : result.rows) {
    out += r.method;
    out += ',';
    out += r.recon;
    out += ',';
    out += std::to_string(r.m);
    out += ',';
    out += format_double(r.snr_db);
    out += ',';
    out += format_double(r.mean_mse);
    out += ',';
    out += format_double(r.stderr_mse);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.seed_base);
    out += ',';
    out += std::to_string(r.wall_ms);
    out += '\n';
  }
  return out;
}

}  // namespace graphsamp
