#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphsamp/errors.hpp"
#include "graphsamp/graph.hpp"
#include "graphsamp/manifest.hpp"
#include "graphsamp/numfmt.hpp"
#include "graphsamp/reconstruct.hpp"
#include "graphsamp/sampling.hpp"
#include "graphsamp/signals.hpp"
#include "graphsamp/spectral.hpp"

namespace gs = graphsamp;

namespace graphsamp_cli {

namespace {

Eigen::VectorXd load_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw gs::Error("cannot open vector file: " + path.string());
  std::vector<double> vals;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> toks;
    while (ss >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() != 1)
      throw gs::ParseError("expected one value per line", line_no);
    const auto v = gs::parse_double(toks[0]);
    if (!v) throw gs::ParseError("bad number '" + toks[0] + "'", line_no);
    vals.push_back(*v);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = vals[i];
  return out;
}

std::string vector_to_text(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += gs::format_double(v(i));
    out += '\n';
  }
  return out;
}

gs::RunManifest make_manifest(const std::string& command,
                              const std::vector<std::string>& argv) {
  gs::RunManifest m;
  m.command = command;
  m.argv = argv;
  m.versions = gs::tool_versions();
  m.started = gs::iso8601_utc_now();
  return m;
}

void finish_manifest(gs::RunManifest& m, const std::filesystem::path& primary) {
  m.finished = gs::iso8601_utc_now();
  gs::save_manifest(m, gs::manifest_path_for(primary));
}

std::string sanitize_tag(std::string s) {
  std::replace(s.begin(), s.end(), '.', 'p');
  std::replace(s.begin(), s.end(), '-', 'm');
  return s;
}

struct GenArgs {
  std::string model;
  int n = 0;
  int degree = 8;
  double rewire_p = 0.1;
  int communities = 10;
  double p_in = 0.2;
  double p_out = 0.002;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_graph(const GenArgs& a, const std::vector<std::string>& argv) {
  gs::GraphSpec spec;
  spec.model = a.model;
  spec.n = a.n;
  spec.degree = a.degree;
  spec.rewire_p = a.rewire_p;
  spec.communities = a.communities;
  spec.p_in = a.p_in;
  spec.p_out = a.p_out;
  spec.seed = a.seed;

  auto manifest = make_manifest("gen-graph", argv);
  const gs::Graph g = gs::build_graph(spec);
  gs::save_graph(g, a.out);

  manifest.resolved = {{"model", a.model},
                       {"n", a.n},
                       {"degree", a.degree},
                       {"rewire_p", a.rewire_p},
                       {"communities", a.communities},
                       {"p_in", a.p_in},
                       {"p_out", a.p_out},
                       {"seed", a.seed},
                       {"out", a.out},
                       {"edges", g.num_edges()}};
  manifest.master_seed = a.seed;
  manifest.outputs = {a.out};
  finish_manifest(manifest, a.out);
  std::cout << "graph: n=" << g.num_nodes() << " edges=" << g.num_edges()
            << " -> " << a.out << "\n";
  return 0;
}

struct SampleArgs {
  std::string graph;
  int k = 0;
  int m = 0;
  std::string method = "mia";
  int trunc = 10;
  int poly_order = 25;
  double alpha = 30.0;
  bool dense = false;
  int dense_cap = gs::kDefaultDenseCap;
  std::uint64_t seed = 1;
  bool seed_given = false;
  double rank_tol = 1e-10;
  bool require_qualified = false;
  std::string out;
};

int cmd_sample(const SampleArgs& a, const std::vector<std::string>& argv) {
  if (a.method == "random" && !a.seed_given)
    throw gs::InvalidArgument("--method random requires an explicit --seed");

  auto manifest = make_manifest("sample", argv);
  const gs::LoadedGraph lg = gs::load_graph(a.graph);
  if (!lg.connected)
    std::cerr << "warning: graph is not connected; spectral assumptions may fail\n";
  const gs::SparseSymMatrix lap = gs::normalized_laplacian(lg.graph);
  const int n = lap.dim();

  std::optional<gs::SpectrumSlice> slice;
  auto ensure_slice = [&]() -> const gs::SpectrumSlice& {
    if (!slice) slice = gs::dense_spectrum(lap, a.k, a.dense_cap);
    return *slice;
  };

  double lambda_k_used = std::numeric_limits<double>::quiet_NaN();
  gs::SamplingSet set;
  if (a.method == "mia") {
    lambda_k_used = a.dense ? ensure_slice().lambdas(a.k - 1)
                            : gs::lanczos_lambda_k_auto(lap, a.k, a.seed);
    const gs::ChebyshevFilter filt =
        gs::chebyshev_fit(lambda_k_used, a.poly_order, a.alpha, 2.0);
    const gs::FilterMatrix t_poly = gs::apply_filter_dense(filt, lap, a.dense_cap);
    set = gs::mia_sample(t_poly, a.m, a.trunc);
  } else if (a.method == "mfn") {
    set = gs::mfn_sample(ensure_slice(), a.m, a.rank_tol);
  } else if (a.method == "eoptimal") {
    set = gs::eopt_sample(ensure_slice(), a.m);
  } else if (a.method == "random") {
    set = gs::random_sample(n, a.m, a.seed);
  } else {
    throw gs::InvalidArgument("unknown method: " + a.method);
  }
  set.trunc_L = a.trunc;

  if (a.require_qualified && !gs::is_qualified(set, ensure_slice(), a.rank_tol)) {
    std::cerr << "error: selected set is not qualified (rank below bandwidth)\n";
    return 4;
  }

  gs::save_sampling_set(set, a.out);
  manifest.resolved = {{"graph", a.graph},
                       {"k", a.k},
                       {"m", a.m},
                       {"method", a.method},
                       {"trunc", a.trunc},
                       {"poly_order", a.poly_order},
                       {"alpha", a.alpha},
                       {"dense", a.dense},
                       {"dense_cap", a.dense_cap},
                       {"seed", a.seed},
                       {"rank_tol", a.rank_tol},
                       {"require_qualified", a.require_qualified},
                       {"out", a.out},
                       {"n", n}};
  if (!std::isnan(lambda_k_used)) manifest.resolved["lambda_k"] = lambda_k_used;
  manifest.master_seed = a.seed;
  manifest.outputs = {a.out};
  finish_manifest(manifest, a.out);
  std::cout << "sampled m=" << set.m() << " nodes (" << a.method << ") -> "
            << a.out << "\n";
  return 0;
}

struct ReconArgs {
  std::string graph;
  std::string set;
  std::string obs;
  int k = 0;
  std::string recon = "ls";
  bool exact_t = false;
  int poly_order = 25;
  double alpha = 30.0;
  bool dense = false;
  int dense_cap = gs::kDefaultDenseCap;
  std::uint64_t seed = 1;
  double rank_tol = 1e-10;
  std::string truth;
  std::string out;
};

int cmd_reconstruct(const ReconArgs& a, const std::vector<std::string>& argv) {
  auto manifest = make_manifest("reconstruct", argv);
  const gs::LoadedGraph lg = gs::load_graph(a.graph);
  if (!lg.connected)
    std::cerr << "warning: graph is not connected; spectral assumptions may fail\n";
  const gs::SparseSymMatrix lap = gs::normalized_laplacian(lg.graph);
  gs::SamplingSet set = gs::load_sampling_set(a.set);
  const Eigen::VectorXd y = load_vector(a.obs);
  if (y.size() != set.m())
    throw gs::ShapeMismatch("observations have " + std::to_string(y.size()) +
                            " values for " + std::to_string(set.m()) +
                            " samples");

  std::optional<gs::SpectrumSlice> slice;
  auto ensure_slice = [&]() -> const gs::SpectrumSlice& {
    if (!slice) slice = gs::dense_spectrum(lap, a.k, a.dense_cap);
    return *slice;
  };

  double lambda_k_used = std::numeric_limits<double>::quiet_NaN();
  gs::Reconstruction rec;
  if (a.recon == "ls") {
    rec = gs::ls_reconstruct(ensure_slice(), set, y, a.rank_tol);
  } else if (a.recon == "mia") {
    gs::FilterMatrix t_poly;
    if (a.exact_t) {
      t_poly = gs::ideal_lowpass_exact(ensure_slice());
    } else {
      lambda_k_used = a.dense ? ensure_slice().lambdas(a.k - 1)
                              : gs::lanczos_lambda_k_auto(lap, a.k, a.seed);
      const gs::ChebyshevFilter filt =
          gs::chebyshev_fit(lambda_k_used, a.poly_order, a.alpha, 2.0);
      t_poly = gs::apply_filter_dense(filt, lap, a.dense_cap);
    }
    set.gamma_tilde = gs::gamma_tilde_matrix(t_poly, set.indices, set.trunc_L);
    rec = gs::mia_reconstruct(t_poly, set, y);
  } else {
    throw gs::InvalidArgument("unknown recon: " + a.recon);
  }

  gs::write_file_atomic(a.out, vector_to_text(rec.x_hat));
  manifest.resolved = {{"graph", a.graph},    {"set", a.set},
                       {"obs", a.obs},        {"k", a.k},
                       {"recon", a.recon},    {"exact_t", a.exact_t},
                       {"poly_order", a.poly_order}, {"alpha", a.alpha},
                       {"dense", a.dense},    {"dense_cap", a.dense_cap},
                       {"seed", a.seed},      {"rank_tol", a.rank_tol},
                       {"out", a.out},        {"L", set.trunc_L}};
  if (!std::isnan(lambda_k_used)) manifest.resolved["lambda_k"] = lambda_k_used;
  manifest.outputs = {a.out};
  if (!a.truth.empty()) {
    const Eigen::VectorXd x = load_vector(a.truth);
    const double err = gs::mse(rec.x_hat, x);
    manifest.resolved["truth"] = a.truth;
    manifest.resolved["mse"] = err;
    std::cout << "mse=" << gs::format_double(err) << "\n";
  }
  finish_manifest(manifest, a.out);
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string out;
  bool plot_data = false;
};

int cmd_bench(const BenchArgs& a, const std::vector<std::string>& argv) {
  auto manifest = make_manifest("bench", argv);
  const gs::ExperimentConfig cfg = gs::load_experiment_config(a.config);
  const gs::ExperimentResult result = gs::run_experiment(cfg);
  gs::write_file_atomic(a.out, gs::result_csv(result));
  manifest.outputs = {a.out};

  if (a.plot_data) {
    // One tidy file per (recon, snr): column per method, row per budget m.
    std::vector<std::string> methods;
    for (const auto& r : result.rows)
      if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
        methods.push_back(r.method);
    std::vector<int> budgets;
    for (const auto& r : result.rows)
      if (std::find(budgets.begin(), budgets.end(), r.m) == budgets.end())
        budgets.push_back(r.m);
    std::sort(budgets.begin(), budgets.end());
    const std::filesystem::path out_path(a.out);
    const auto dir = out_path.parent_path();
    const auto stem = out_path.stem().string();
    for (const auto& recon : cfg.recon) {
      for (const double snr : cfg.snr_db_grid) {
        std::string csv = "m";
        for (const auto& meth : methods) csv += "," + meth;
        csv += '\n';
        for (int m : budgets) {
          csv += std::to_string(m);
          for (const auto& meth : methods) {
            const auto it = std::find_if(
                result.rows.begin(), result.rows.end(), [&](const auto& r) {
                  return r.method == meth && r.recon == recon && r.m == m &&
                         ((std::isinf(r.snr_db) && std::isinf(snr)) ||
                          r.snr_db == snr);
                });
            csv += ',';
            csv += it == result.rows.end() ? "nan" : gs::format_double(it->mean_mse);
          }
          csv += '\n';
        }
        const auto plot_path =
            (dir.empty() ? std::filesystem::path(".") : dir) /
            (stem + "_plot_" + recon + "_snr" + sanitize_tag(gs::format_double(snr)) +
             ".csv");
        gs::write_file_atomic(plot_path, csv);
        manifest.outputs.push_back(plot_path.string());
      }
    }
  }

  std::ifstream cfg_in(a.config);
  std::ostringstream cfg_text;
  cfg_text << cfg_in.rdbuf();
  manifest.resolved = {{"config", a.config},
                       {"out", a.out},
                       {"plot_data", a.plot_data},
                       {"config_content", nlohmann::json::parse(cfg_text.str())}};
  manifest.master_seed = cfg.master_seed;
  finish_manifest(manifest, a.out);
  std::cout << "bench: " << result.rows.size() << " rows -> " << a.out << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"graph-signal sampling and reconstruction toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("graphsamp ") +
                                        gs::tool_versions()["graphsamp"]
                                            .get<std::string>());

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-graph", "Generate a synthetic graph");
  gen_cmd->add_option("--model", gen.model, "small-world or community")
      ->required()
      ->check(CLI::IsMember({"small-world", "community"}));
  gen_cmd->add_option("--n", gen.n, "node count")->required();
  gen_cmd->add_option("--degree", gen.degree, "ring-lattice degree (even)");
  gen_cmd->add_option("--p", gen.rewire_p, "rewiring probability");
  gen_cmd->add_option("--communities", gen.communities, "community count");
  gen_cmd->add_option("--p-in", gen.p_in, "within-community edge probability");
  gen_cmd->add_option("--p-out", gen.p_out, "cross-community edge probability");
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->required();
  gen_cmd->add_option("--out", gen.out, "output edge-list path")->required();

  SampleArgs sam;
  auto* sam_cmd = app.add_subcommand("sample", "Select a sampling set");
  sam_cmd->add_option("--graph", sam.graph, "edge-list path")->required();
  sam_cmd->add_option("--k", sam.k, "signal bandwidth")->required();
  sam_cmd->add_option("--m", sam.m, "sample budget")->required();
  sam_cmd->add_option("--method", sam.method, "mia|mfn|eoptimal|random")
      ->check(CLI::IsMember({"mia", "mfn", "eoptimal", "random"}));
  sam_cmd->add_option("--trunc", sam.trunc, "Neumann truncation order L");
  sam_cmd->add_option("--poly-order", sam.poly_order, "Chebyshev degree");
  sam_cmd->add_option("--alpha", sam.alpha, "step smoothing steepness");
  sam_cmd->add_flag("--dense", sam.dense, "use the dense eigensolver for lambda_k");
  sam_cmd->add_option("--dense-cap", sam.dense_cap, "dense-path size cap");
  auto* sam_seed =
      sam_cmd->add_option("--seed", sam.seed,
                          "seed (lanczos start; selection for --method random)");
  sam_cmd->add_option("--rank-tol", sam.rank_tol, "relative rank threshold");
  sam_cmd->add_flag("--require-qualified", sam.require_qualified,
                    "fail (exit 4) if the set cannot recover bandwidth-k signals");
  sam_cmd->add_option("--out", sam.out, "output JSON path")->required();

  ReconArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Recover a signal from samples");
  rec_cmd->add_option("--graph", rec.graph, "edge-list path")->required();
  rec_cmd->add_option("--set", rec.set, "sampling-set JSON path")->required();
  rec_cmd->add_option("--obs", rec.obs, "observations file (one value per line)")
      ->required();
  rec_cmd->add_option("--k", rec.k, "signal bandwidth")->required();
  rec_cmd->add_option("--recon", rec.recon, "ls|mia")
      ->check(CLI::IsMember({"ls", "mia"}));
  rec_cmd->add_flag("--exact-t", rec.exact_t,
                    "use the exact spectral projector instead of the polynomial");
  rec_cmd->add_option("--poly-order", rec.poly_order, "Chebyshev degree");
  rec_cmd->add_option("--alpha", rec.alpha, "step smoothing steepness");
  rec_cmd->add_flag("--dense", rec.dense, "use the dense eigensolver for lambda_k");
  rec_cmd->add_option("--dense-cap", rec.dense_cap, "dense-path size cap");
  rec_cmd->add_option("--seed", rec.seed, "lanczos start seed");
  rec_cmd->add_option("--rank-tol", rec.rank_tol, "relative rank threshold");
  rec_cmd->add_option("--truth", rec.truth, "ground-truth vector for MSE report");
  rec_cmd->add_option("--out", rec.out, "output vector path")->required();

  BenchArgs ben;
  auto* ben_cmd = app.add_subcommand("bench", "Run a Monte-Carlo benchmark sweep");
  ben_cmd->add_option("--config", ben.config, "experiment config JSON")->required();
  ben_cmd->add_option("--out", ben.out, "output CSV path")->required();
  ben_cmd->add_flag("--plot-data", ben.plot_data, "also write per-figure tidy CSVs");

  std::string replay_manifest;
  auto* rep_cmd = app.add_subcommand("replay", "Re-run a recorded command");
  rep_cmd->add_option("--manifest", replay_manifest, "manifest JSON path")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_graph(gen, args);
    if (sam_cmd->parsed()) {
      SampleArgs a = sam;
      a.seed_given = sam_seed->count() > 0;
      return cmd_sample(a, args);
    }
    if (rec_cmd->parsed()) return cmd_reconstruct(rec, args);
    if (ben_cmd->parsed()) return cmd_bench(ben, args);
    if (rep_cmd->parsed()) {
      const gs::RunManifest m = gs::load_manifest(replay_manifest);
      if (m.command == "replay")
        throw gs::InvalidArgument("refusing to replay a replay manifest");
      return run(m.argv);
    }
  } catch (const gs::GenerationFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const gs::NotQualified& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const gs::ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const gs::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gs::InvalidCutoff& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gs::BudgetExceedsN& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace graphsamp_cli
