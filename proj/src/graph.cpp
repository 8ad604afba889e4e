#include "graphsamp/graph.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graphsamp/errors.hpp"
#include "graphsamp/numfmt.hpp"
#include "graphsamp/rng.hpp"

namespace graphsamp {

Graph::Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 0) throw InvalidArgument("node count must be nonnegative");
  for (auto& e : edges_) {
    if (e.i < 0 || e.i >= n_ || e.j < 0 || e.j >= n_)
      throw InvalidArgument("edge endpoint out of range: (" +
                            std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    if (e.i == e.j)
      throw SelfLoop("self-loop at node " + std::to_string(e.i));
    if (!(e.w > 0.0))
      throw InvalidArgument("edge weight must be positive: (" +
                            std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j)
      throw DuplicateEdge("duplicate edge (" + std::to_string(edges_[k].i) +
                          ", " + std::to_string(edges_[k].j) + ")");
  }
}

std::vector<double> Graph::degrees() const {
  std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
  for (const auto& e : edges_) {
    d[static_cast<std::size_t>(e.i)] += e.w;
    d[static_cast<std::size_t>(e.j)] += e.w;
  }
  return d;
}

bool Graph::is_connected() const {
  if (n_ <= 1) return true;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_));
  for (const auto& e : edges_) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n_;
}

SparseSymMatrix::SparseSymMatrix(int n,
                                 const std::vector<Eigen::Triplet<double>>& upper)
    : n_(n), upper_(upper), full_(n, n) {
  std::vector<Eigen::Triplet<double>> both;
  both.reserve(2 * upper_.size());
  for (const auto& t : upper_) {
    if (t.row() > t.col())
      throw InvalidArgument("upper-triangle entry with row > col");
    both.push_back(t);
    if (t.row() != t.col()) both.emplace_back(t.col(), t.row(), t.value());
  }
  full_.setFromTriplets(both.begin(), both.end());
  full_.makeCompressed();
}

SparseSymMatrix normalized_laplacian(const Graph& g) {
  const int n = g.num_nodes();
  if (n == 0) throw EmptyGraph("cannot build a Laplacian for an empty graph");
  const auto deg = g.degrees();
  for (int i = 0; i < n; ++i) {
    if (deg[static_cast<std::size_t>(i)] <= 0.0)
      throw IsolatedNode("node " + std::to_string(i) + " has zero degree");
  }
  std::vector<Eigen::Triplet<double>> upper;
  upper.reserve(static_cast<std::size_t>(n) + g.edges().size());
  for (int i = 0; i < n; ++i) upper.emplace_back(i, i, 1.0);
  for (const auto& e : g.edges()) {
    const double s = std::sqrt(deg[static_cast<std::size_t>(e.i)] *
                               deg[static_cast<std::size_t>(e.j)]);
    upper.emplace_back(e.i, e.j, -e.w / s);
  }
  return SparseSymMatrix(n, upper);
}

namespace {

struct AdjSet {
  explicit AdjSet(int n) : nbrs(static_cast<std::size_t>(n)) {}
  bool has(int i, int j) const {
    const auto& row = nbrs[static_cast<std::size_t>(i)];
    return std::find(row.begin(), row.end(), j) != row.end();
  }
  void add(int i, int j) {
    nbrs[static_cast<std::size_t>(i)].push_back(j);
    nbrs[static_cast<std::size_t>(j)].push_back(i);
  }
  void remove(int i, int j) {
    auto& a = nbrs[static_cast<std::size_t>(i)];
    a.erase(std::find(a.begin(), a.end(), j));
    auto& b = nbrs[static_cast<std::size_t>(j)];
    b.erase(std::find(b.begin(), b.end(), i));
  }
  std::vector<Edge> to_edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < static_cast<int>(nbrs.size()); ++i)
      for (int j : nbrs[static_cast<std::size_t>(i)])
        if (i < j) out.push_back({i, j, 1.0});
    return out;
  }
  std::vector<std::vector<int>> nbrs;
};

Graph small_world_once(int n, int degree, double rewire_p, std::uint64_t seed) {
  AdjSet adj(n);
  const int half = degree / 2;
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= half; ++j) adj.add(i, (i + j) % n);
  Rng rng(seed);
  for (int j = 1; j <= half; ++j) {
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      const int t = (i + j) % n;
      if (u >= rewire_p || !adj.has(i, t)) continue;
      for (int tries = 0; tries < 4 * n; ++tries) {
        const int w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (w == i || adj.has(i, w)) continue;
        adj.remove(i, t);
        adj.add(i, w);
        break;
      }
    }
  }
  return Graph(n, adj.to_edges());
}

}  // namespace

Graph gen_small_world(int n, int degree, double rewire_p, std::uint64_t seed) {
  if (n <= 0) throw InvalidArgument("node count must be positive");
  if (degree <= 0 || degree % 2 != 0 || degree >= n)
    throw InvalidArgument("degree must be even, positive and below n");
  if (!(rewire_p >= 0.0 && rewire_p <= 1.0))
    throw InvalidArgument("rewiring probability must lie in [0, 1]");
  for (int attempt = 0; attempt < 100; ++attempt) {
    Graph g = small_world_once(n, degree, rewire_p, seed + static_cast<std::uint64_t>(attempt));
    if (g.is_connected()) return g;
  }
  throw GenerationFailed("small-world generator: no connected graph in 100 attempts");
}

namespace {

Graph community_once(int n, int communities, double p_in, double p_out,
                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  auto block = [&](int i) {
    return static_cast<int>((static_cast<long long>(i) * communities) / n);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = block(i) == block(j) ? p_in : p_out;
      if (rng.uniform01() < p) edges.push_back({i, j, 1.0});
    }
  }
  return Graph(n, std::move(edges));
}

}  // namespace

Graph gen_community(int n, int communities, double p_in, double p_out,
                    std::uint64_t seed) {
  if (n <= 0) throw InvalidArgument("node count must be positive");
  if (communities < 2 || communities > n)
    throw InvalidArgument("community count must lie in [2, n]");
  if (!(p_in > 0.0 && p_in <= 1.0) || !(p_out > 0.0 && p_out <= 1.0) ||
      p_out > p_in)
    throw InvalidArgument("need 0 < p_out <= p_in <= 1");
  for (int attempt = 0; attempt < 100; ++attempt) {
    Graph g = community_once(n, communities, p_in, p_out,
                             seed + static_cast<std::uint64_t>(attempt));
    if (g.is_connected()) return g;
  }
  throw GenerationFailed("community generator: no connected graph in 100 attempts");
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

}  // namespace

LoadedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file: " + path.string());
  std::string line;
  long line_no = 0;
  long n = -1, m = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (n < 0) {
      if (toks.size() != 2) throw ParseError("expected header 'n m'", line_no);
      const auto pn = parse_int(toks[0]);
      const auto pm = parse_int(toks[1]);
      if (!pn || !pm || *pn < 0 || *pm < 0)
        throw ParseError("expected header 'n m'", line_no);
      n = *pn;
      m = *pm;
      continue;
    }
    if (static_cast<long>(edges.size()) == m)
      throw ParseError("unexpected content after " + std::to_string(m) +
                           " edges",
                       line_no);
    if (toks.size() != 3) throw ParseError("expected edge 'i j w'", line_no);
    const auto pi = parse_int(toks[0]);
    const auto pj = parse_int(toks[1]);
    const auto pw = parse_double(toks[2]);
    if (!pi || !pj || !pw) throw ParseError("expected edge 'i j w'", line_no);
    if (*pi < 0 || *pi >= n || *pj < 0 || *pj >= n)
      throw ParseError("edge endpoint out of range", line_no);
    if (*pi == *pj) throw SelfLoop("self-loop at line " + std::to_string(line_no));
    if (!(*pw > 0.0) || std::isnan(*pw) || std::isinf(*pw))
      throw ParseError("edge weight must be finite and positive", line_no);
    edges.push_back({static_cast<int>(*pi), static_cast<int>(*pj), *pw});
  }
  if (n < 0) throw ParseError("missing header 'n m'", line_no + 1);
  if (static_cast<long>(edges.size()) != m)
    throw ParseError("expected " + std::to_string(m) + " edges, found " +
                         std::to_string(edges.size()),
                     line_no + 1);
  LoadedGraph out{Graph(static_cast<int>(n), std::move(edges)), true};
  out.connected = out.graph.is_connected();
  return out;
}

std::string graph_to_text(const Graph& g) {
  std::string out = std::to_string(g.num_nodes()) + " " +
                    std::to_string(g.num_edges()) + "\n";
  for (const auto& e : g.edges()) {
    out += std::to_string(e.i);
    out += ' ';
    out += std::to_string(e.j);
    out += ' ';
    out += format_double(e.w);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  static std::atomic<unsigned> counter{0};
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  const auto tmp = dir / (path.filename().string() + ".tmp" +
                          std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  write_file_atomic(path, graph_to_text(g));
}

}  // namespace graphsamp
