#include "corrmatch/density.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>

#include "corrmatch/error.hpp"
#include "corrmatch/maxflow.hpp"
#include "corrmatch/parallel.hpp"

namespace corrmatch {

namespace {

// Compact copy of the subgraph induced on a vertex list.
struct LocalGraph {
  std::vector<Vertex> global;             // local index -> vertex id
  std::vector<std::pair<int, int>> edges;  // local endpoints
  std::vector<std::size_t> degree;

  std::size_t size() const { return global.size(); }
};

LocalGraph induce(const Graph& g, std::span<const Vertex> vertices) {
  LocalGraph out;
  out.global.assign(vertices.begin(), vertices.end());
  std::vector<int> local(g.vertex_count(), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i) local[vertices[i]] = static_cast<int>(i);
  out.degree.assign(vertices.size(), 0);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (Vertex w : g.neighbors(vertices[i])) {
      const int j = local[w];
      if (j > static_cast<int>(i)) {
        out.edges.emplace_back(static_cast<int>(i), j);
        ++out.degree[i];
        ++out.degree[j];
      }
    }
  }
  return out;
}

// Greedy peeling: repeatedly drop a minimum-degree vertex and keep the densest
// suffix seen. The result is at least half the optimum.
Density peel(const LocalGraph& lg) {
  const std::size_t n = lg.size();
  std::vector<std::vector<int>> adj(n);
  for (const auto& [u, v] : lg.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<std::size_t> deg = lg.degree;
  const std::size_t max_deg = n == 0 ? 0 : *std::max_element(deg.begin(), deg.end());
  std::vector<std::vector<int>> buckets(max_deg + 1);
  for (std::size_t v = 0; v < n; ++v) buckets[deg[v]].push_back(static_cast<int>(v));
  std::vector<char> removed(n, 0);
  std::size_t edges = lg.edges.size();
  std::size_t alive = n;
  Density best{edges, std::max<std::size_t>(alive, 1)};
  std::size_t cur = 0;
  while (alive > 0) {
    cur = std::min(cur, max_deg);
    while (true) {
      while (!buckets[cur].empty()) {
        const int v = buckets[cur].back();
        if (removed[v] || deg[v] != cur) {
          buckets[cur].pop_back();
          continue;
        }
        break;
      }
      if (!buckets[cur].empty()) break;
      ++cur;
    }
    const int v = buckets[cur].back();
    buckets[cur].pop_back();
    removed[v] = 1;
    edges -= deg[v];
    --alive;
    for (int w : adj[v]) {
      if (removed[w]) continue;
      --deg[w];
      buckets[deg[w]].push_back(w);
    }
    if (cur > 0) --cur;
    if (alive > 0) {
      best = std::max(best, Density{edges, alive});
    }
  }
  return best;
}

// Goldberg's network for the guess a/b: a nonempty U with b|E(U)| > a|U|
// exists iff the minimum cut is below b m n. Returns such a U (the minimal
// source side), or nothing.
std::optional<std::vector<int>> denser_than(const LocalGraph& lg, std::int64_t a, std::int64_t b) {
  const int n = static_cast<int>(lg.size());
  const auto m = static_cast<std::int64_t>(lg.edges.size());
  const int source = n;
  const int sink = n + 1;
  FlowNetwork net(n + 2);
  for (int v = 0; v < n; ++v) {
    net.add_arc(source, v, m * b);
    net.add_arc(v, sink, m * b + 2 * a - static_cast<std::int64_t>(lg.degree[v]) * b);
  }
  for (const auto& [u, v] : lg.edges) net.add_arc(u, v, b, b);
  const std::int64_t cut = net.max_flow(source, sink);
  if (cut >= b * m * n) return std::nullopt;
  const std::vector<char> side = net.source_side();
  std::vector<int> u;
  for (int v = 0; v < n; ++v)
    if (side[v]) u.push_back(v);
  return u;
}

std::vector<int> maximal_densest(const LocalGraph& lg, const Density& d) {
  const int n = static_cast<int>(lg.size());
  const auto m = static_cast<std::int64_t>(lg.edges.size());
  const auto a = static_cast<std::int64_t>(d.edges);
  const auto b = static_cast<std::int64_t>(d.vertices);
  FlowNetwork net(n + 2);
  for (int v = 0; v < n; ++v) {
    net.add_arc(n, v, m * b);
    net.add_arc(v, n + 1, m * b + 2 * a - static_cast<std::int64_t>(lg.degree[v]) * b);
  }
  for (const auto& [u, v] : lg.edges) net.add_arc(u, v, b, b);
  net.max_flow(n, n + 1);
  const std::vector<char> side = net.maximal_source_side();
  std::vector<int> u;
  for (int v = 0; v < n; ++v)
    if (side[v]) u.push_back(v);
  return u;
}

Density density_of(const LocalGraph& lg, const std::vector<int>& subset) {
  std::vector<char> in(lg.size(), 0);
  for (int v : subset) in[v] = 1;
  std::uint64_t e = 0;
  for (const auto& [u, v] : lg.edges) e += in[u] && in[v];
  return {e, subset.size()};
}

}  // namespace

VertexSet k_core(const Graph& g, std::span<const Vertex> domain, std::size_t k) {
  std::vector<char> alive(g.vertex_count(), 0);
  for (Vertex v : domain) alive[v] = 1;
  std::vector<std::size_t> deg(g.vertex_count(), 0);
  std::vector<Vertex> queue;
  for (Vertex v : domain) {
    for (Vertex w : g.neighbors(v)) deg[v] += alive[w];
  }
  for (Vertex v : domain) {
    if (deg[v] < k) {
      alive[v] = 0;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    const Vertex v = queue.back();
    queue.pop_back();
    for (Vertex w : g.neighbors(v)) {
      if (alive[w] && --deg[w] < k) {
        alive[w] = 0;
        queue.push_back(w);
      }
    }
  }
  VertexSet out;
  for (Vertex v : domain)
    if (alive[v]) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

DensityResult densest_subgraph_exact(const Graph& g) {
  require(g.vertex_count() >= 1, ErrorCode::kInvalidArgument, "densest subgraph: empty vertex set");
  const VertexSet all = all_vertices(g.vertex_count());
  return densest_subgraph_exact(g, all);
}

DensityResult densest_subgraph_exact(const Graph& g, std::span<const Vertex> domain) {
  require(!domain.empty(), ErrorCode::kInvalidArgument, "densest subgraph: empty domain");
  VertexSet dom(domain.begin(), domain.end());
  std::sort(dom.begin(), dom.end());
  dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
  for (Vertex v : dom) {
    require(v < g.vertex_count(), ErrorCode::kInvalidArgument, "densest subgraph: vertex out of range");
  }

  const LocalGraph whole = induce(g, dom);
  if (whole.edges.empty()) return {{dom.front()}, {0, 1}, 0};

  // Every vertex of a densest set has at least the optimum density as its
  // degree inside the set, so the search can start from the core.
  const Density peeled = peel(whole);
  const std::size_t core_k = (peeled.edges + peeled.vertices - 1) / peeled.vertices;
  const VertexSet core = k_core(g, dom, core_k);
  const LocalGraph lg = induce(g, core);
  Density best = peeled;

  const auto n = static_cast<std::int64_t>(lg.size());
  const std::int64_t grid = std::max<std::int64_t>(n * (n - 1), 1);
  auto floor_index = [&](const Density& d) {
    return static_cast<std::int64_t>(static_cast<unsigned __int128>(d.edges) * grid / d.vertices);
  };
  std::int64_t lo = floor_index(best);
  // The peeling bound caps the optimum at twice the peeled density.
  std::int64_t hi = floor_index(Density{2 * best.edges, best.vertices}) + 1;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (auto u = denser_than(lg, mid, grid)) {
      best = std::max(best, density_of(lg, *u));
      lo = std::max(mid, floor_index(best));
    } else {
      hi = mid;
    }
  }
  // Exact finish: move to any strictly denser set until none exists.
  while (auto u = denser_than(lg, static_cast<std::int64_t>(best.edges),
                              static_cast<std::int64_t>(best.vertices))) {
    best = density_of(lg, *u);
  }

  const std::vector<int> local = maximal_densest(lg, best);
  const Density attained = density_of(lg, local);
  require(!local.empty() && attained == best, ErrorCode::kInternalConsistency,
          "densest subgraph: maximal set does not attain the optimum");
  DensityResult out;
  for (int v : local) out.best_subset.push_back(lg.global[v]);
  std::sort(out.best_subset.begin(), out.best_subset.end());
  out.density = attained;
  out.witness_edges = attained.edges;
  return out;
}

DensityResult densest_subgraph_bruteforce(const Graph& g) {
  const std::size_t n = g.vertex_count();
  require(n >= 1 && n <= 20, ErrorCode::kSizeLimit, "brute-force densest subgraph needs 1 <= n <= 20");
  std::vector<std::uint32_t> nbr(n, 0);
  for (const Edge& e : g.edges()) {
    nbr[e.u] |= 1U << e.v;
    nbr[e.v] |= 1U << e.u;
  }
  Density best{0, 1};
  std::uint32_t best_mask = 1;
  if (g.empty()) return {{0}, best, 0};
  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    std::uint64_t twice = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (mask >> v & 1U) twice += static_cast<std::uint64_t>(__builtin_popcount(nbr[v] & mask));
    const Density d{twice / 2, static_cast<std::uint64_t>(__builtin_popcount(mask))};
    if (d > best || (d == best && d.vertices > static_cast<std::uint64_t>(__builtin_popcount(best_mask)))) {
      best = d;
      best_mask = mask;
    }
  }
  DensityResult out;
  for (std::size_t v = 0; v < n; ++v)
    if (best_mask >> v & 1U) out.best_subset.push_back(static_cast<Vertex>(v));
  out.density = best;
  out.witness_edges = best.edges;
  return out;
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), ErrorCode::kInvalidArgument, "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, ErrorCode::kInvalidArgument, "quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RhoEstimate estimate_rho(double lambda, std::size_t n, std::size_t replicates, Seed seed,
                         unsigned threads) {
  require(lambda >= 1.0 && lambda < static_cast<double>(n), ErrorCode::kInvalidArgument,
          "estimate_rho: need 1 <= lambda < n");
  require(replicates >= 2, ErrorCode::kInvalidArgument, "estimate_rho: need at least 2 replicates");
  std::vector<double> rho(replicates), sizes(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Rng rng(replicate_seed(seed, r));
    const Graph g = sample_gnp(n, lambda / static_cast<double>(n), rng);
    const DensityResult d = densest_subgraph_exact(g);
    rho[r] = d.density.value();
    sizes[r] = static_cast<double>(d.best_subset.size()) / static_cast<double>(n);
  });
  RhoEstimate out;
  out.lambda = lambda;
  out.n = n;
  out.replicates = replicates;
  const double r = static_cast<double>(replicates);
  out.mean = std::accumulate(rho.begin(), rho.end(), 0.0) / r;
  double ss = 0.0;
  for (double x : rho) ss += (x - out.mean) * (x - out.mean);
  out.stderr_ = std::sqrt(ss / (r - 1.0) / r);
  out.size_q05 = quantile(sizes, 0.05);
  out.size_q50 = quantile(sizes, 0.5);
  out.size_fractions = std::move(sizes);
  return out;
}

double estimate_c_lambda(const RhoEstimate& estimate) { return estimate.size_q05; }

std::vector<double> isotonic_fit(std::span<const double> values, std::span<const double> weights) {
  require(values.size() == weights.size(), ErrorCode::kSizeMismatch, "isotonic_fit: size mismatch");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(weights[i] > 0.0, ErrorCode::kInvalidArgument, "isotonic_fit: weights must be positive");
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

RhoCurve build_rho_curve(std::span<const double> lambda_grid, std::size_t n,
                         std::size_t replicates, Seed seed, unsigned threads) {
  require(!lambda_grid.empty(), ErrorCode::kInvalidArgument, "rho curve: empty lambda grid");
  require(std::is_sorted(lambda_grid.begin(), lambda_grid.end()), ErrorCode::kInvalidArgument,
          "rho curve: lambda grid must be ascending");
  RhoCurve curve;
  curve.n_used = n;
  curve.replicates = replicates;
  std::vector<double> weights;
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const RhoEstimate e = estimate_rho(lambda_grid[i], n, replicates, replicate_seed(seed, i), threads);
    curve.lambda_grid.push_back(lambda_grid[i]);
    curve.rho_raw.push_back(e.mean);
    curve.stderr_.push_back(e.stderr_);
    curve.size_q05.push_back(e.size_q05);
    curve.size_q50.push_back(e.size_q50);
    weights.push_back(1.0 / std::max(e.stderr_ * e.stderr_, 1e-12));
  }
  curve.rho_hat = isotonic_fit(curve.rho_raw, weights);
  return curve;
}

namespace {

// Smallest lambda where the piecewise-linear interpolant of the
// non-decreasing `ys` reaches `target`, assuming ys.front() <= target <= ys.back().
double invert_monotone(const std::vector<double>& xs, const std::vector<double>& ys, double target) {
  if (target <= ys.front()) return xs.front();
  for (std::size_t i = 1; i < ys.size(); ++i) {
    if (ys[i] >= target) {
      const double t = (target - ys[i - 1]) / (ys[i] - ys[i - 1]);
      return xs[i - 1] + t * (xs[i] - xs[i - 1]);
    }
  }
  return xs.back();
}

}  // namespace

LambdaStar rho_inverse(double target, const RhoCurve& curve) {
  const std::size_t k = curve.lambda_grid.size();
  require(k >= 1 && curve.rho_hat.size() == k && curve.stderr_.size() == k,
          ErrorCode::kInvalidArgument, "rho_inverse: malformed curve");
  std::vector<double> low(k), high(k);
  for (std::size_t i = 0; i < k; ++i) {
    low[i] = curve.rho_hat[i] - 2.0 * curve.stderr_[i];
    high[i] = curve.rho_hat[i] + 2.0 * curve.stderr_[i];
  }
  const std::vector<double> ones(k, 1.0);
  low = isotonic_fit(low, ones);
  high = isotonic_fit(high, ones);
  require(target >= low.front() && target <= high.back(), ErrorCode::kInvalidArgument,
          "rho_inverse: target outside the estimated range; refusing to extrapolate");
  LambdaStar out;
  out.estimate = invert_monotone(curve.lambda_grid, curve.rho_hat, target);
  out.lower = invert_monotone(curve.lambda_grid, high, target);
  out.upper = target > low.back() ? curve.lambda_grid.back()
                                  : invert_monotone(curve.lambda_grid, low, target);
  return out;
}

void write_rho_curve_csv(std::ostream& out, const RhoCurve& curve) {
  auto num = [&out](double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, res.ptr - buf);
  };
  out << "lambda,n,replicates,rho_hat,stderr,size_q05,size_q50\n";
  for (std::size_t i = 0; i < curve.lambda_grid.size(); ++i) {
    num(curve.lambda_grid[i]);
    out << ',' << curve.n_used << ',' << curve.replicates << ',';
    num(curve.rho_hat[i]);
    out << ',';
    num(curve.stderr_[i]);
    out << ',';
    num(curve.size_q05[i]);
    out << ',';
    num(curve.size_q50[i]);
    out << '\n';
  }
}

}  // namespace corrmatch
