#include "corrmatch/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "corrmatch/error.hpp"

namespace corrmatch {

VertexSet make_vertex_set(std::vector<Vertex> vertices, std::size_t n) {
  for (Vertex v : vertices) {
    if (v >= n) {
      fail(ErrorCode::kInvalidArgument,
           "vertex " + std::to_string(v) + " outside [0, " + std::to_string(n) + ")");
    }
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  return vertices;
}

VertexSet all_vertices(std::size_t n) {
  VertexSet out(n);
  std::iota(out.begin(), out.end(), Vertex{0});
  return out;
}

Graph::Graph(std::size_t n) : Graph(n, {}) {}

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), words_((n + 63) / 64) {
  for (auto& e : edges) {
    if (e.u == e.v) fail(ErrorCode::kInvalidArgument, "self-loop at vertex " + std::to_string(e.u));
    if (e.u >= n || e.v >= n) {
      fail(ErrorCode::kInvalidArgument, "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                            ") outside [0, " + std::to_string(n) + ")");
    }
    e = canonical_edge(e.u, e.v);
  }
  if (!std::is_sorted(edges.begin(), edges.end())) std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  adj_.resize(2 * edges_.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  bits_.assign(n * words_, 0);
  for (const auto& e : edges_) {
    adj_[fill[e.u]++] = e.v;
    adj_[fill[e.v]++] = e.u;
    bits_[e.u * words_ + (e.v >> 6)] |= std::uint64_t{1} << (e.v & 63);
    bits_[e.v * words_ + (e.u >> 6)] |= std::uint64_t{1} << (e.u & 63);
  }
  // Rows come out sorted: for a fixed vertex x, pairs (u, x) with u < x precede
  // pairs (x, v) in the sorted edge list.
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < n_; ++v) best = std::max(best, degree(static_cast<Vertex>(v)));
  return best;
}

std::size_t Graph::edges_within(std::span<const Vertex> subset) const {
  std::vector<char> in(n_, 0);
  for (Vertex v : subset) in[v] = 1;
  std::size_t count = 0;
  for (Vertex v : subset) {
    for (Vertex w : neighbors(v)) {
      if (w > v && in[w]) ++count;
    }
  }
  return count;
}

Graph Graph::restricted_to(std::span<const Vertex> subset) const {
  std::vector<char> in(n_, 0);
  for (Vertex v : subset) in[v] = 1;
  std::vector<Edge> kept;
  for (const auto& e : edges_) {
    if (in[e.u] && in[e.v]) kept.push_back(e);
  }
  return Graph(n_, std::move(kept));
}

Bijection::Bijection(std::vector<Vertex> forward) : forward_(std::move(forward)) {
  const std::size_t n = forward_.size();
  inverse_.assign(n, static_cast<Vertex>(n));
  for (std::size_t v = 0; v < n; ++v) {
    const Vertex w = forward_[v];
    if (w >= n || inverse_[w] != n) {
      fail(ErrorCode::kInvalidArgument,
           "forward map is not a permutation of [0, " + std::to_string(n) + ")");
    }
    inverse_[w] = static_cast<Vertex>(v);
  }
}

Bijection Bijection::identity(std::size_t n) { return Bijection(all_vertices(n)); }

Bijection Bijection::uniform(std::size_t n, Rng& rng) {
  std::vector<Vertex> f = all_vertices(n);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(f[i - 1], f[j]);
  }
  return Bijection(std::move(f));
}

Bijection Bijection::inverted() const { return Bijection(inverse_); }

Bijection compose(const Bijection& outer, const Bijection& inner) {
  require(outer.size() == inner.size(), ErrorCode::kSizeMismatch, "compose: size mismatch");
  std::vector<Vertex> f(inner.size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = outer(inner(static_cast<Vertex>(v)));
  return Bijection(std::move(f));
}

void Embedding::validate(std::size_t n) const {
  require(domain.size() == images.size(), ErrorCode::kInvalidArgument,
          "embedding: domain and image sizes differ");
  require(std::is_sorted(domain.begin(), domain.end()) &&
              std::adjacent_find(domain.begin(), domain.end()) == domain.end(),
          ErrorCode::kInvalidArgument, "embedding: domain must be a sorted vertex set");
  std::vector<char> used(n, 0);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    require(domain[i] < n && images[i] < n, ErrorCode::kInvalidArgument,
            "embedding: vertex out of range");
    require(!used[images[i]], ErrorCode::kInvalidArgument, "embedding: images not distinct");
    used[images[i]] = 1;
  }
}

bool Embedding::extended_by(const Bijection& pi) const {
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (pi(domain[i]) != images[i]) return false;
  }
  return true;
}

Embedding restrict_to(const Bijection& pi, const VertexSet& domain) {
  Embedding out{domain, {}};
  out.images.reserve(domain.size());
  for (Vertex v : domain) out.images.push_back(pi(v));
  return out;
}

void ModelParams::validate() const {
  require(n >= 2, ErrorCode::kInvalidArgument, "model: n must be at least 2");
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "model: p must lie in (0, 1)");
  require(s > 0.0 && s <= 1.0, ErrorCode::kInvalidArgument, "model: s must lie in (0, 1]");
}

double ModelParams::alpha_hat() const {
  return -std::log(p) / std::log(static_cast<double>(n));
}

ModelParams ModelParams::from_lambda_alpha(std::size_t n, double lambda, double alpha) {
  require(n >= 2 && lambda > 0.0 && alpha > 0.0, ErrorCode::kInvalidArgument,
          "model: need n >= 2, lambda > 0, alpha > 0");
  ModelParams m;
  m.n = n;
  m.p = std::pow(static_cast<double>(n), -alpha);
  m.s = std::sqrt(lambda / (static_cast<double>(n) * m.p));
  require(m.s <= 1.0, ErrorCode::kInvalidArgument,
          "model: lambda too large for this (n, alpha); s would exceed 1");
  m.validate();
  return m;
}

namespace {

// Visits the canonical pairs selected by independent Bernoulli(q) trials, in
// increasing (u, v) order.
template <class Visit>
void for_each_bernoulli_pair(std::size_t n, double q, Rng& rng, Visit&& visit) {
  if (n < 2 || q <= 0.0) return;
  if (q >= 0.25) {
    // Dense regime: one uniform per pair beats a logarithm per success.
    for (std::size_t u = 0; u + 1 < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (rng.uniform() < q) visit(static_cast<Vertex>(u), static_cast<Vertex>(v));
      }
    }
    return;
  }
  const double log_fail = std::log1p(-q);
  std::size_t u = 0;
  std::size_t v = 0;  // position before the first pair; first step lands on (0,1)
  for (;;) {
    const double g = std::floor(std::log(rng.uniform_open0()) / log_fail);
    if (!(g < 1.8e19)) return;
    std::uint64_t step = static_cast<std::uint64_t>(g) + 1;
    // Advance `step` positions through the row-major upper triangle.
    while (step > 0) {
      const std::size_t remaining = n - 1 - v;
      if (step <= remaining) {
        v += step;
        step = 0;
      } else {
        step -= remaining;
        ++u;
        if (u >= n - 1) return;
        v = u;
      }
    }
    visit(static_cast<Vertex>(u), static_cast<Vertex>(v));
  }
}

}  // namespace

Graph sample_gnp(std::size_t n, double q, Rng& rng) {
  std::vector<Edge> edges;
  for_each_bernoulli_pair(n, q, rng, [&](Vertex u, Vertex v) { edges.push_back({u, v}); });
  return Graph(n, std::move(edges));
}

CorrelatedSample sample_correlated_given(const ModelParams& params, const Bijection& pi_star,
                                         Rng& rng) {
  params.validate();
  require(pi_star.size() == params.n, ErrorCode::kSizeMismatch,
          "sample: pi_star size differs from n");
  const double expected = params.p * params.s * static_cast<double>(params.n) *
                          static_cast<double>(params.n - 1) / 2.0;
  std::vector<Edge> g_edges;
  std::vector<Edge> g_bar_edges;
  g_edges.reserve(static_cast<std::size_t>(expected * 1.2) + 16);
  g_bar_edges.reserve(static_cast<std::size_t>(expected * 1.2) + 16);
  for_each_bernoulli_pair(params.n, params.p, rng, [&](Vertex u, Vertex v) {
    if (rng.bernoulli(params.s)) g_edges.push_back({u, v});
    if (rng.bernoulli(params.s)) g_bar_edges.push_back(canonical_edge(pi_star(u), pi_star(v)));
  });
  return CorrelatedSample{params, pi_star, Graph(params.n, std::move(g_edges)),
                          Graph(params.n, std::move(g_bar_edges))};
}

CorrelatedSample sample_correlated(const ModelParams& params, Seed seed) {
  params.validate();
  Rng rng(seed, 0);
  Bijection pi_star = Bijection::uniform(params.n, rng);
  return sample_correlated_given(params, pi_star, rng);
}

std::pair<Graph, Graph> sample_independent(const ModelParams& params, Seed seed) {
  params.validate();
  Rng rng(seed, 1);
  const double q = params.p * params.s;
  Graph a = sample_gnp(params.n, q, rng);
  Graph b = sample_gnp(params.n, q, rng);
  return {std::move(a), std::move(b)};
}

Graph intersection_graph(const Graph& g, const Graph& g_bar, const Bijection& pi) {
  require(g.vertex_count() == g_bar.vertex_count() && g.vertex_count() == pi.size(),
          ErrorCode::kSizeMismatch, "intersection_graph: size mismatch");
  std::vector<Edge> kept;
  for (const auto& e : g.edges()) {
    if (g_bar.has_edge(pi(e.u), pi(e.v))) kept.push_back(e);
  }
  return Graph(g.vertex_count(), std::move(kept));
}

std::size_t common_edge_count(const Graph& g, const Graph& g_bar, const Bijection& pi) {
  require(g.vertex_count() == g_bar.vertex_count() && g.vertex_count() == pi.size(),
          ErrorCode::kSizeMismatch, "common_edge_count: size mismatch");
  std::size_t count = 0;
  for (const auto& e : g.edges()) count += g_bar.has_edge(pi(e.u), pi(e.v)) ? 1 : 0;
  return count;
}

std::size_t overlap(const Bijection& pi1, const Bijection& pi2) {
  require(pi1.size() == pi2.size(), ErrorCode::kSizeMismatch, "overlap: size mismatch");
  std::size_t count = 0;
  for (std::size_t v = 0; v < pi1.size(); ++v) {
    count += pi1(static_cast<Vertex>(v)) == pi2(static_cast<Vertex>(v)) ? 1 : 0;
  }
  return count;
}

Graph relabel(const Graph& g, const Bijection& pi) {
  require(g.vertex_count() == pi.size(), ErrorCode::kSizeMismatch, "relabel: size mismatch");
  std::vector<Edge> out;
  out.reserve(g.edge_count());
  for (const auto& e : g.edges()) out.push_back(canonical_edge(pi(e.u), pi(e.v)));
  return Graph(g.vertex_count(), std::move(out));
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

Graph read_edge_list(std::istream& in) {
  std::size_t n = 0;
  std::size_t m = 0;
  require(static_cast<bool>(in >> n >> m), ErrorCode::kIo, "edge list: missing 'n m' header");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    long long u = -1;
    long long v = -1;
    require(static_cast<bool>(in >> u >> v), ErrorCode::kIo,
            "edge list: expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    require(u >= 0 && v >= 0, ErrorCode::kIo, "edge list: negative vertex id");
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
  }
  Graph g(n, std::move(edges));
  require(g.edge_count() == m, ErrorCode::kIo, "edge list: duplicate edges");
  return g;
}

void write_bijection(std::ostream& out, const Bijection& pi) {
  out << pi.size() << '\n';
  for (std::size_t v = 0; v < pi.size(); ++v) {
    if (v) out << ' ';
    out << pi(static_cast<Vertex>(v));
  }
  out << '\n';
}

Bijection read_bijection(std::istream& in) {
  std::size_t n = 0;
  require(static_cast<bool>(in >> n), ErrorCode::kIo, "bijection: missing size");
  std::vector<Vertex> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    long long w = -1;
    require(static_cast<bool>(in >> w) && w >= 0, ErrorCode::kIo, "bijection: truncated map");
    f[i] = static_cast<Vertex>(w);
  }
  return Bijection(std::move(f));
}

}  // namespace corrmatch
