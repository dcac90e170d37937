#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "corrmatch/rng.hpp"

namespace corrmatch {

using Vertex = std::uint32_t;

/// Unordered vertex pair stored canonically with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge canonical_edge(Vertex a, Vertex b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Sorted, duplicate-free list of vertices.
using VertexSet = std::vector<Vertex>;

/// Sorts and deduplicates `vertices`, rejecting ids outside [0, n).
VertexSet make_vertex_set(std::vector<Vertex> vertices, std::size_t n);

VertexSet all_vertices(std::size_t n);

/// Simple undirected graph on vertices [0, n). Immutable after construction.
/// Keeps a sorted canonical edge list, CSR adjacency, and one bitset row per
/// vertex for O(1) membership tests.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);
  /// Throws kInvalidArgument on self-loops or endpoints >= n. Duplicate pairs
  /// (in either orientation) collapse to one edge.
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  bool has_edge(Vertex a, Vertex b) const {
    if (a == b) return false;
    return (bits_[a * words_ + (b >> 6)] >> (b & 63)) & 1U;
  }

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Vertex> neighbors(Vertex v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const;

  /// Number of edges with both endpoints in `subset`.
  std::size_t edges_within(std::span<const Vertex> subset) const;

  /// Same vertex set, keeping only edges with both endpoints in `subset`.
  Graph restricted_to(std::span<const Vertex> subset) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> adj_;
  std::vector<std::uint64_t> bits_;
};

/// Bijection between two n-element vertex sets sharing the index space
/// [0, n). Stores both directions.
class Bijection {
 public:
  Bijection() = default;
  /// Throws kInvalidArgument unless `forward` is a permutation of [0, n).
  explicit Bijection(std::vector<Vertex> forward);

  static Bijection identity(std::size_t n);
  static Bijection uniform(std::size_t n, Rng& rng);

  std::size_t size() const { return forward_.size(); }
  Vertex operator()(Vertex v) const { return forward_[v]; }
  Vertex inverse(Vertex w) const { return inverse_[w]; }
  std::span<const Vertex> forward() const { return forward_; }
  std::span<const Vertex> inverse_map() const { return inverse_; }

  Bijection inverted() const;

  friend bool operator==(const Bijection& a, const Bijection& b) { return a.forward_ == b.forward_; }
  friend auto operator<=>(const Bijection& a, const Bijection& b) { return a.forward_ <=> b.forward_; }

 private:
  std::vector<Vertex> forward_;
  std::vector<Vertex> inverse_;
};

/// outer ∘ inner, i.e. v -> outer(inner(v)).
Bijection compose(const Bijection& outer, const Bijection& inner);

/// Injective map from a subset of V into V̄. `images[i]` is the image of
/// `domain[i]`.
struct Embedding {
  VertexSet domain;
  std::vector<Vertex> images;

  /// Throws unless images are distinct, in range, and sized like domain.
  void validate(std::size_t n) const;
  bool extended_by(const Bijection& pi) const;
};

Embedding restrict_to(const Bijection& pi, const VertexSet& domain);

struct ModelParams {
  std::size_t n = 0;
  double p = 0.0;
  double s = 0.0;

  /// Throws kInvalidArgument unless n >= 2, p in (0,1), s in (0,1].
  void validate() const;

  double lambda() const { return static_cast<double>(n) * p * s * s; }
  /// Finite-n exponent: -ln p / ln n.
  double alpha_hat() const;

  /// p = n^-alpha and s = sqrt(lambda / (n p)). Throws if s would exceed 1.
  static ModelParams from_lambda_alpha(std::size_t n, double lambda, double alpha);
};

struct CorrelatedSample {
  ModelParams params;
  Bijection pi_star;
  Graph g;
  Graph g_bar;
};

/// Draws (pi*, G, Ḡ) from the correlated law: uniform pi*, then for every pair
/// e, G_e = I_e J_e and Ḡ_{Pi*(e)} = I_e J̄_e with I ~ Bern(p), J, J̄ ~ Bern(s).
CorrelatedSample sample_correlated(const ModelParams& params, Seed seed);

/// Same law conditioned on a given pi*.
CorrelatedSample sample_correlated_given(const ModelParams& params, const Bijection& pi_star,
                                         Rng& rng);

/// Two independent G(n, ps) graphs.
std::pair<Graph, Graph> sample_independent(const ModelParams& params, Seed seed);

/// G(n, q) via geometric skipping over the canonical pair order.
Graph sample_gnp(std::size_t n, double q, Rng& rng);

/// (u,v) is an edge iff (u,v) in g and (pi(u), pi(v)) in g_bar.
Graph intersection_graph(const Graph& g, const Graph& g_bar, const Bijection& pi);

/// Number of common edges |E_pi| without materializing the intersection graph.
std::size_t common_edge_count(const Graph& g, const Graph& g_bar, const Bijection& pi);

/// |{v : pi1(v) = pi2(v)}|.
std::size_t overlap(const Bijection& pi1, const Bijection& pi2);

/// Image of g under pi: edge (u,v) becomes (pi(u), pi(v)).
Graph relabel(const Graph& g, const Bijection& pi);

// Edge-list text format: header "n m", then one "u v" line per edge in sorted
// canonical order.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

// Bijection text format: "n" on the first line, then the n forward images
// separated by whitespace.
void write_bijection(std::ostream& out, const Bijection& pi);
Bijection read_bijection(std::istream& in);

}  // namespace corrmatch
