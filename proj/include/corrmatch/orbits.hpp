#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include "corrmatch/graph.hpp"

namespace corrmatch {

struct NodeCycleDecomposition {
  std::vector<std::vector<Vertex>> cycles;
  /// cycle_of[v] indexes `cycles`; position[v] is v's offset inside it, so
  /// phi^j(v) = cycles[cycle_of[v]][(position[v] + j) % length].
  std::vector<std::size_t> cycle_of;
  std::vector<std::size_t> position;
};

/// Cycles of a permutation on one vertex set, each starting at its smallest
/// vertex and listed in order of that vertex.
NodeCycleDecomposition node_cycles(const Bijection& phi);

/// phi = pi^-1 ∘ pi_star, the permutation of V whose edge action drives the
/// orbit structure.
Bijection relative_permutation(const Bijection& pi_star, const Bijection& pi);

enum class OrbitKind { kCycle, kChain };

struct EdgeOrbit {
  /// edges[i+1] = Phi(edges[i]); for a cycle also Phi(back) = front. Chains
  /// start at the edge whose Phi-preimage leaves the universe.
  std::vector<Edge> edges;
  OrbitKind kind = OrbitKind::kCycle;
  /// Cycle whose edges join antipodal vertices of an even node cycle.
  bool special = false;

  std::size_t length() const { return edges.size(); }
};

/// Orbit counts by length: S_k special cycles, L_k other cycles, T_k chains.
struct OrbitCensus {
  std::map<std::size_t, std::size_t> special_cycles;
  std::map<std::size_t, std::size_t> plain_cycles;
  std::map<std::size_t, std::size_t> chains;
  std::size_t universe_size = 0;

  /// Sum over all orbits of their length; equals universe_size.
  std::size_t total_edges() const;
  /// Sum of k * S_k.
  std::size_t special_edges() const;
};

struct OrbitDecomposition {
  std::vector<EdgeOrbit> orbits;
  OrbitCensus census;
};

/// Orbits of Phi on all C(n,2) pairs. Every orbit is a cycle.
OrbitDecomposition edge_orbits(const Bijection& pi_star, const Bijection& pi);

/// Orbits of Phi restricted to pairs inside `subset`: maximal Phi-chains, or
/// full cycles when the whole cycle stays inside.
OrbitDecomposition restricted_orbits(const Bijection& pi_star, const Bijection& pi,
                                     const VertexSet& subset);

/// Intersection-graph edge counts grouped by orbit class.
struct OrbitEdgeStats {
  std::size_t e_special = 0;
  /// e_k[k] for 1 <= k <= n_cutoff; e_k[0] is unused.
  std::vector<std::size_t> e_k;
  /// Chains of any length plus non-special cycles longer than n_cutoff.
  std::size_t e_long = 0;
  std::size_t n_cutoff = 0;

  std::size_t total() const;
};

/// Short/long cutoff floor(1/(1-alpha)) for alpha in (0,1).
std::size_t cutoff_for_alpha(double alpha);
/// Cutoff floor(1/(rho-eta-1)) + 1 used when alpha = 1; requires rho-eta > 1.
std::size_t cutoff_for_alpha_one(double rho, double eta);

OrbitEdgeStats orbit_edge_stats(const OrbitDecomposition& orbits, const Graph& g,
                                const Graph& g_bar, const Bijection& pi, std::size_t n_cutoff);

OrbitEdgeStats orbit_edge_stats(const CorrelatedSample& sample, const Bijection& pi,
                                const VertexSet& subset, std::size_t n_cutoff);

/// CSV with header "length,kind,special,count".
void write_census_csv(std::ostream& out, const OrbitCensus& census);

}  // namespace corrmatch
