#include "corrmatch/orbits.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "corrmatch/error.hpp"

namespace corrmatch {

NodeCycleDecomposition node_cycles(const Bijection& phi) {
  const std::size_t n = phi.size();
  NodeCycleDecomposition out;
  out.cycle_of.assign(n, std::numeric_limits<std::size_t>::max());
  out.position.assign(n, 0);
  for (std::size_t start = 0; start < n; ++start) {
    if (out.cycle_of[start] != std::numeric_limits<std::size_t>::max()) continue;
    std::vector<Vertex> cycle;
    auto v = static_cast<Vertex>(start);
    do {
      out.cycle_of[v] = out.cycles.size();
      out.position[v] = cycle.size();
      cycle.push_back(v);
      v = phi(v);
    } while (v != start);
    out.cycles.push_back(std::move(cycle));
  }
  return out;
}

Bijection relative_permutation(const Bijection& pi_star, const Bijection& pi) {
  require(pi_star.size() == pi.size(), ErrorCode::kSizeMismatch, "orbits: size mismatch");
  std::vector<Vertex> f(pi.size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = pi.inverse(pi_star(static_cast<Vertex>(v)));
  return Bijection(std::move(f));
}

std::size_t OrbitCensus::total_edges() const {
  std::size_t total = 0;
  for (const auto* m : {&special_cycles, &plain_cycles, &chains}) {
    for (const auto& [k, count] : *m) total += k * count;
  }
  return total;
}

std::size_t OrbitCensus::special_edges() const {
  std::size_t total = 0;
  for (const auto& [k, count] : special_cycles) total += k * count;
  return total;
}

std::size_t OrbitEdgeStats::total() const {
  std::size_t t = e_special + e_long;
  for (std::size_t k = 1; k < e_k.size(); ++k) t += e_k[k];
  return t;
}

namespace {

// Dense indexing of the pairs inside a vertex subset.
class PairUniverse {
 public:
  PairUniverse(std::size_t n, const VertexSet& subset)
      : slot_(n, kAbsent), size_(subset.size()) {
    for (std::size_t i = 0; i < subset.size(); ++i) slot_[subset[i]] = i;
  }

  bool contains(const Edge& e) const { return slot_[e.u] != kAbsent && slot_[e.v] != kAbsent; }

  std::size_t index(const Edge& e) const {
    std::size_t a = slot_[e.u];
    std::size_t b = slot_[e.v];
    if (a > b) std::swap(a, b);
    // row-major upper triangle
    return a * size_ - a * (a + 1) / 2 + (b - a - 1);
  }

  std::size_t pair_count() const { return size_ * (size_ - (size_ > 0 ? 1 : 0)) / 2; }

 private:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> slot_;
  std::size_t size_;
};

OrbitDecomposition decompose(const Bijection& phi, const VertexSet& subset) {
  const std::size_t n = phi.size();
  const PairUniverse universe(n, subset);
  const NodeCycleDecomposition cycles = node_cycles(phi);
  auto forward = [&](const Edge& e) { return canonical_edge(phi(e.u), phi(e.v)); };
  auto backward = [&](const Edge& e) { return canonical_edge(phi.inverse(e.u), phi.inverse(e.v)); };
  auto is_special_pair = [&](const Edge& e) {
    if (cycles.cycle_of[e.u] != cycles.cycle_of[e.v]) return false;
    const std::size_t x = cycles.cycles[cycles.cycle_of[e.u]].size();
    if (x % 2 != 0) return false;
    const std::size_t gap = (cycles.position[e.v] + x - cycles.position[e.u]) % x;
    return gap == x / 2;
  };

  OrbitDecomposition out;
  out.census.universe_size = universe.pair_count();
  std::vector<char> seen(universe.pair_count(), 0);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      const Edge seed{subset[i], subset[j]};
      if (seen[universe.index(seed)]) continue;

      // Walk backwards to either the chain head or back around to the seed.
      Edge head = seed;
      OrbitKind kind = OrbitKind::kCycle;
      for (;;) {
        const Edge prev = backward(head);
        if (!universe.contains(prev)) {
          kind = OrbitKind::kChain;
          break;
        }
        if (prev == seed) break;
        head = prev;
      }
      if (kind == OrbitKind::kCycle) head = seed;

      EdgeOrbit orbit;
      orbit.kind = kind;
      Edge cur = head;
      for (;;) {
        seen[universe.index(cur)] = 1;
        orbit.edges.push_back(cur);
        const Edge next = forward(cur);
        if (!universe.contains(next) || next == head) break;
        cur = next;
      }
      orbit.special = kind == OrbitKind::kCycle && is_special_pair(head);

      const std::size_t k = orbit.length();
      if (orbit.kind == OrbitKind::kChain) {
        ++out.census.chains[k];
      } else if (orbit.special) {
        ++out.census.special_cycles[k];
      } else {
        ++out.census.plain_cycles[k];
      }
      out.orbits.push_back(std::move(orbit));
    }
  }
  return out;
}

}  // namespace

OrbitDecomposition edge_orbits(const Bijection& pi_star, const Bijection& pi) {
  return decompose(relative_permutation(pi_star, pi), all_vertices(pi.size()));
}

OrbitDecomposition restricted_orbits(const Bijection& pi_star, const Bijection& pi,
                                     const VertexSet& subset) {
  const Bijection phi = relative_permutation(pi_star, pi);
  for (Vertex v : subset) {
    require(v < phi.size(), ErrorCode::kInvalidArgument, "orbits: subset vertex out of range");
  }
  return decompose(phi, subset);
}

std::size_t cutoff_for_alpha(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::kInvalidArgument,
          "cutoff: alpha must lie in (0, 1); use cutoff_for_alpha_one for alpha = 1");
  return static_cast<std::size_t>(std::floor(1.0 / (1.0 - alpha)));
}

std::size_t cutoff_for_alpha_one(double rho, double eta) {
  require(rho - eta > 1.0, ErrorCode::kInvalidArgument, "cutoff: need rho - eta > 1");
  return static_cast<std::size_t>(std::floor(1.0 / (rho - eta - 1.0))) + 1;
}

OrbitEdgeStats orbit_edge_stats(const OrbitDecomposition& orbits, const Graph& g,
                                const Graph& g_bar, const Bijection& pi, std::size_t n_cutoff) {
  require(g.vertex_count() == g_bar.vertex_count() && g.vertex_count() == pi.size(),
          ErrorCode::kSizeMismatch, "orbit_edge_stats: size mismatch");
  OrbitEdgeStats stats;
  stats.n_cutoff = n_cutoff;
  stats.e_k.assign(n_cutoff + 1, 0);
  for (const auto& orbit : orbits.orbits) {
    std::size_t present = 0;
    for (const auto& e : orbit.edges) {
      if (g.has_edge(e.u, e.v) && g_bar.has_edge(pi(e.u), pi(e.v))) ++present;
    }
    if (orbit.kind == OrbitKind::kCycle && orbit.special) {
      stats.e_special += present;
    } else if (orbit.kind == OrbitKind::kCycle && orbit.length() <= n_cutoff) {
      stats.e_k[orbit.length()] += present;
    } else {
      stats.e_long += present;
    }
  }
  return stats;
}

OrbitEdgeStats orbit_edge_stats(const CorrelatedSample& sample, const Bijection& pi,
                                const VertexSet& subset, std::size_t n_cutoff) {
  const OrbitDecomposition orbits = restricted_orbits(sample.pi_star, pi, subset);
  return orbit_edge_stats(orbits, sample.g, sample.g_bar, pi, n_cutoff);
}

void write_census_csv(std::ostream& out, const OrbitCensus& census) {
  out << "length,kind,special,count\n";
  std::map<std::size_t, int> lengths;
  for (const auto* m : {&census.special_cycles, &census.plain_cycles, &census.chains}) {
    for (const auto& [k, count] : *m) lengths[k] = 0;
  }
  for (const auto& [k, unused] : lengths) {
    if (auto it = census.plain_cycles.find(k); it != census.plain_cycles.end()) {
      out << k << ",cycle,0," << it->second << '\n';
    }
    if (auto it = census.special_cycles.find(k); it != census.special_cycles.end()) {
      out << k << ",cycle,1," << it->second << '\n';
    }
    if (auto it = census.chains.find(k); it != census.chains.end()) {
      out << k << ",chain,0," << it->second << '\n';
    }
  }
}

}  // namespace corrmatch
