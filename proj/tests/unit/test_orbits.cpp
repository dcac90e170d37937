#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "corrmatch/error.hpp"
#include "corrmatch/orbits.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace corrmatch;

namespace {

// Builds a permutation from disjoint cycles; unspecified points stay fixed.
Bijection from_cycles(std::size_t n, const std::vector<std::vector<Vertex>>& cycles) {
  std::vector<Vertex> f(n);
  std::iota(f.begin(), f.end(), 0U);
  for (const auto& c : cycles) {
    for (std::size_t i = 0; i < c.size(); ++i) f[c[i]] = c[(i + 1) % c.size()];
  }
  return Bijection(f);
}

std::multiset<std::size_t> cycle_lengths(const NodeCycleDecomposition& d) {
  std::multiset<std::size_t> out;
  for (const auto& c : d.cycles) out.insert(c.size());
  return out;
}

// Independent orbit lengths: apply the edge map to each pair until it
// returns, using raw arrays only.
std::map<std::pair<int, int>, std::size_t> brute_cycle_length(const std::vector<Vertex>& phi) {
  std::map<std::pair<int, int>, std::size_t> out;
  const int n = static_cast<int>(phi.size());
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      int a = u, b = v;
      std::size_t len = 0;
      do {
        const int na = static_cast<int>(phi[a]);
        const int nb = static_cast<int>(phi[b]);
        a = std::min(na, nb);
        b = std::max(na, nb);
        ++len;
      } while (!(a == u && b == v));
      out[{u, v}] = len;
    }
  }
  return out;
}

std::size_t edges_inside(const Graph& h, const VertexSet& a) { return h.edges_within(a); }

}  // namespace

TEST_CASE("node cycle examples") {
  CHECK(cycle_lengths(node_cycles(Bijection::identity(6))) == std::multiset<std::size_t>{1, 1, 1, 1, 1, 1});
  CHECK(cycle_lengths(node_cycles(from_cycles(6, {{0, 1, 2, 3, 4, 5}}))) == std::multiset<std::size_t>{6});
  // (0 1)(2 3 4) with a sixth point fixed; on exactly five points there is no 1-cycle.
  CHECK(cycle_lengths(node_cycles(from_cycles(6, {{0, 1}, {2, 3, 4}}))) == std::multiset<std::size_t>{1, 2, 3});
  CHECK(cycle_lengths(node_cycles(from_cycles(5, {{0, 1}, {2, 3, 4}}))) == std::multiset<std::size_t>{2, 3});
  const Bijection phi = from_cycles(7, {{0, 4, 2}, {3, 6}});
  const NodeCycleDecomposition d = node_cycles(phi);
  for (const auto& c : d.cycles) {
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(phi(c[i]) == c[(i + 1) % c.size()]);
  }
  for (Vertex v = 0; v < 7; ++v) CHECK(d.cycles[d.cycle_of[v]][d.position[v]] == v);
}

TEST_CASE("relative permutation is pi^-1 o pi_star") {
  Rng rng(5);
  const Bijection ps = Bijection::uniform(9, rng);
  const Bijection pi = Bijection::uniform(9, rng);
  const Bijection phi = relative_permutation(ps, pi);
  for (Vertex v = 0; v < 9; ++v) CHECK(pi(phi(v)) == ps(v));
}

TEST_CASE("edge orbit examples") {
  Rng rng(11);
  const Bijection ps = Bijection::uniform(7, rng);
  const OrbitDecomposition same = edge_orbits(ps, ps);
  CHECK(same.orbits.size() == 21);
  CHECK(same.census.plain_cycles.at(1) == 21);

  // With pi = identity, phi = pi_star.
  const OrbitDecomposition five = edge_orbits(from_cycles(5, {{0, 1, 2, 3, 4}}), Bijection::identity(5));
  CHECK(five.orbits.size() == 2);
  for (const auto& o : five.orbits) {
    CHECK(o.length() == 5);
    CHECK(o.kind == OrbitKind::kCycle);
  }

  const OrbitDecomposition mixed = edge_orbits(from_cycles(5, {{0, 1}, {2, 3, 4}}), Bijection::identity(5));
  bool found_cross = false;
  for (const auto& o : mixed.orbits) {
    const bool cross = std::all_of(o.edges.begin(), o.edges.end(),
                                   [](const Edge& e) { return e.u <= 1 && e.v >= 2; });
    if (cross) {
      found_cross = true;
      CHECK(o.length() == 6);
    }
  }
  CHECK(found_cross);
  CHECK_THROWS_AS(edge_orbits(Bijection::identity(4), Bijection::identity(5)), Error);
}

TEST_CASE("restricted orbit examples") {
  Rng rng(12);
  const Bijection ps = Bijection::uniform(8, rng);
  const Bijection pi = Bijection::uniform(8, rng);
  const OrbitDecomposition full = edge_orbits(ps, pi);
  const OrbitDecomposition restricted = restricted_orbits(ps, pi, all_vertices(8));
  CHECK(full.census.plain_cycles == restricted.census.plain_cycles);
  CHECK(full.census.special_cycles == restricted.census.special_cycles);
  CHECK(restricted.census.chains.empty());

  const Bijection four = from_cycles(6, {{0, 1, 2, 3}});
  const OrbitDecomposition sp = restricted_orbits(four, Bijection::identity(6), {0, 1, 2, 3});
  bool found = false;
  for (const auto& o : sp.orbits) {
    if (o.edges.front() == Edge{0, 2}) {
      found = true;
      CHECK(o.special);
      CHECK(o.kind == OrbitKind::kCycle);
      CHECK(o.edges == std::vector<Edge>{{0, 2}, {1, 3}});
    }
  }
  CHECK(found);
  CHECK(sp.census.special_cycles.at(2) == 1);
  CHECK(sp.census.plain_cycles.at(4) == 1);

  const Bijection six = from_cycles(6, {{0, 1, 2, 3, 4, 5}});
  const OrbitDecomposition ch = restricted_orbits(six, Bijection::identity(6), {0, 1, 2});
  CHECK(ch.census.chains.at(2) == 1);
  CHECK(ch.census.chains.at(1) == 1);
  for (const auto& o : ch.orbits) {
    CHECK(o.kind == OrbitKind::kChain);
    if (o.length() == 2) CHECK(o.edges == std::vector<Edge>{{0, 1}, {1, 2}});
  }

  CHECK(restricted_orbits(ps, pi, {}).orbits.empty());
}

TEST_CASE("two-node cycles give special one-cycles") {
  const OrbitDecomposition d = edge_orbits(from_cycles(4, {{0, 1}, {2, 3}}), Bijection::identity(4));
  CHECK(d.census.special_cycles.at(1) == 2);
  CHECK(d.census.plain_cycles.at(2) == 2);
}

TEST_CASE("orbits partition the universe and the census is consistent") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    const Bijection ps = Bijection::uniform(n, rng);
    const Bijection pi = Bijection::uniform(n, rng);
    std::vector<Vertex> members;
    for (Vertex v = 0; v < n; ++v)
      if (rng.bernoulli(0.6)) members.push_back(v);
    const OrbitDecomposition d = restricted_orbits(ps, pi, members);
    std::set<Edge> seen;
    const Bijection phi = relative_permutation(ps, pi);
    for (const auto& o : d.orbits) {
      for (std::size_t i = 0; i < o.edges.size(); ++i) {
        CHECK(seen.insert(o.edges[i]).second);
        const Edge& e = o.edges[i];
        const Edge next = canonical_edge(phi(e.u), phi(e.v));
        if (i + 1 < o.edges.size()) CHECK(next == o.edges[i + 1]);
        else if (o.kind == OrbitKind::kCycle) CHECK(next == o.edges.front());
      }
      if (o.special) CHECK(o.kind == OrbitKind::kCycle);
    }
    const std::size_t m = members.size();
    CHECK(seen.size() == m * (m - (m > 0 ? 1 : 0)) / 2);
    CHECK(d.census.total_edges() == seen.size());
    CHECK(d.census.special_edges() <= n);
  }
}

TEST_CASE("full orbit lengths match brute force") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Bijection ps = Bijection::uniform(9, rng);
    const Bijection pi = Bijection::uniform(9, rng);
    const Bijection phi = relative_permutation(ps, pi);
    const auto brute = brute_cycle_length({phi.forward().begin(), phi.forward().end()});
    for (const auto& o : edge_orbits(ps, pi).orbits) {
      for (const auto& e : o.edges) CHECK(brute.at({int(e.u), int(e.v)}) == o.length());
    }
  }
}

TEST_CASE("cross orbits of two node cycles have LCM length") {
  for (std::size_t x = 1; x <= 6; ++x) {
    for (std::size_t y = 1; y <= 6; ++y) {
      std::vector<Vertex> c1(x), c2(y);
      std::iota(c1.begin(), c1.end(), 0U);
      std::iota(c2.begin(), c2.end(), static_cast<Vertex>(x));
      const Bijection phi = from_cycles(x + y, {c1, c2});
      const OrbitDecomposition d = edge_orbits(phi, Bijection::identity(x + y));
      std::size_t cross_pairs = 0;
      for (const auto& o : d.orbits) {
        const Edge& e = o.edges.front();
        if (e.u < x && e.v >= x) {
          CHECK(o.length() == std::lcm(x, y));
          cross_pairs += o.length();
        }
      }
      CHECK(cross_pairs == x * y);
    }
  }
}

TEST_CASE("cutoffs") {
  CHECK(cutoff_for_alpha(0.5) == 2);
  CHECK(cutoff_for_alpha(0.75) == 4);
  CHECK(cutoff_for_alpha(0.1) == 1);
  CHECK(cutoff_for_alpha_one(2.0, 0.5) == 3);
  CHECK_THROWS_AS(cutoff_for_alpha(1.0), Error);
  CHECK_THROWS_AS(cutoff_for_alpha_one(1.2, 0.5), Error);
}

TEST_CASE("orbit edge stats examples") {
  const ModelParams mp{30, 0.3, 0.7};
  Rng rng(31);
  const Bijection ps = Bijection::uniform(30, rng);
  const CorrelatedSample cs = sample_correlated_given(mp, ps, rng);
  VertexSet a;
  for (Vertex v = 0; v < 30; v += 2) a.push_back(v);
  const OrbitEdgeStats st = orbit_edge_stats(cs, ps, a, cutoff_for_alpha(0.5));
  const Graph h = intersection_graph(cs.g, cs.g_bar, ps);
  CHECK(st.n_cutoff == 2);
  CHECK(st.e_k[1] == edges_inside(h, a));
  CHECK(st.e_k[2] == 0);
  CHECK(st.e_special == 0);
  CHECK(st.e_long == 0);

  CorrelatedSample empty{mp, ps, Graph(30), Graph(30)};
  const OrbitEdgeStats zero = orbit_edge_stats(empty, Bijection::uniform(30, rng), all_vertices(30), 2);
  CHECK(zero.total() == 0);

  // Special 2-cycle {(0,2),(1,3)} from the node 4-cycle (0 1 2 3), present in
  // both graphs.
  const Bijection phi = from_cycles(8, {{0, 1, 2, 3}});
  CorrelatedSample built{{8, 0.5, 0.5}, phi, Graph(8, {{0, 2}, {1, 3}, {4, 5}}), Graph(8, {{0, 2}, {1, 3}})};
  const OrbitEdgeStats sp = orbit_edge_stats(built, Bijection::identity(8), all_vertices(8), 2);
  CHECK(sp.e_special == 2);
  CHECK(sp.total() == 2);
}

TEST_CASE("orbit edge stats total matches intersection edges on random inputs") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams mp{14, 0.5, 0.8};
    const CorrelatedSample cs = sample_correlated(mp, replicate_seed(41, trial));
    // Put pi close to pi_star so short orbits appear.
    std::vector<Vertex> f(cs.pi_star.forward().begin(), cs.pi_star.forward().end());
    std::swap(f[0], f[1]);
    std::swap(f[2], f[5]);
    const Bijection pi(f);
    VertexSet a;
    for (Vertex v = 0; v < 14; ++v)
      if (rng.bernoulli(0.7)) a.push_back(v);
    const OrbitEdgeStats st = orbit_edge_stats(cs, pi, a, 3);
    CHECK(st.total() == intersection_graph(cs.g, cs.g_bar, pi).edges_within(a));
  }
}

TEST_CASE("edge counts on distinct orbits are uncorrelated") {
  const ModelParams mp{6, 0.5, 0.7};
  const Bijection ps = from_cycles(6, {{0, 1, 2}, {3, 4}});
  const Bijection pi = Bijection::identity(6);
  const OrbitDecomposition d = edge_orbits(ps, pi);
  REQUIRE(d.orbits.size() >= 2);
  const EdgeOrbit& o1 = d.orbits[0];
  const EdgeOrbit& o2 = d.orbits[1];
  auto count = [&](const CorrelatedSample& cs, const EdgeOrbit& o) {
    double c = 0;
    for (const Edge& e : o.edges) c += cs.g.has_edge(e.u, e.v) && cs.g_bar.has_edge(pi(e.u), pi(e.v));
    return c;
  };
  std::vector<double> x, y;
  Rng rng(55);
  for (int r = 0; r < 100000; ++r) {
    const CorrelatedSample cs = sample_correlated_given(mp, ps, rng);
    x.push_back(count(cs, o1));
    y.push_back(count(cs, o2));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  oracle::MeanSe cov;
  for (std::size_t i = 0; i < x.size(); ++i) cov.add((x[i] - mx) * (y[i] - my));
  CHECK(cov.z(0.0) < 4.0);
}

TEST_CASE("census csv export") {
  const OrbitDecomposition d = edge_orbits(from_cycles(4, {{0, 1}, {2, 3}}), Bijection::identity(4));
  std::ostringstream out;
  write_census_csv(out, d.census);
  CHECK(out.str() == "length,kind,special,count\n1,cycle,1,2\n2,cycle,0,2\n");
}
