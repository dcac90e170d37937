#include <cmath>
#include <sstream>

#include "corrmatch/density.hpp"
#include "corrmatch/error.hpp"
#include "corrmatch/maxflow.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace corrmatch;

namespace {

Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) edges.push_back({u, v});
  return Graph(n, edges);
}

// Independent oracle: the largest densest subset by subset enumeration using
// only has_edge.
std::pair<Density, std::size_t> oracle_densest(const Graph& g) {
  const std::size_t n = g.vertex_count();
  Density best{0, 1};
  std::size_t best_size = 1;
  oracle::for_each_subset(n, [&](std::uint64_t mask) {
    if (mask == 0) return;
    std::uint64_t e = 0;
    std::uint64_t k = 0;
    for (Vertex u = 0; u < n; ++u) {
      if (!(mask >> u & 1U)) continue;
      ++k;
      for (Vertex v = u + 1; v < n; ++v) e += (mask >> v & 1U) && g.has_edge(u, v);
    }
    const Density d{e, k};
    if (d > best || (d == best && k > best_size)) {
      best = d;
      best_size = k;
    }
  });
  return {best, best_size};
}

}  // namespace

TEST_CASE("max flow on a small network") {
  FlowNetwork net(4);
  net.add_arc(0, 1, 3);
  net.add_arc(0, 2, 2);
  net.add_arc(1, 2, 1);
  net.add_arc(1, 3, 2);
  net.add_arc(2, 3, 3);
  CHECK(net.max_flow(0, 3) == 5);
  const auto side = net.source_side();
  CHECK(side[0]);
  CHECK_FALSE(side[3]);
}

TEST_CASE("densest subgraph trivial examples") {
  const Graph triangle(3, {{0, 1}, {1, 2}, {0, 2}});
  const Graph edge(2, {{0, 1}});
  const Graph k4 = complete_graph(4);
  const Graph path(4, {{0, 1}, {1, 2}, {2, 3}});
  for (auto solve : {+[](const Graph& g) { return densest_subgraph_exact(g); },
                     +[](const Graph& g) { return densest_subgraph_bruteforce(g); }}) {
    CHECK(solve(triangle).density == Density{1, 1});
    CHECK(solve(triangle).best_subset == VertexSet{0, 1, 2});
    CHECK(solve(edge).density == Density{1, 2});
    CHECK(solve(k4).density == Density{3, 2});
    CHECK(solve(path).density == Density{3, 4});
    CHECK(solve(path).best_subset == VertexSet{0, 1, 2, 3});
    const DensityResult none = solve(Graph(5));
    CHECK(none.density == Density{0, 1});
    CHECK(none.best_subset.size() == 1);
  }
  CHECK_THROWS_AS(densest_subgraph_bruteforce(Graph(21)), Error);
}

TEST_CASE("exact solver matches subset enumeration on a random corpus") {
  Rng rng(2718);
  int cases = 0;
  for (std::size_t n = 2; n <= 14; ++n) {
    for (double q : {0.1, 0.25, 0.4, 0.6, 0.85}) {
      for (int rep = 0; rep < 4; ++rep) {
        const Graph g = sample_gnp(n, q, rng);
        const DensityResult exact = densest_subgraph_exact(g);
        const auto [best, size] = oracle_densest(g);
        CHECK(exact.density == best);
        if (!g.empty()) CHECK(exact.best_subset.size() == size);
        CHECK(Density{g.edges_within(exact.best_subset), exact.best_subset.size()} == exact.density);
        ++cases;
      }
    }
  }
  CHECK(cases >= 200);
}

TEST_CASE("solver output is attained and relabeling invariant") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = sample_gnp(60, 0.08, rng);
    const DensityResult d = densest_subgraph_exact(g);
    CHECK(g.edges_within(d.best_subset) == d.density.edges);
    CHECK(d.best_subset.size() == d.density.vertices);
    CHECK(d.witness_edges == d.density.edges);
    const Bijection pi = Bijection::uniform(60, rng);
    const DensityResult moved = densest_subgraph_exact(relabel(g, pi));
    CHECK(moved.density == d.density);
    VertexSet image;
    for (Vertex v : d.best_subset) image.push_back(pi(v));
    std::sort(image.begin(), image.end());
    CHECK(moved.best_subset == image);
  }
}

TEST_CASE("domain-restricted solver agrees with solving the induced graph") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = sample_gnp(14, 0.4, rng);
    VertexSet dom;
    for (Vertex v = 0; v < 14; ++v)
      if (rng.bernoulli(0.6)) dom.push_back(v);
    if (dom.empty()) continue;
    const DensityResult d = densest_subgraph_exact(g, dom);
    const auto [best, size] = oracle_densest(g.restricted_to(dom));
    if (best.edges > 0) {
      CHECK(d.density == best);
      CHECK(d.best_subset.size() == size);
    }
    for (Vertex v : d.best_subset) CHECK(std::binary_search(dom.begin(), dom.end(), v));
  }
}

TEST_CASE("k-core") {
  // Triangle with a pendant path.
  const Graph g(6, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}});
  const VertexSet all = all_vertices(6);
  CHECK(k_core(g, all, 2) == VertexSet{0, 1, 2});
  CHECK(k_core(g, all, 1) == VertexSet{0, 1, 2, 3, 4});
  CHECK(k_core(g, all, 3).empty());
}

TEST_CASE("isotonic fit") {
  const std::vector<double> v{1.0, 3.0, 2.0, 4.0};
  const std::vector<double> w{1.0, 1.0, 1.0, 1.0};
  CHECK(isotonic_fit(v, w) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  const std::vector<double> w2{1.0, 3.0, 1.0, 1.0};
  const auto fit = isotonic_fit(v, w2);
  CHECK(fit[1] == doctest::Approx(2.75));
  CHECK(fit[2] == doctest::Approx(2.75));
}

TEST_CASE("quantile") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.25) == doctest::Approx(1.25));
  CHECK_THROWS_AS(quantile({}, 0.5), Error);
}

TEST_CASE("rho estimates at lambda = 1 and the whole-graph bound") {
  const RhoEstimate one = estimate_rho(1.0, 3000, 10, 1);
  CHECK(one.mean >= 0.9);
  CHECK(one.mean <= 1.15);
  for (double lambda : {1.5, 3.0}) {
    const RhoEstimate e = estimate_rho(lambda, 1000, 10, 7);
    CHECK(e.mean >= lambda / 2.0 * 999.0 / 1000.0 - 3.0 * e.stderr_);
    CHECK(e.size_q05 > 0.0);
    CHECK(e.size_q05 <= e.size_q50);
    CHECK(estimate_c_lambda(e) == e.size_q05);
  }
}

TEST_CASE("rho estimates do not depend on the thread count") {
  const RhoEstimate a = estimate_rho(2.0, 300, 6, 11, 1);
  const RhoEstimate b = estimate_rho(2.0, 300, 6, 11, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.size_fractions == b.size_fractions);
}

TEST_CASE("rho curve is strictly increasing on a coarse grid and inverts") {
  const std::vector<double> grid{1.5, 2.0, 4.0, 8.0};
  const RhoCurve curve = build_rho_curve(grid, 3000, 20, 2024);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(curve.rho_raw[i] > curve.rho_raw[i - 1]);
    CHECK(curve.rho_hat[i] >= curve.rho_hat[i - 1]);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(curve.rho_hat[i] >= std::max(1.0, grid[i] / 2.0 * 2999.0 / 3000.0) - 3.0 * curve.stderr_[i]);
  }
  // Inverse at a knot.
  const LambdaStar knot = rho_inverse(curve.rho_hat[2], curve);
  CHECK(knot.estimate == doctest::Approx(4.0));
  CHECK(knot.lower <= knot.estimate);
  CHECK(knot.upper >= knot.estimate);
  // rho(4) >= 2 from the whole graph, so the inverse of 2 is at most 4 up to the band.
  const LambdaStar two = rho_inverse(2.0, curve);
  CHECK(two.lower <= 4.0);
  CHECK(two.estimate <= 4.0 + (two.upper - two.lower));
  CHECK_THROWS_AS(rho_inverse(100.0, curve), Error);
  CHECK_THROWS_AS(rho_inverse(0.5, curve), Error);

  std::ostringstream csv;
  write_rho_curve_csv(csv, curve);
  CHECK(csv.str().rfind("lambda,n,replicates,rho_hat,stderr,size_q05,size_q50\n", 0) == 0);
}

TEST_CASE("rho inverse near one") {
  const std::vector<double> grid{1.0, 1.5, 2.0};
  const RhoCurve curve = build_rho_curve(grid, 2000, 10, 77);
  const LambdaStar at_one = rho_inverse(1.0, curve);
  CHECK(at_one.lower <= 1.0 + 1e-12);
  CHECK(at_one.estimate == doctest::Approx(1.0).epsilon(0.25));
}
