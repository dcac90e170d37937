#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "corrmatch/graph.hpp"

namespace corrmatch {

/// Non-negative rational edges / vertices, compared exactly.
struct Density {
  std::uint64_t edges = 0;
  std::uint64_t vertices = 1;

  double value() const { return static_cast<double>(edges) / static_cast<double>(vertices); }

  friend std::strong_ordering operator<=>(const Density& a, const Density& b) {
    const auto lhs = static_cast<unsigned __int128>(a.edges) * b.vertices;
    const auto rhs = static_cast<unsigned __int128>(b.edges) * a.vertices;
    return lhs <=> rhs;
  }
  friend bool operator==(const Density& a, const Density& b) { return (a <=> b) == 0; }
};

struct DensityResult {
  /// The inclusion-maximal densest set (the union of all densest sets).
  VertexSet best_subset;
  Density density;
  std::size_t witness_edges = 0;
};

/// Exact maximum of |E(U)|/|U| over nonempty U. Without edges the result is
/// density 0 on the singleton {0}.
DensityResult densest_subgraph_exact(const Graph& g);

/// Same, with U restricted to subsets of `domain` (edges leaving `domain` are
/// ignored). `domain` must be nonempty.
DensityResult densest_subgraph_exact(const Graph& g, std::span<const Vertex> domain);

/// Exhaustive search over all nonempty subsets; n <= 20. Ties go to the
/// largest subset.
DensityResult densest_subgraph_bruteforce(const Graph& g);

/// Vertices of the k-core (maximal subgraph with minimum degree >= k) of g
/// restricted to `domain`.
VertexSet k_core(const Graph& g, std::span<const Vertex> domain, std::size_t k);

struct RhoEstimate {
  double lambda = 0.0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  /// Maximizer size / n per replicate, in replicate order.
  std::vector<double> size_fractions;
  double size_q05 = 0.0;
  double size_q50 = 0.0;
};

/// Maximum subgraph density of G(n, lambda/n) over `replicates` samples, with
/// replicate r drawn from replicate_seed(seed, r). Results are independent of
/// `threads`.
RhoEstimate estimate_rho(double lambda, std::size_t n, std::size_t replicates, Seed seed,
                         unsigned threads = 1);

struct RhoCurve {
  std::vector<double> lambda_grid;
  /// Raw Monte Carlo means, then the isotonic (non-decreasing) fit.
  std::vector<double> rho_raw;
  std::vector<double> rho_hat;
  std::vector<double> stderr_;
  std::vector<double> size_q05;
  std::vector<double> size_q50;
  std::size_t n_used = 0;
  std::size_t replicates = 0;
};

/// Weighted pool-adjacent-violators fit; weights must be positive.
std::vector<double> isotonic_fit(std::span<const double> values, std::span<const double> weights);

/// Estimates rho on each grid value (sorted ascending, all >= 1) and applies
/// an inverse-variance weighted isotonic fit. Grid point i uses master seed
/// replicate_seed(seed, i).
RhoCurve build_rho_curve(std::span<const double> lambda_grid, std::size_t n,
                         std::size_t replicates, Seed seed, unsigned threads = 1);

struct LambdaStar {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Inverts the monotone piecewise-linear interpolant of rho_hat at `target`.
/// The interval inverts the rho_hat -/+ 2 stderr band (each made monotone).
/// Throws kInvalidArgument when `target` lies outside the band's range
/// (no extrapolation); a target inside the band but beyond rho_hat's range is
/// pinned to the nearest grid end.
LambdaStar rho_inverse(double target, const RhoCurve& curve);

/// Default c_lambda: the 5th percentile of maximizer size / n.
double estimate_c_lambda(const RhoEstimate& estimate);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> values, double q);

/// CSV with header "lambda,n,replicates,rho_hat,stderr,size_q05,size_q50".
void write_rho_curve_csv(std::ostream& out, const RhoCurve& curve);

}  // namespace corrmatch
