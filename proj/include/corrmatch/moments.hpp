#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "corrmatch/graph.hpp"
#include "corrmatch/orbits.hpp"

namespace corrmatch {

// Exponential moments E exp(theta * |E_O|) of the number of intersection-graph
// edges on one edge orbit O under the correlated law, given pi*. Every routine
// takes the per-pair retention probability p in (0,1), the subsampling
// probability s in (0,1], and theta >= 0.

/// Boundary-conditioned moments of theta * sum_{i<m} G_i Ḡ_{i+1} for a run of
/// m terms whose outer indicators (G_0, Ḡ_m) are fixed to (0,0) for a, (1,1)
/// for b and (0,1) for c. Values are kept as logarithms so long runs with
/// large theta do not overflow.
struct ChainRecurrence {
  double log_a = 0.0;
  double log_b = 0.0;
  double log_c = 0.0;

  double a() const;
  double b() const;
  double c() const;
};

ChainRecurrence chain_recurrence(std::size_t m, double theta, double p, double s);

/// Roots of x^2 - (1 + p s^2 nu) x + (p s^2 - p^2 s^2) nu with nu = e^theta - 1,
/// ordered mu1 >= mu2 >= 0.
struct CharRoots {
  double mu1 = 1.0;
  double mu2 = 0.0;
};

CharRoots char_roots(double theta, double p, double s);

/// Closed-form data for the chain moments: chain_moment(k) = c1 mu1^k + c2 mu2^k.
struct MomentCoefficients {
  double theta = 0.0;
  double nu = 0.0;
  double mu1 = 1.0;
  double mu2 = 0.0;
  double c1 = 1.0;
  double c2 = 0.0;
};

MomentCoefficients moment_coefficients(double theta, double p, double s);

/// Cycle orbit of length k: mu1^k + mu2^k. Also evaluates the weighted a/b/c
/// combination and throws kInternalConsistency if the two disagree beyond a
/// relative 1e-9.
double cycle_moment(std::size_t k, double theta, double p, double s);
double cycle_log_moment(std::size_t k, double theta, double p, double s);

/// The a/b/c combination for a k-cycle, returned as a logarithm. Exposed so
/// tests can compare it against the closed form directly.
double cycle_log_moment_by_recurrence(std::size_t k, double theta, double p, double s);

/// Chain orbit of length k, from the a/b/c combination.
double chain_moment(std::size_t k, double theta, double p, double s);
double chain_log_moment(std::size_t k, double theta, double p, double s);

enum class TailClass { kSpecial, kShortCycle, kLong };

/// Rates alpha_k = (k-1)/k for k <= N and alpha_{N+1} = min(alpha, N/(N+1)).
struct TailRateParams {
  double alpha = 0.0;
  std::size_t n_cutoff = 0;
  /// alpha_k[k] for 1 <= k <= n_cutoff + 1; index 0 unused.
  std::vector<double> alpha_k;

  static TailRateParams make(double alpha, std::size_t n_cutoff);
};

struct TailBound {
  double theta = 0.0;
  double log_bound = 0.0;
  /// min(1, exp(log_bound)).
  double bound = 1.0;
};

/// Markov bound on Q[E_class >= x | pi*] for the orbit census of a fixed pi,
/// using the explicit product of orbit moments and the standard theta for
/// each class: log n - log log n (special), alpha_k log n - log lambda
/// (k-cycles, 1 <= k <= N), alpha log n (long, alpha < 1) or
/// alpha_{N+1} log n - log lambda (long, alpha = 1). A theta that comes out
/// non-positive is clamped to 0, which yields the trivial bound 1.
TailBound markov_tail_bound(TailClass cls, std::size_t k, double x, const OrbitCensus& census,
                            const ModelParams& params, const TailRateParams& rates);

/// Point (x_0, ..., x_{N+1}).
struct PolytopePoint {
  std::vector<double> x;
};

struct MinimumResult {
  double value = 0.0;
  PolytopePoint minimizer;
};

/// min sum n_k - T + x_0 + sum_{k=1}^{N+1} alpha_k x_k over real points with
/// 0 <= x_i <= rho T, sum x_i >= (rho - eta) T, and
/// sum_{k<=m} x_k <= (rho + eta) sum_{k<=m} k n_k for m = 1..N.
/// `cycle_counts[k-1]` holds n_k, so N = cycle_counts.size(). Throws
/// kInvalidArgument unless sum k n_k <= T, and kInfeasible if no point meets
/// the mass requirement.
MinimumResult combinatorial_minimum(std::size_t T, std::span<const std::size_t> cycle_counts,
                                    double rho, double eta, double alpha);

/// Objective of a given point; used to check minimizers.
double combinatorial_objective(std::size_t T, std::span<const std::size_t> cycle_counts,
                               double alpha, const PolytopePoint& point);

/// Upper end of the admissible range for delta_0 in the linear lower bound
/// M >= delta_0 T, given overlap fraction delta and size fraction c_lambda.
double minimum_rate_bound(double rho, double eta, double alpha, std::size_t n_cutoff,
                          double c_lambda, double delta);

/// log of n (n-1) ... (n-T+1) / prod_k k^{n_k} n_k!.
double permutation_count_log_bound(std::size_t n, std::size_t T,
                                   std::span<const std::size_t> cycle_counts);

}  // namespace corrmatch
