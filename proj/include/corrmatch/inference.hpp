#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "corrmatch/admissibility.hpp"
#include "corrmatch/density.hpp"
#include "corrmatch/graph.hpp"

namespace corrmatch {

/// Ratio between the joint law of (G_e, Ḡ_{Pi(e)}) under the correlated model
/// and the product of its marginals. Requires p in (0,1), s in (0,1).
double edge_ll(bool x, bool y, double p, double s);

struct LikelihoodConstants {
  double p = 0.0;
  double s = 0.0;
  double big_p = 0.0;
  double big_q = 0.0;
  double big_r = 0.0;
  double log_p = 0.0;
  double log_q = 0.0;
  double log_r = 0.0;

  /// Throws kInvalidArgument unless p in (0,1) and s in (0,1).
  static LikelihoodConstants make(double p, double s);
};

/// log(n! Q[pi, G, Ḡ] / P[G, Ḡ]). Evaluated as a sum of log edge_ll over all
/// vertex pairs and as |E_pi| log P + (|E| + |Ē|) log Q + C(n,2) log R; the
/// two must agree to 1e-9 (relative to the largest term) or
/// kInternalConsistency is thrown. Returns the closed form.
double log_likelihood_ratio(const Bijection& pi, const Graph& g, const Graph& g_bar,
                            const LikelihoodConstants& consts);

/// Exact posterior of pi* given (G, Ḡ), one entry per permutation of [0, n)
/// in lexicographic order.
struct PosteriorTable {
  std::size_t n = 0;
  std::vector<Bijection> perms;
  std::vector<double> log_posterior;
  std::vector<double> prob;
  /// log(Q[G, Ḡ] / P[G, Ḡ]).
  double log_evidence_ratio = 0.0;
  bool normalized = false;
};

inline constexpr std::size_t kMaxPosteriorN = 7;

/// n <= 7, else kSizeLimit. Work is split by the image of vertex 0.
PosteriorTable exact_posterior(const Graph& g, const Graph& g_bar, const LikelihoodConstants& consts,
                               unsigned threads = 1);

/// ceil(delta * n) with a small tolerance for representation error.
std::size_t overlap_threshold(double delta, std::size_t n);

/// Posterior mass of {pi : overlap(pi, pi_tilde) >= ceil(delta n)}.
double posterior_overlap_mass(const PosteriorTable& table, const Bijection& pi_tilde, double delta);

/// Maximum of posterior_overlap_mass over every pi_tilde (exhaustive).
double posterior_w(const PosteriorTable& table, double delta);

/// Dump with header "permutation,log_posterior,overlap_with_truth"; the
/// permutation is written in one-line notation separated by spaces. Without
/// a truth the last column is empty.
void write_posterior_csv(std::ostream& out, const PosteriorTable& table,
                         const Bijection* truth = nullptr);

enum class SearchStrategy { kAuto, kExhaustive, kHillClimb };

struct EstimatorConfig {
  double eta = 0.05;
  double rho_hat = 1.0;
  double c_lambda_hat = 0.1;
  double delta = 0.1;
  SearchStrategy strategy = SearchStrategy::kAuto;
  /// Move evaluations allowed to a hill climb (all restarts together).
  std::uint64_t budget = 1'000'000;
  std::uint32_t restarts = 8;
  Seed seed = 1;

  /// eta > 0, c_lambda_hat in (0,1], delta in [0,1]; when rho_hat > 1/alpha
  /// also eta < (rho_hat - 1/alpha) / 4.
  void validate(double alpha) const;
};

inline constexpr std::size_t kMaxExhaustiveN = 9;

struct MapResult {
  Bijection pi;
  std::size_t common_edges = 0;
  bool exhaustive = false;
  /// Hill climbing stopped on the budget before finishing its restarts.
  bool budget_exhausted = false;
};

/// Maximizes |E_pi| (the posterior mode when P > 1, which is asserted).
/// Exhaustive for n <= 9 under kAuto, lexicographically smallest maximizer;
/// otherwise hill climbing over transpositions.
MapResult map_estimator(const Graph& g, const Graph& g_bar, const LikelihoodConstants& consts,
                        const EstimatorConfig& config);

/// Same search from model parameters. Accepts s = 1, where P is infinite and
/// the mode still maximizes |E_pi|.
MapResult map_estimator(const Graph& g, const Graph& g_bar, const ModelParams& params,
                        const EstimatorConfig& config);

struct CandidateCheck {
  bool accepted = false;
  bool condition_i = false;
  bool condition_ii = false;
  Density max_density;
  /// Set of size >= ceil(c_lambda n) with density >= rho_hat - eta, when
  /// condition (ii) was certified.
  VertexSet certificate;
  Density certificate_density;
};

/// Reasonable-candidate test on H_pi: (i) max density <= rho_hat + eta;
/// (ii) certified by the global densest set or by the best set of size
/// >= ceil(c_lambda n) along a min-degree peeling of V.
CandidateCheck reasonable_candidate_check(const Bijection& pi, const Graph& g, const Graph& g_bar,
                                          const EstimatorConfig& config);

/// Same test on a given intersection graph.
CandidateCheck reasonable_candidate_check(const Graph& h, const EstimatorConfig& config);

struct CandidateSearchResult {
  std::optional<Bijection> pi;
  CandidateCheck check;
  std::uint64_t evaluated = 0;
};

/// Lexicographic scan of all bijections for n <= 9 (kAuto); otherwise hill
/// climbing on |E_pi| with the candidate test at every local optimum.
CandidateSearchResult reasonable_candidate_search(const Graph& g, const Graph& g_bar,
                                                  const EstimatorConfig& config);

/// 1/2 sum |P - Q| over all graph pairs; n <= 4.
double tv_exact(const ModelParams& params);

struct TvEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo mean of (1 - Q/P)_+ over pairs drawn from the independent law,
/// with Q/P evaluated exactly by enumeration; n <= 7.
TvEstimate tv_mc(const ModelParams& params, std::size_t replicates, Seed seed,
                 unsigned threads = 1);

/// Sum over bijections pi extending sigma of exp(log_likelihood_ratio) times
/// 1{H_pi admissible} times 1{A good in H_pi}. sigma.domain is A. n <= 7.
double truncated_mass_f(const Graph& g, const Graph& g_bar, const Embedding& sigma,
                        const LikelihoodConstants& lconsts, const AdmissibilityConstants& aconsts);

/// Maximum of truncated_mass_f over all injections sigma of A into V̄.
double truncated_mass_g(const Graph& g, const Graph& g_bar, const VertexSet& a,
                        const LikelihoodConstants& lconsts, const AdmissibilityConstants& aconsts);

}  // namespace corrmatch
