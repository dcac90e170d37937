#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "corrmatch/admissibility.hpp"
#include "corrmatch/density.hpp"
#include "corrmatch/graph.hpp"
#include "corrmatch/inference.hpp"

namespace corrmatch {

inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind { kThresholdSweep, kMomentVerification, kRhoCurve, kPosteriorStudy };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Optional replacements for individual admissibility constants. Anything left
/// unset keeps the value from default_constants.
struct AdmissibilityOverrides {
  std::optional<double> xi;
  std::optional<double> beta;
  std::optional<std::uint64_t> c_big;
  std::optional<double> delta1;
  std::optional<std::uint64_t> degree_cap;
  std::optional<std::uint64_t> small_set_cap;
  std::optional<std::uint64_t> tiny_component_cap;
  std::optional<std::uint64_t> k_good;
  std::optional<std::uint64_t> cycle_len_cap;
  std::optional<std::uint64_t> search_budget;

  AdmissibilityConstants apply(AdmissibilityConstants base) const;
  bool operator==(const AdmissibilityOverrides&) const = default;
};

/// Every field has a default, so a config file only lists what it changes.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  ExperimentKind kind = ExperimentKind::kThresholdSweep;
  Seed seed = 1;
  std::size_t replicates = 20;
  /// Empty means the caller's stream (stdout for the CLI).
  std::string output;

  // Model. Posterior studies use (p, s) directly; sweeps derive them from
  // (lambda, alpha) per grid point.
  double alpha = 0.5;
  double p = 0.4;
  double s = 0.8;
  std::vector<std::size_t> n_grid{2000};
  /// Empty: sweeps build [max(1.2, lambda* - 1), lambda* + 1.5] around the
  /// estimated threshold with `auto_grid_points` points.
  std::vector<double> lambda_grid;
  std::size_t auto_grid_points = 6;

  // Moment verification grid.
  std::vector<std::size_t> k_values{1, 2, 3, 4, 6};
  std::vector<double> p_grid{0.25, 0.4};
  std::vector<double> s_grid{0.5, 0.8};
  std::vector<double> theta_grid{0.5, 1.2};
  std::size_t samples = 1'000'000;
  double z_threshold = 4.0;

  // Rho curve, standalone or as the first stage of a sweep.
  std::vector<double> rho_grid{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0};
  /// 0 means "use n_grid.front()".
  std::size_t rho_n = 0;
  std::size_t rho_replicates = 20;

  // Sweep estimators: any of "pi_star", "map", "candidate_search",
  // "admissibility".
  std::vector<std::string> estimators{"pi_star"};
  /// Above the threshold eta = eta_fraction * (rho_hat - 1/alpha) / 4;
  /// at or below it eta = eta_floor. The small default floor continues the
  /// gap rule, which tends to 0 as rho_hat approaches 1/alpha from above.
  double eta_fraction = 0.9;
  double eta_floor = 1e-6;
  bool record_wall_time = false;

  /// Posterior-study overlap fraction for W.
  double delta = 0.5;

  /// strategy, budget, restarts and delta are taken from here; eta, rho_hat
  /// and c_lambda_hat are filled per grid point by the sweep.
  EstimatorConfig estimator;
  AdmissibilityOverrides admissibility;

  /// Throws kConfig on the first violated invariant.
  void validate() const;

  bool operator==(const ExperimentConfig& other) const;
};

/// JSON text; parsing rejects unknown keys, wrong types and unsupported
/// schema versions with kConfig, then validates.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct SweepRecord {
  double lambda = 0.0;
  std::size_t n = 0;
  std::size_t replicate = 0;
  Seed seed = 0;
  std::string estimator;
  double overlap_fraction = 0.0;
  bool accepted = false;
  double wall_time = 0.0;
};

struct SweepCell {
  double lambda = 0.0;
  std::size_t n = 0;
  std::string estimator;
  double rho_hat = 0.0;
  double c_lambda_hat = 0.0;
  double eta = 0.0;
  std::size_t trials = 0;
  std::size_t accepted = 0;
  double mean_overlap = 0.0;

  double acceptance_rate() const { return trials == 0 ? 0.0 : double(accepted) / double(trials); }
};

struct SweepResult {
  RhoCurve curve;
  std::optional<LambdaStar> lambda_star;
  std::vector<double> lambda_grid;
  std::vector<SweepRecord> records;
  /// One cell per (n, lambda, estimator), in grid order.
  std::vector<SweepCell> cells;
  /// "n=.. lambda=.. replicate=..: message" for replicates that threw.
  std::vector<std::string> failures;
};

SweepResult run_threshold_sweep(const ExperimentConfig& config, unsigned threads = 1);

/// Header "lambda,n,replicate,seed,estimator,overlap_fraction,accepted,wall_time".
void write_sweep_csv(std::ostream& out, const SweepResult& result);

struct MomentCheckRow {
  std::string orbit_class;  // "cycle" or "chain"
  std::size_t k = 0;
  double p = 0.0;
  double s = 0.0;
  double theta = 0.0;
  double closed_form = 0.0;
  double mc_mean = 0.0;
  double stderr_ = 0.0;
  double z = 0.0;
  /// Cycle rows: |closed form - a/b/c combination| / closed form. Chain rows: 0.
  double recurrence_rel_error = 0.0;
  bool pass = false;
};

struct MomentVerification {
  std::vector<MomentCheckRow> rows;
  bool all_pass() const;
};

/// Direct simulation of one orbit as independent (I, J, J̄) triples, against
/// the closed forms. Chunked by replicate_seed so results ignore `threads`.
MomentVerification run_moment_verification(const ExperimentConfig& config, unsigned threads = 1);

/// Header "class,k,p,s,theta,closed_form,mc_mean,stderr,z,recurrence_rel_error,pass".
void write_moment_csv(std::ostream& out, const MomentVerification& result);

/// Rho curve on config.rho_grid at rho_n (or n_grid.front()).
RhoCurve run_rho_curve(const ExperimentConfig& config, unsigned threads = 1);

struct PosteriorStudyRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  Seed seed = 0;
  double mass_at_truth = 0.0;
  double w_delta = 0.0;
  double map_overlap_fraction = 0.0;
  double log_evidence_ratio = 0.0;
};

struct PosteriorStudy {
  std::vector<PosteriorStudyRow> rows;
  /// Mean mass at truth divided by 1/n!, per entry of n_grid.
  std::vector<double> mass_ratio_to_uniform;
};

PosteriorStudy run_posterior_study(const ExperimentConfig& config, unsigned threads = 1);

/// Header "n,replicate,seed,mass_at_truth,w_delta,map_overlap_fraction,log_evidence_ratio".
void write_posterior_study_csv(std::ostream& out, const PosteriorStudy& result);

/// Process exit codes shared by the CLI and the C API.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitStatisticalFailure = 2;
inline constexpr int kExitConfigError = 3;

struct ExperimentOutcome {
  int exit_code = kExitSuccess;
  /// Compact JSON digest of the run (acceptance rates, failing rows, ...).
  std::string summary_json;
};

/// Runs config.kind, writing its CSV to `csv`. Statistical checks: moment
/// verification fails on any failing row; a posterior study fails when the
/// mean mass at truth does not beat the uniform baseline. Library errors
/// propagate as exceptions.
ExperimentOutcome run_experiment(const ExperimentConfig& config, std::ostream& csv,
                                 unsigned threads = 1);

}  // namespace corrmatch
