#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corrmatch/graph.hpp"

namespace corrmatch {

/// Constants of the good event together with the integer caps that stand in
/// for log n, n/log n, log log n and n^{delta1 k}. Every field may be
/// overridden after default_constants().
struct AdmissibilityConstants {
  double alpha = 0.0;
  double rho_hat = 0.0;
  std::size_t n = 0;

  double xi = 0.0;
  double zeta = 0.0;
  double beta = 0.0;
  std::uint64_t c_big = 1;
  double delta1 = 0.0;
  /// K = floor(n^beta).
  std::uint64_t k_good = 0;

  /// Condition (iii) requires max degree < degree_cap.
  std::uint64_t degree_cap = 0;
  std::uint64_t small_set_cap = 0;
  std::uint64_t tiny_component_cap = 0;
  std::uint64_t cycle_len_cap = 12;

  /// Node budget per enumeration (conditions ii, iv, v). Exhausting it makes
  /// the condition undecided.
  std::uint64_t search_budget = 20'000'000;

  /// ceil(n^{delta1 k}), saturating at UINT64_MAX.
  std::uint64_t cycle_cap(std::uint64_t k) const;
};

/// Fills the constants from (alpha, rho_hat, n):
///   xi = (rho_hat + 1/alpha) / 2, which must be < 1/alpha;
///   zeta = largest point 1 + 2^-j (j = 1..30) with zeta * alpha < 1;
///   beta = midpoint of (max(1 - alpha, (1 + zeta(alpha-1)) / (2 - zeta)), 1);
///   C = smallest integer with alpha (xi + 1/C) < 1;
///   delta1 = min(1 - alpha xi, beta / C) / 2;
///   caps = ceil(ln n), floor(n / ln n), ceil(ln ln n).
/// Throws kInfeasible when no constants exist (rho_hat >= 1/alpha) and
/// kInvalidArgument on alpha outside (0,1), rho_hat < 1 or n < 3.
AdmissibilityConstants default_constants(double alpha, double rho_hat, std::size_t n);

/// Checks the five inequalities on the constants; throws kInternalConsistency
/// naming the first one that fails.
void validate_constants(const AdmissibilityConstants& c);

enum class CheckStatus { kPass, kFail, kUndecided };

const char* to_string(CheckStatus s);

struct ConditionResult {
  CheckStatus status = CheckStatus::kPass;
  /// Violating vertex set (i, ii, iv), the offending vertex (iii), or one
  /// offending cycle in order (v).
  std::vector<Vertex> witness;
  /// Condition (v): the length whose count exceeds its cap, and that count.
  std::uint64_t cycle_length = 0;
  std::uint64_t cycle_count = 0;
  std::uint64_t explored = 0;
};

struct AdmissibilityReport {
  /// Indexed 0..4 for conditions (i)..(v).
  ConditionResult conditions[5];
  /// Condition (v): number of simple cycles of each length 3..cycle_len_cap
  /// (entry k - 3), complete only when the condition is decided.
  std::vector<std::uint64_t> cycle_counts;

  bool admissible() const;
  bool any_undecided() const;
};

AdmissibilityReport check_admissible(const Graph& h, const AdmissibilityConstants& consts);

/// Re-evaluates the violated inequality of condition `index` on its witness.
/// True iff the witness demonstrates the failure.
bool witness_violates(const Graph& h, const AdmissibilityConstants& consts, int index,
                      const ConditionResult& result);

/// One JSON object with keys "i".."v"; each is {"status", "witness", ...}.
std::string report_to_json(const AdmissibilityReport& report);

/// Number of simple cycles of each length 3..max_len (entry k - 3). Returns
/// false if more than `budget` search nodes were needed.
bool count_simple_cycles(const Graph& h, std::size_t max_len, std::uint64_t budget,
                         std::vector<std::uint64_t>& counts);

/// Vertices lying on some cycle of length <= max_len.
std::vector<char> on_short_cycle(const Graph& h, std::size_t max_len);

struct GoodSetCheck {
  bool good = true;
  /// Two members at distance <= 2C+2, or one member (second == first) within
  /// distance C of a cycle of length <= C.
  Vertex first = 0;
  Vertex second = 0;
  std::size_t distance = 0;
};

/// Good-set predicate: members pairwise at distance > 2C+2 and each at
/// distance > C from every cycle of length <= C.
GoodSetCheck is_good_set(const Graph& h, std::span<const Vertex> a, std::uint64_t c_big);

struct GoodSetResult {
  VertexSet set;
  std::size_t requested = 0;
  bool shortfall = false;
};

/// Greedy construction in ascending id order after discarding vertices near
/// short cycles. Stops at k_target members.
GoodSetResult find_good_set(const Graph& h, std::span<const Vertex> b, std::size_t k_target,
                            std::uint64_t c_big);

}  // namespace corrmatch
