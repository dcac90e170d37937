#include "corrmatch/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrmatch/error.hpp"

namespace corrmatch {

namespace {

void check_moment_args(double theta, double p, double s) {
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "moments: p must lie in (0, 1)");
  require(s > 0.0 && s <= 1.0, ErrorCode::kInvalidArgument, "moments: s must lie in (0, 1]");
  require(std::isfinite(theta) && theta >= 0.0 && theta < 700.0, ErrorCode::kInvalidArgument,
          "moments: theta must lie in [0, 700)");
}

double log_sum3(double la, double wa, double lb, double wb, double lc, double wc) {
  const double m = std::max({la, lb, lc});
  double acc = 0.0;
  if (wa > 0.0) acc += wa * std::exp(la - m);
  if (wb > 0.0) acc += wb * std::exp(lb - m);
  if (wc > 0.0) acc += wc * std::exp(lc - m);
  return m + std::log(acc);
}

}  // namespace

double ChainRecurrence::a() const { return std::exp(log_a); }
double ChainRecurrence::b() const { return std::exp(log_b); }
double ChainRecurrence::c() const { return std::exp(log_c); }

ChainRecurrence chain_recurrence(std::size_t m, double theta, double p, double s) {
  check_moment_args(theta, p, s);
  require(m >= 1, ErrorCode::kInvalidArgument, "chain_recurrence: m must be >= 1");
  const double ps = p * s;
  const double et = std::exp(theta);
  const double off = 1.0 - 2.0 * ps + ps * s;
  double a = 1.0;
  double b = et;
  double c = 1.0;
  double log_scale = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    const double na = ps * c + (1.0 - ps) * a;
    const double nc = ps * et * (s * c + (1.0 - s) * a) + ps * (1.0 - s) * c + off * a;
    const double nb = ps * et * (s * b + (1.0 - s) * c) + ps * (1.0 - s) * b + off * c;
    const double scale = std::max({na, nb, nc});
    a = na / scale;
    b = nb / scale;
    c = nc / scale;
    log_scale += std::log(scale);
  }
  return {log_scale + std::log(a), log_scale + std::log(b), log_scale + std::log(c)};
}

CharRoots char_roots(double theta, double p, double s) {
  check_moment_args(theta, p, s);
  const double nu = std::expm1(theta);
  const double ps2 = p * s * s;
  const double trace = 1.0 + ps2 * nu;
  const double det = (ps2 - p * ps2) * nu;
  const double disc = trace * trace - 4.0 * det;
  const double mu1 = 0.5 * (trace + std::sqrt(std::max(disc, 0.0)));
  return {mu1, det / mu1};
}

MomentCoefficients moment_coefficients(double theta, double p, double s) {
  const CharRoots roots = char_roots(theta, p, s);
  MomentCoefficients out;
  out.theta = theta;
  out.nu = std::expm1(theta);
  out.mu1 = roots.mu1;
  out.mu2 = roots.mu2;
  const double p2s2 = p * p * s * s;
  const double a1 = 1.0 + p2s2 * out.nu;
  const double a2 = 1.0 + 2.0 * p2s2 * out.nu + p * p2s2 * s * s * out.nu * out.nu;
  const double gap = out.mu1 - out.mu2;
  out.c1 = (a2 - out.mu2 * a1) / (out.mu1 * gap);
  out.c2 = out.mu2 > 0.0 ? (out.mu1 * a1 - a2) / (out.mu2 * gap) : 0.0;
  return out;
}

double cycle_log_moment_by_recurrence(std::size_t k, double theta, double p, double s) {
  require(k >= 1, ErrorCode::kInvalidArgument, "cycle moment: k must be >= 1");
  const ChainRecurrence r = chain_recurrence(k, theta, p, s);
  const double ps = p * s;
  return log_sum3(r.log_a, 1.0 - 2.0 * ps + ps * s, r.log_b, ps * s, r.log_c,
                  2.0 * ps * (1.0 - s));
}

double cycle_log_moment(std::size_t k, double theta, double p, double s) {
  require(k >= 1, ErrorCode::kInvalidArgument, "cycle moment: k must be >= 1");
  const CharRoots roots = char_roots(theta, p, s);
  const double kk = static_cast<double>(k);
  const double closed = kk * std::log(roots.mu1) + std::log1p(std::pow(roots.mu2 / roots.mu1, kk));
  const double by_recurrence = cycle_log_moment_by_recurrence(k, theta, p, s);
  // Both are logs of values >= 1; compare on the linear scale.
  const double rel = std::fabs(std::expm1(by_recurrence - closed));
  require(rel <= 1e-9, ErrorCode::kInternalConsistency,
          "cycle moment: closed form and recurrence disagree");
  return closed;
}

double cycle_moment(std::size_t k, double theta, double p, double s) {
  return std::exp(cycle_log_moment(k, theta, p, s));
}

double chain_log_moment(std::size_t k, double theta, double p, double s) {
  require(k >= 1, ErrorCode::kInvalidArgument, "chain moment: k must be >= 1");
  const ChainRecurrence r = chain_recurrence(k, theta, p, s);
  const double ps = p * s;
  return log_sum3(r.log_a, (1.0 - ps) * (1.0 - ps), r.log_b, ps * ps, r.log_c,
                  2.0 * ps * (1.0 - ps));
}

double chain_moment(std::size_t k, double theta, double p, double s) {
  return std::exp(chain_log_moment(k, theta, p, s));
}

TailRateParams TailRateParams::make(double alpha, std::size_t n_cutoff) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument,
          "tail rates: alpha must lie in (0, 1]");
  require(n_cutoff >= 1, ErrorCode::kInvalidArgument, "tail rates: cutoff must be >= 1");
  TailRateParams out;
  out.alpha = alpha;
  out.n_cutoff = n_cutoff;
  out.alpha_k.assign(n_cutoff + 2, 0.0);
  for (std::size_t k = 1; k <= n_cutoff; ++k) {
    out.alpha_k[k] = static_cast<double>(k - 1) / static_cast<double>(k);
  }
  const double nn = static_cast<double>(n_cutoff);
  out.alpha_k[n_cutoff + 1] = std::min(alpha, nn / (nn + 1.0));
  return out;
}

TailBound markov_tail_bound(TailClass cls, std::size_t k, double x, const OrbitCensus& census,
                            const ModelParams& params, const TailRateParams& rates) {
  params.validate();
  require(rates.alpha_k.size() == rates.n_cutoff + 2, ErrorCode::kInvalidArgument,
          "tail bound: malformed rate parameters");
  const double log_n = std::log(static_cast<double>(params.n));
  const double log_lambda = std::log(params.lambda());
  const std::size_t big_n = rates.n_cutoff;

  TailBound out;
  switch (cls) {
    case TailClass::kSpecial:
      out.theta = log_n - std::log(log_n);
      break;
    case TailClass::kShortCycle:
      require(k >= 1 && k <= big_n, ErrorCode::kInvalidArgument,
              "tail bound: cycle length outside [1, N]");
      out.theta = rates.alpha_k[k] * log_n - log_lambda;
      break;
    case TailClass::kLong:
      out.theta = rates.alpha >= 1.0 ? rates.alpha_k[big_n + 1] * log_n - log_lambda
                                     : rates.alpha * log_n;
      break;
  }
  if (!(out.theta > 0.0)) {
    out.theta = 0.0;
    out.log_bound = 0.0;
    out.bound = 1.0;
    return out;
  }

  const double theta = out.theta;
  double log_moment = 0.0;
  switch (cls) {
    case TailClass::kSpecial:
      for (const auto& [len, count] : census.special_cycles) {
        log_moment += static_cast<double>(count) * cycle_log_moment(len, theta, params.p, params.s);
      }
      break;
    case TailClass::kShortCycle:
      if (auto it = census.plain_cycles.find(k); it != census.plain_cycles.end()) {
        log_moment = static_cast<double>(it->second) * cycle_log_moment(k, theta, params.p, params.s);
      }
      break;
    case TailClass::kLong:
      for (const auto& [len, count] : census.plain_cycles) {
        if (len <= big_n) continue;
        log_moment += static_cast<double>(count) * cycle_log_moment(len, theta, params.p, params.s);
      }
      for (const auto& [len, count] : census.chains) {
        log_moment += static_cast<double>(count) * chain_log_moment(len, theta, params.p, params.s);
      }
      break;
  }
  out.log_bound = log_moment - theta * x;
  out.bound = out.log_bound >= 0.0 ? 1.0 : std::exp(out.log_bound);
  return out;
}

namespace {

std::vector<double> objective_costs(std::size_t big_n, double alpha) {
  const TailRateParams rates = TailRateParams::make(alpha, big_n);
  std::vector<double> cost(big_n + 2);
  cost[0] = 1.0;
  for (std::size_t k = 1; k <= big_n + 1; ++k) cost[k] = rates.alpha_k[k];
  return cost;
}

double objective_constant(std::size_t T, std::span<const std::size_t> cycle_counts) {
  const double cycles = std::accumulate(cycle_counts.begin(), cycle_counts.end(), 0.0,
                                        [](double acc, std::size_t v) { return acc + double(v); });
  return cycles - static_cast<double>(T);
}

}  // namespace

double combinatorial_objective(std::size_t T, std::span<const std::size_t> cycle_counts,
                               double alpha, const PolytopePoint& point) {
  const std::size_t big_n = cycle_counts.size();
  require(point.x.size() == big_n + 2, ErrorCode::kSizeMismatch,
          "combinatorial_objective: point must have N + 2 coordinates");
  const std::vector<double> cost = objective_costs(big_n, alpha);
  double value = objective_constant(T, cycle_counts);
  for (std::size_t i = 0; i < cost.size(); ++i) value += cost[i] * point.x[i];
  return value;
}

MinimumResult combinatorial_minimum(std::size_t T, std::span<const std::size_t> cycle_counts,
                                    double rho, double eta, double alpha) {
  const std::size_t big_n = cycle_counts.size();
  require(big_n >= 1, ErrorCode::kInvalidArgument, "combinatorial_minimum: N must be >= 1");
  require(eta >= 0.0 && rho > eta, ErrorCode::kInvalidArgument,
          "combinatorial_minimum: need 0 <= eta < rho");
  std::size_t covered = 0;
  for (std::size_t k = 1; k <= big_n; ++k) covered += k * cycle_counts[k - 1];
  require(covered <= T, ErrorCode::kInvalidArgument,
          "combinatorial_minimum: sum k n_k exceeds T");

  const double t = static_cast<double>(T);
  const double box = rho * t;
  std::vector<double> prefix_cap(big_n + 1, 0.0);
  double weighted = 0.0;
  for (std::size_t m = 1; m <= big_n; ++m) {
    weighted += static_cast<double>(m * cycle_counts[m - 1]);
    prefix_cap[m] = (rho + eta) * weighted;
  }

  // The constraint family (boxes plus nested prefix caps) is laminar, so the
  // feasible region for the coordinates is a polymatroid and filling the
  // cheapest coordinates first reaches the minimum.
  const std::vector<double> cost = objective_costs(big_n, alpha);
  std::vector<std::size_t> order(big_n + 2);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return cost[i] < cost[j]; });

  std::vector<double> x(big_n + 2, 0.0);
  double need = (rho - eta) * t;
  for (std::size_t i : order) {
    if (need <= 0.0) break;
    double room = box;
    if (i >= 1 && i <= big_n) {
      double prefix = 0.0;
      for (std::size_t m = 1; m <= big_n; ++m) {
        prefix += x[m];
        if (m >= i) room = std::min(room, prefix_cap[m] - prefix);
      }
    }
    const double take = std::clamp(std::min(room, need), 0.0, box);
    x[i] = take;
    need -= take;
  }
  require(need <= 1e-9 * std::max(1.0, t), ErrorCode::kInfeasible,
          "combinatorial_minimum: constraints cannot supply the required mass");

  MinimumResult out;
  out.minimizer.x = std::move(x);
  out.value = combinatorial_objective(T, cycle_counts, alpha, out.minimizer);
  return out;
}

double minimum_rate_bound(double rho, double eta, double alpha, std::size_t n_cutoff,
                          double c_lambda, double delta) {
  require(c_lambda > 0.0, ErrorCode::kInvalidArgument, "minimum_rate_bound: c_lambda must be > 0");
  const TailRateParams rates = TailRateParams::make(alpha, n_cutoff);
  const double slack = (rho + eta) * delta / c_lambda;
  const double first = rates.alpha_k[n_cutoff + 1] * (rho - eta) - 1.0 - slack;
  const double second = (rho - 4.0 * eta - 1.0) / 2.0 - slack;
  return std::min(first, second);
}

double permutation_count_log_bound(std::size_t n, std::size_t T,
                                   std::span<const std::size_t> cycle_counts) {
  require(T <= n, ErrorCode::kInvalidArgument, "permutation count: T exceeds n");
  std::size_t covered = 0;
  double out = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(n - T) + 1.0);
  for (std::size_t k = 1; k <= cycle_counts.size(); ++k) {
    const double nk = static_cast<double>(cycle_counts[k - 1]);
    covered += k * cycle_counts[k - 1];
    out -= nk * std::log(static_cast<double>(k)) + std::lgamma(nk + 1.0);
  }
  require(covered <= T, ErrorCode::kInvalidArgument, "permutation count: sum k n_k exceeds T");
  return out;
}

}  // namespace corrmatch
