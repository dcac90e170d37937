#include "corrmatch/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

#include "corrmatch/error.hpp"
#include "corrmatch/parallel.hpp"

namespace corrmatch {

namespace {

long double log_sum_exp(const std::vector<long double>& xs) {
  long double hi = -std::numeric_limits<long double>::infinity();
  for (long double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  long double acc = 0.0L;
  for (long double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

std::uint64_t factorial_u64(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_pair(const Graph& g, const Graph& g_bar) {
  require(g.vertex_count() == g_bar.vertex_count(), ErrorCode::kSizeMismatch,
          "graphs have different vertex counts");
}

// Swapping the images of two vertices changes |E_pi| only through edges of g
// at those vertices.
class TranspositionClimber {
 public:
  TranspositionClimber(const Graph& g, const Graph& g_bar) : g_(g), gb_(g_bar) {}

  std::vector<Vertex> img;

  std::int64_t objective() const {
    std::int64_t c = 0;
    for (const Edge& e : g_.edges()) c += gb_.has_edge(img[e.u], img[e.v]);
    return c;
  }

  std::int64_t swap_gain(Vertex u, Vertex v) const {
    const Vertex pu = img[u];
    const Vertex pv = img[v];
    std::int64_t d = 0;
    for (Vertex w : g_.neighbors(u)) {
      if (w == v) continue;
      d += static_cast<std::int64_t>(gb_.has_edge(pv, img[w])) - gb_.has_edge(pu, img[w]);
    }
    for (Vertex w : g_.neighbors(v)) {
      if (w == u) continue;
      d += static_cast<std::int64_t>(gb_.has_edge(pu, img[w])) - gb_.has_edge(pv, img[w]);
    }
    return d;
  }

  // First-improvement ascent from the current img. Neutral swaps are taken
  // with probability 1/2 while a per-climb allowance of n^2 lasts, so the
  // walk can cross plateaus. Ends after a sweep without a strict gain.
  // Returns false when the budget ran out first.
  bool climb(Rng& rng, std::uint64_t& budget) {
    const auto n = static_cast<Vertex>(img.size());
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), 0U);
    std::uint64_t sideways = static_cast<std::uint64_t>(n) * n;
    bool improved = true;
    while (improved) {
      improved = false;
      std::shuffle(order.begin(), order.end(), rng);
      for (Vertex i = 0; i < n; ++i) {
        for (Vertex j = i + 1; j < n; ++j) {
          if (budget == 0) return false;
          --budget;
          const Vertex u = order[i];
          const Vertex v = order[j];
          const std::int64_t gain = swap_gain(u, v);
          if (gain > 0) {
            std::swap(img[u], img[v]);
            improved = true;
          } else if (gain == 0 && sideways > 0 && (rng() & 1U)) {
            std::swap(img[u], img[v]);
            --sideways;
          }
        }
      }
    }
    return true;
  }

 private:
  const Graph& g_;
  const Graph& gb_;
};

std::vector<Vertex> identity_images(std::size_t n) {
  std::vector<Vertex> v(n);
  std::iota(v.begin(), v.end(), 0U);
  return v;
}

std::vector<Vertex> random_images(std::size_t n, Rng& rng) {
  const Bijection b = Bijection::uniform(n, rng);
  return std::vector<Vertex>(b.forward().begin(), b.forward().end());
}

// Largest-density set with at least `need` vertices along a min-degree
// peeling of all of h's vertices.
std::pair<VertexSet, Density> peel_best_large(const Graph& h, std::size_t need) {
  const std::size_t n = h.vertex_count();
  std::vector<std::size_t> deg(n);
  using Item = std::pair<std::size_t, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (Vertex v = 0; v < n; ++v) {
    deg[v] = h.degree(v);
    heap.push({deg[v], v});
  }
  std::vector<char> alive(n, 1);
  std::vector<Vertex> removal;
  std::uint64_t edges = h.edge_count();
  std::size_t remaining = n;
  Density best{edges, std::max<std::size_t>(n, 1)};
  std::size_t best_removed = 0;
  while (remaining > need && !heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (!alive[v] || d != deg[v]) continue;
    alive[v] = 0;
    removal.push_back(v);
    edges -= deg[v];
    --remaining;
    for (Vertex w : h.neighbors(v)) {
      if (!alive[w]) continue;
      --deg[w];
      heap.push({deg[w], w});
    }
    const Density here{edges, remaining};
    if (here > best) {
      best = here;
      best_removed = removal.size();
    }
  }
  std::vector<char> keep(n, 1);
  for (std::size_t i = 0; i < best_removed; ++i) keep[removal[i]] = 0;
  VertexSet set;
  for (Vertex v = 0; v < n; ++v)
    if (keep[v]) set.push_back(v);
  return {set, best};
}

bool at_least(const Density& d, double ratio) {
  return static_cast<double>(d.edges) >= ratio * static_cast<double>(d.vertices);
}

bool at_most(const Density& d, double ratio) {
  return static_cast<double>(d.edges) <= ratio * static_cast<double>(d.vertices);
}

std::size_t size_needed(double c_lambda, std::size_t n) {
  return std::max<std::size_t>(1, overlap_threshold(c_lambda, n));
}

}  // namespace

double edge_ll(bool x, bool y, double p, double s) {
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "edge_ll: p must lie in (0,1)");
  require(s > 0.0 && s < 1.0, ErrorCode::kInvalidArgument, "edge_ll: s must lie in (0,1)");
  if (x && y) return 1.0 / p;
  if (x != y) return (1.0 - s) / (1.0 - p * s);
  const double ps = p * s;
  return (1.0 - 2.0 * ps + ps * s) / ((1.0 - ps) * (1.0 - ps));
}

LikelihoodConstants LikelihoodConstants::make(double p, double s) {
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "likelihood: p must lie in (0,1)");
  require(s > 0.0 && s < 1.0, ErrorCode::kInvalidArgument, "likelihood: s must lie in (0,1)");
  LikelihoodConstants c;
  c.p = p;
  c.s = s;
  const double ps = p * s;
  const double both_absent = 1.0 - 2.0 * ps + ps * s;
  c.big_p = both_absent / (p * (1.0 - s) * (1.0 - s));
  c.big_q = (1.0 - s) * (1.0 - ps) / both_absent;
  c.big_r = both_absent / ((1.0 - ps) * (1.0 - ps));
  c.log_p = std::log(both_absent) - std::log(p) - 2.0 * std::log1p(-s);
  c.log_q = std::log1p(-s) + std::log1p(-ps) - std::log(both_absent);
  c.log_r = std::log(both_absent) - 2.0 * std::log1p(-ps);
  return c;
}

double log_likelihood_ratio(const Bijection& pi, const Graph& g, const Graph& g_bar,
                            const LikelihoodConstants& consts) {
  check_pair(g, g_bar);
  const std::size_t n = g.vertex_count();
  require(pi.size() == n, ErrorCode::kSizeMismatch, "bijection size differs from the graphs");

  const long double l11 = std::log(static_cast<long double>(edge_ll(true, true, consts.p, consts.s)));
  const long double l10 = std::log(static_cast<long double>(edge_ll(true, false, consts.p, consts.s)));
  const long double l00 = std::log(static_cast<long double>(edge_ll(false, false, consts.p, consts.s)));
  long double product = 0.0L;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      const bool x = g.has_edge(u, v);
      const bool y = g_bar.has_edge(pi(u), pi(v));
      product += x && y ? l11 : (x || y ? l10 : l00);
    }
  }

  const auto common = static_cast<long double>(common_edge_count(g, g_bar, pi));
  const auto total = static_cast<long double>(g.edge_count() + g_bar.edge_count());
  const long double pairs = static_cast<long double>(n) * static_cast<long double>(n - 1) / 2.0L;
  const long double closed = common * consts.log_p + total * consts.log_q + pairs * consts.log_r;

  const long double scale = std::max({1.0L, std::fabs(common * consts.log_p),
                                      std::fabs(total * consts.log_q), std::fabs(pairs * consts.log_r)});
  if (std::fabs(product - closed) > 1e-9L * scale)
    fail(ErrorCode::kInternalConsistency,
         "likelihood ratio: product and closed forms disagree");
  return static_cast<double>(closed);
}

PosteriorTable exact_posterior(const Graph& g, const Graph& g_bar, const LikelihoodConstants& consts,
                               unsigned threads) {
  check_pair(g, g_bar);
  const std::size_t n = g.vertex_count();
  require(n >= 1, ErrorCode::kInvalidArgument, "posterior: empty vertex set");
  if (n > kMaxPosteriorN) fail(ErrorCode::kSizeLimit, "posterior: n must be at most 7");

  const std::size_t total = factorial_u64(n);
  const std::size_t block = total / n;
  PosteriorTable table;
  table.n = n;
  table.perms.resize(total);
  std::vector<long double> logw(total);

  parallel_for(n, threads, [&](std::size_t first) {
    std::vector<Vertex> rest;
    for (Vertex v = 0; v < n; ++v)
      if (v != first) rest.push_back(v);
    std::size_t idx = first * block;
    do {
      std::vector<Vertex> images{static_cast<Vertex>(first)};
      images.insert(images.end(), rest.begin(), rest.end());
      table.perms[idx] = Bijection(std::move(images));
      logw[idx] = log_likelihood_ratio(table.perms[idx], g, g_bar, consts);
      ++idx;
    } while (std::next_permutation(rest.begin(), rest.end()));
  });

  const long double lse = log_sum_exp(logw);
  table.log_evidence_ratio = static_cast<double>(lse - std::lgamma(static_cast<long double>(n) + 1.0L));
  table.log_posterior.resize(total);
  table.prob.resize(total);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < total; ++i) {
    const long double lp = logw[i] - lse;
    table.log_posterior[i] = static_cast<double>(lp);
    table.prob[i] = static_cast<double>(std::exp(lp));
    sum += std::exp(lp);
  }
  table.normalized = std::fabs(sum - 1.0L) <= 1e-9L;
  require(table.normalized, ErrorCode::kInternalConsistency, "posterior does not normalize");
  return table;
}

std::size_t overlap_threshold(double delta, std::size_t n) {
  require(delta >= 0.0 && delta <= 1.0, ErrorCode::kInvalidArgument, "fraction must lie in [0,1]");
  const double t = std::ceil(delta * static_cast<double>(n) - 1e-9);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, t)));
}

double posterior_overlap_mass(const PosteriorTable& table, const Bijection& pi_tilde, double delta) {
  require(table.normalized, ErrorCode::kInvalidArgument, "posterior table is not normalized");
  require(pi_tilde.size() == table.n, ErrorCode::kSizeMismatch, "bijection size differs from table");
  const std::size_t need = overlap_threshold(delta, table.n);
  long double mass = 0.0L;
  for (std::size_t i = 0; i < table.perms.size(); ++i)
    if (overlap(table.perms[i], pi_tilde) >= need) mass += table.prob[i];
  return static_cast<double>(mass);
}

double posterior_w(const PosteriorTable& table, double delta) {
  double best = 0.0;
  for (const Bijection& candidate : table.perms)
    best = std::max(best, posterior_overlap_mass(table, candidate, delta));
  return std::min(best, 1.0);
}

void write_posterior_csv(std::ostream& out, const PosteriorTable& table, const Bijection* truth) {
  out << "permutation,log_posterior,overlap_with_truth\n";
  char buf[32];
  for (std::size_t i = 0; i < table.perms.size(); ++i) {
    const auto images = table.perms[i].forward();
    for (std::size_t k = 0; k < images.size(); ++k) out << (k ? " " : "") << images[k];
    const auto res = std::to_chars(buf, buf + sizeof buf, table.log_posterior[i]);
    out << ',';
    out.write(buf, res.ptr - buf);
    out << ',';
    if (truth) out << overlap(table.perms[i], *truth);
    out << '\n';
  }
}

void EstimatorConfig::validate(double alpha) const {
  require(eta > 0.0, ErrorCode::kConfig, "eta must be positive");
  require(c_lambda_hat > 0.0 && c_lambda_hat <= 1.0, ErrorCode::kConfig,
          "c_lambda_hat must lie in (0,1]");
  require(delta >= 0.0 && delta <= 1.0, ErrorCode::kConfig, "delta must lie in [0,1]");
  require(restarts >= 1, ErrorCode::kConfig, "restarts must be at least 1");
  if (alpha > 0.0 && rho_hat > 1.0 / alpha)
    require(eta < (rho_hat - 1.0 / alpha) / 4.0, ErrorCode::kConfig,
            "eta must be below (rho_hat - 1/alpha) / 4");
}

namespace {

MapResult maximize_common_edges(const Graph& g, const Graph& g_bar, const EstimatorConfig& config) {
  const std::size_t n = g.vertex_count();
  const bool exhaustive = config.strategy == SearchStrategy::kExhaustive ||
                          (config.strategy == SearchStrategy::kAuto && n <= kMaxExhaustiveN);
  if (exhaustive && n > kMaxExhaustiveN)
    fail(ErrorCode::kSizeLimit, "map estimator: exhaustive search needs n <= 9");

  MapResult out;
  TranspositionClimber climber(g, g_bar);
  if (exhaustive) {
    out.exhaustive = true;
    climber.img = identity_images(n);
    std::int64_t best = -1;
    std::vector<Vertex> arg;
    do {
      const std::int64_t c = climber.objective();
      if (c > best) {
        best = c;
        arg = climber.img;
      }
    } while (std::next_permutation(climber.img.begin(), climber.img.end()));
    out.pi = Bijection(std::move(arg));
    out.common_edges = static_cast<std::size_t>(best);
    return out;
  }

  std::uint64_t budget = config.budget;
  std::int64_t best = -1;
  std::vector<Vertex> arg;
  for (std::uint32_t r = 0; r < config.restarts; ++r) {
    Rng rng(config.seed, r);
    climber.img = r == 0 ? identity_images(n) : random_images(n, rng);
    const bool finished = climber.climb(rng, budget);
    const std::int64_t c = climber.objective();
    if (c > best || (c == best && climber.img < arg)) {
      best = c;
      arg = climber.img;
    }
    if (!finished) {
      out.budget_exhausted = true;
      break;
    }
  }
  out.pi = Bijection(std::move(arg));
  out.common_edges = static_cast<std::size_t>(best);
  return out;
}

}  // namespace

MapResult map_estimator(const Graph& g, const Graph& g_bar, const LikelihoodConstants& consts,
                        const EstimatorConfig& config) {
  check_pair(g, g_bar);
  require(consts.big_p > 1.0, ErrorCode::kInvalidArgument,
          "map estimator: P must exceed 1 for the posterior mode to maximize |E_pi|");
  return maximize_common_edges(g, g_bar, config);
}

MapResult map_estimator(const Graph& g, const Graph& g_bar, const ModelParams& params,
                        const EstimatorConfig& config) {
  check_pair(g, g_bar);
  require(params.n == g.vertex_count(), ErrorCode::kSizeMismatch,
          "map estimator: params.n differs from the graph size");
  params.validate();
  if (params.s < 1.0) return map_estimator(g, g_bar, LikelihoodConstants::make(params.p, params.s), config);
  return maximize_common_edges(g, g_bar, config);
}

CandidateCheck reasonable_candidate_check(const Graph& h, const EstimatorConfig& config) {
  CandidateCheck out;
  const DensityResult densest = densest_subgraph_exact(h);
  out.max_density = densest.density;
  out.condition_i = at_most(densest.density, config.rho_hat + config.eta);

  const double floor_ratio = config.rho_hat - config.eta;
  const std::size_t need = size_needed(config.c_lambda_hat, h.vertex_count());
  if (densest.best_subset.size() >= need && at_least(densest.density, floor_ratio)) {
    out.condition_ii = true;
    out.certificate = densest.best_subset;
    out.certificate_density = densest.density;
  } else {
    auto [set, density] = peel_best_large(h, need);
    if (set.size() >= need && at_least(density, floor_ratio)) {
      out.condition_ii = true;
      out.certificate = std::move(set);
      out.certificate_density = density;
    }
  }
  out.accepted = out.condition_i && out.condition_ii;
  return out;
}

CandidateCheck reasonable_candidate_check(const Bijection& pi, const Graph& g, const Graph& g_bar,
                                          const EstimatorConfig& config) {
  check_pair(g, g_bar);
  return reasonable_candidate_check(intersection_graph(g, g_bar, pi), config);
}

CandidateSearchResult reasonable_candidate_search(const Graph& g, const Graph& g_bar,
                                                  const EstimatorConfig& config) {
  check_pair(g, g_bar);
  const std::size_t n = g.vertex_count();
  const bool exhaustive = config.strategy == SearchStrategy::kExhaustive ||
                          (config.strategy == SearchStrategy::kAuto && n <= kMaxExhaustiveN);
  if (exhaustive && n > kMaxExhaustiveN)
    fail(ErrorCode::kSizeLimit, "candidate search: exhaustive scan needs n <= 9");

  CandidateSearchResult out;
  // Condition (ii) needs a set of >= need vertices with at least
  // (rho_hat - eta) * need edges inside, hence that many common edges.
  const double min_edges =
      (config.rho_hat - config.eta) * static_cast<double>(size_needed(config.c_lambda_hat, n));
  TranspositionClimber climber(g, g_bar);
  auto try_current = [&]() -> bool {
    ++out.evaluated;
    if (static_cast<double>(climber.objective()) < min_edges) return false;
    const Bijection pi(climber.img);
    CandidateCheck check = reasonable_candidate_check(pi, g, g_bar, config);
    if (!check.accepted) return false;
    out.pi = pi;
    out.check = std::move(check);
    return true;
  };

  if (exhaustive) {
    climber.img = identity_images(n);
    do {
      if (try_current()) return out;
    } while (std::next_permutation(climber.img.begin(), climber.img.end()));
    return out;
  }

  std::uint64_t budget = config.budget;
  for (std::uint32_t r = 0; r < config.restarts; ++r) {
    Rng rng(config.seed, r);
    climber.img = r == 0 ? identity_images(n) : random_images(n, rng);
    const bool finished = climber.climb(rng, budget);
    if (try_current()) return out;
    if (!finished) break;
  }
  return out;
}

double tv_exact(const ModelParams& params) {
  params.validate();
  const std::size_t n = params.n;
  if (n > 4) fail(ErrorCode::kSizeLimit, "tv_exact: n must be at most 4");
  const std::size_t pairs = n * (n - 1) / 2;
  std::vector<std::vector<std::size_t>> pair_index(n, std::vector<std::size_t>(n, 0));
  for (std::size_t u = 0, k = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v, ++k) pair_index[u][v] = pair_index[v][u] = k;

  // Pair permutation induced by each vertex permutation.
  std::vector<std::vector<std::size_t>> pair_maps;
  std::vector<Vertex> perm = identity_images(n);
  do {
    std::vector<std::size_t> m(pairs);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) m[pair_index[u][v]] = pair_index[perm[u]][perm[v]];
    pair_maps.push_back(std::move(m));
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double ps = params.p * params.s;
  const double joint[2][2] = {{1.0 - 2.0 * ps + ps * params.s, ps * (1.0 - params.s)},
                              {ps * (1.0 - params.s), ps * params.s}};
  const double marginal[2] = {1.0 - ps, ps};
  const std::uint64_t outcomes = std::uint64_t{1} << pairs;
  long double tv = 0.0L;
  for (std::uint64_t a = 0; a < outcomes; ++a) {
    for (std::uint64_t b = 0; b < outcomes; ++b) {
      long double pr = 1.0L;
      for (std::size_t k = 0; k < pairs; ++k) pr *= marginal[a >> k & 1U] * marginal[b >> k & 1U];
      long double q = 0.0L;
      for (const auto& m : pair_maps) {
        long double term = 1.0L;
        for (std::size_t k = 0; k < pairs; ++k) term *= joint[a >> k & 1U][b >> m[k] & 1U];
        q += term;
      }
      q /= static_cast<long double>(pair_maps.size());
      tv += std::fabs(pr - q);
    }
  }
  return static_cast<double>(std::clamp(tv / 2.0L, 0.0L, 1.0L));
}

TvEstimate tv_mc(const ModelParams& params, std::size_t replicates, Seed seed, unsigned threads) {
  params.validate();
  if (params.n > kMaxPosteriorN) fail(ErrorCode::kSizeLimit, "tv_mc: n must be at most 7");
  require(replicates >= 2, ErrorCode::kInvalidArgument, "tv_mc: need at least two replicates");
  const LikelihoodConstants consts = LikelihoodConstants::make(params.p, params.s);
  const std::size_t n = params.n;
  const long double log_nfact = std::lgamma(static_cast<long double>(n) + 1.0L);

  std::vector<double> values(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const auto [g, g_bar] = sample_independent(params, replicate_seed(seed, r));
    std::vector<long double> logs;
    logs.reserve(factorial_u64(n));
    std::vector<Vertex> perm = identity_images(n);
    const long double base = static_cast<long double>(g.edge_count() + g_bar.edge_count()) * consts.log_q +
                             static_cast<long double>(n * (n - 1) / 2) * consts.log_r;
    do {
      std::size_t common = 0;
      for (const Edge& e : g.edges()) common += g_bar.has_edge(perm[e.u], perm[e.v]);
      logs.push_back(base + static_cast<long double>(common) * consts.log_p);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const long double ratio = std::exp(log_sum_exp(logs) - log_nfact);
    values[r] = static_cast<double>(std::max(0.0L, 1.0L - ratio));
  });

  long double sum = 0.0L;
  long double sum_sq = 0.0L;
  for (double v : values) {
    sum += v;
    sum_sq += static_cast<long double>(v) * v;
  }
  const auto k = static_cast<long double>(replicates);
  const long double mean = sum / k;
  const long double var = std::max(0.0L, (sum_sq - k * mean * mean) / (k - 1.0L));
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var / k))};
}

double truncated_mass_f(const Graph& g, const Graph& g_bar, const Embedding& sigma,
                        const LikelihoodConstants& lconsts, const AdmissibilityConstants& aconsts) {
  check_pair(g, g_bar);
  const std::size_t n = g.vertex_count();
  if (n > kMaxPosteriorN) fail(ErrorCode::kSizeLimit, "truncated mass: n must be at most 7");
  sigma.validate(n);

  std::vector<char> used_domain(n, 0);
  std::vector<char> used_image(n, 0);
  for (std::size_t i = 0; i < sigma.domain.size(); ++i) {
    used_domain[sigma.domain[i]] = 1;
    used_image[sigma.images[i]] = 1;
  }
  std::vector<Vertex> free_domain;
  std::vector<Vertex> free_images;
  for (Vertex v = 0; v < n; ++v) {
    if (!used_domain[v]) free_domain.push_back(v);
    if (!used_image[v]) free_images.push_back(v);
  }

  long double total = 0.0L;
  std::vector<Vertex> images(n);
  for (std::size_t i = 0; i < sigma.domain.size(); ++i) images[sigma.domain[i]] = sigma.images[i];
  do {
    for (std::size_t i = 0; i < free_domain.size(); ++i) images[free_domain[i]] = free_images[i];
    const Bijection pi(images);
    const Graph h = intersection_graph(g, g_bar, pi);
    const AdmissibilityReport report = check_admissible(h, aconsts);
    require(!report.any_undecided(), ErrorCode::kInternalConsistency,
            "truncated mass: admissibility check was undecided");
    if (!report.admissible()) continue;
    if (!is_good_set(h, sigma.domain, aconsts.c_big).good) continue;
    total += std::exp(static_cast<long double>(log_likelihood_ratio(pi, g, g_bar, lconsts)));
  } while (std::next_permutation(free_images.begin(), free_images.end()));
  return static_cast<double>(total);
}

double truncated_mass_g(const Graph& g, const Graph& g_bar, const VertexSet& a,
                        const LikelihoodConstants& lconsts, const AdmissibilityConstants& aconsts) {
  check_pair(g, g_bar);
  const std::size_t n = g.vertex_count();
  if (n > kMaxPosteriorN) fail(ErrorCode::kSizeLimit, "truncated mass: n must be at most 7");
  const VertexSet domain = make_vertex_set(a, n);
  double best = 0.0;
  // Injections A -> V̄ as ordered prefixes of permutations; the suffix is
  // kept sorted so each prefix appears once.
  std::vector<Vertex> perm = identity_images(n);
  const std::size_t k = domain.size();
  do {
    Embedding sigma{domain, std::vector<Vertex>(perm.begin(), perm.begin() + static_cast<long>(k))};
    best = std::max(best, truncated_mass_f(g, g_bar, sigma, lconsts, aconsts));
    std::reverse(perm.begin() + static_cast<long>(k), perm.end());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace corrmatch
