#include "corrmatch/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <variant>

#include "corrmatch/error.hpp"
#include "corrmatch/moments.hpp"
#include "corrmatch/parallel.hpp"
#include "json.hpp"

namespace corrmatch {

using nlohmann::json;

namespace {

constexpr std::uint64_t kRhoStream = 0;
constexpr std::uint64_t kPosteriorStream = 0x5057;
constexpr std::size_t kMomentChunks = 16;

const char* const kEstimatorNames[] = {"pi_star", "map", "candidate_search", "admissibility"};

void config_check(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::kConfig, "config: " + what);
}

// ---------------------------------------------------------------------------
// CSV output

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Cell = std::variant<std::string, double, std::uint64_t, bool>;

// Writes one header, then rows whose arity and cell contents are checked
// before anything reaches the stream.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header)
      : out_(out), header_(std::move(header)) {
    for (std::size_t i = 0; i < header_.size(); ++i) out_ << (i ? "," : "") << header_[i];
    out_ << '\n';
  }

  void row(std::initializer_list<Cell> cells) {
    require(cells.size() == header_.size(), ErrorCode::kInternalConsistency,
            "csv: row arity differs from the header");
    std::string line;
    std::size_t col = 0;
    for (const Cell& c : cells) {
      if (col) line += ',';
      if (const auto* s = std::get_if<std::string>(&c)) {
        require(s->find_first_of(",\n\r\"") == std::string::npos, ErrorCode::kInternalConsistency,
                "csv: text cell contains a delimiter");
        line += *s;
      } else if (const auto* d = std::get_if<double>(&c)) {
        require(std::isfinite(*d), ErrorCode::kInternalConsistency,
                "csv: non-finite value in column " + header_[col]);
        line += format_number(*d);
      } else if (const auto* u = std::get_if<std::uint64_t>(&c)) {
        line += std::to_string(*u);
      } else {
        line += std::get<bool>(c) ? "1" : "0";
      }
      ++col;
    }
    out_ << line << '\n';
  }

 private:
  std::ostream& out_;
  std::vector<std::string> header_;
};

// ---------------------------------------------------------------------------
// JSON reading with unknown-key rejection

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    config_check(j_.is_object(), (path_.empty() ? std::string("top level") : path_) + " must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const char* key, double& out) {
    if (const json* v = take(key)) {
      config_check(v->is_number(), where(key) + " must be a number");
      out = v->get<double>();
    }
  }

  void read(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) out = as_unsigned(*v, where(key));
  }

  void read(const char* key, std::uint32_t& out) {
    std::uint64_t wide = out;
    read(key, wide);
    config_check(wide <= UINT32_MAX, where(key) + " is too large");
    out = static_cast<std::uint32_t>(wide);
  }

  void read(const char* key, int& out) {
    if (const json* v = take(key)) {
      config_check(v->is_number_integer(), where(key) + " must be an integer");
      out = v->get<int>();
    }
  }

  void read(const char* key, bool& out) {
    if (const json* v = take(key)) {
      config_check(v->is_boolean(), where(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }

  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      config_check(v->is_string(), where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  template <class T>
  void read(const char* key, std::optional<T>& out) {
    if (!has(key)) return;
    T value{};
    read(key, value);
    out = value;
  }

  template <class T>
  void read(const char* key, std::vector<T>& out) {
    if (const json* v = take(key)) {
      config_check(v->is_array(), where(key) + " must be an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        const std::string at = where(key) + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, double>) {
          config_check(e.is_number(), at + " must be a number");
          out.push_back(e.get<double>());
        } else if constexpr (std::is_same_v<T, std::string>) {
          config_check(e.is_string(), at + " must be a string");
          out.push_back(e.get<std::string>());
        } else {
          out.push_back(static_cast<T>(as_unsigned(e, at)));
        }
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      config_check(seen_.count(it.key()) > 0, "unknown key " + where(it.key().c_str()));
  }

 private:
  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  static std::uint64_t as_unsigned(const json& v, const std::string& at) {
    config_check(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0),
                 at + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const char* strategy_name(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::kAuto: return "auto";
    case SearchStrategy::kExhaustive: return "exhaustive";
    case SearchStrategy::kHillClimb: return "hill_climb";
  }
  return "auto";
}

SearchStrategy strategy_from_string(const std::string& name) {
  if (name == "auto") return SearchStrategy::kAuto;
  if (name == "exhaustive") return SearchStrategy::kExhaustive;
  if (name == "hill_climb") return SearchStrategy::kHillClimb;
  fail(ErrorCode::kConfig, "config: unknown estimator.strategy '" + name + "'");
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

bool same_estimator(const EstimatorConfig& a, const EstimatorConfig& b) {
  return std::tie(a.eta, a.rho_hat, a.c_lambda_hat, a.delta, a.strategy, a.budget, a.restarts,
                  a.seed) == std::tie(b.eta, b.rho_hat, b.c_lambda_hat, b.delta, b.strategy,
                                      b.budget, b.restarts, b.seed);
}

// ---------------------------------------------------------------------------
// Sweep helpers

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

struct GridPoint {
  double lambda = 0.0;
  double rho_hat = 0.0;
  double c_lambda_hat = 0.0;
  double eta = 0.0;
};

GridPoint grid_point(const ExperimentConfig& cfg, const RhoCurve& curve, double lambda,
                     std::size_t n) {
  GridPoint gp;
  gp.lambda = lambda;
  gp.rho_hat = interpolate(curve.lambda_grid, curve.rho_hat, lambda);
  const double c = interpolate(curve.lambda_grid, curve.size_q05, lambda);
  gp.c_lambda_hat = std::clamp(c, 1.0 / static_cast<double>(n), 1.0);
  const double gap = gp.rho_hat - 1.0 / cfg.alpha;
  gp.eta = gap > 0.0 ? cfg.eta_fraction * gap / 4.0 : cfg.eta_floor;
  return gp;
}

struct SweepTask {
  std::size_t n = 0;
  std::size_t cell = 0;  // index into the (n, lambda) grid
  std::size_t replicate = 0;
};

struct SweepTaskOutput {
  std::vector<SweepRecord> records;
  std::vector<std::string> failures;
};

double fraction(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

SweepTaskOutput run_sweep_task(const ExperimentConfig& cfg, const GridPoint& gp,
                               const SweepTask& task, Seed seed) {
  using Clock = std::chrono::steady_clock;
  SweepTaskOutput out;
  const auto tag = [&](const std::string& estimator) {
    std::ostringstream s;
    s << "n=" << task.n << " lambda=" << format_number(gp.lambda)
      << " replicate=" << task.replicate << " estimator=" << estimator;
    return s.str();
  };

  CorrelatedSample sample;
  try {
    sample = sample_correlated(ModelParams::from_lambda_alpha(task.n, gp.lambda, cfg.alpha), seed);
  } catch (const Error& e) {
    out.failures.push_back(tag("sample") + ": " + e.what());
    return out;
  }

  EstimatorConfig ecfg = cfg.estimator;
  ecfg.eta = gp.eta;
  ecfg.rho_hat = gp.rho_hat;
  ecfg.c_lambda_hat = gp.c_lambda_hat;
  ecfg.seed = seed;
  const std::size_t n = task.n;

  for (const std::string& name : cfg.estimators) {
    const auto start = Clock::now();
    SweepRecord rec;
    rec.lambda = gp.lambda;
    rec.n = n;
    rec.replicate = task.replicate;
    rec.seed = seed;
    rec.estimator = name;
    try {
      if (name == "pi_star") {
        rec.overlap_fraction = 1.0;
        rec.accepted =
            reasonable_candidate_check(sample.pi_star, sample.g, sample.g_bar, ecfg).accepted;
      } else if (name == "map") {
        const MapResult map = map_estimator(sample.g, sample.g_bar, sample.params, ecfg);
        const std::size_t ov = overlap(map.pi, sample.pi_star);
        rec.overlap_fraction = fraction(ov, n);
        rec.accepted = ov >= overlap_threshold(ecfg.delta, n);
      } else if (name == "candidate_search") {
        const CandidateSearchResult found = reasonable_candidate_search(sample.g, sample.g_bar, ecfg);
        rec.accepted = found.pi.has_value();
        rec.overlap_fraction = found.pi ? fraction(overlap(*found.pi, sample.pi_star), n) : 0.0;
      } else {
        // Only defined below the threshold, where the constants exist.
        if (!(gp.rho_hat < 1.0 / cfg.alpha)) continue;
        const AdmissibilityConstants consts =
            cfg.admissibility.apply(default_constants(cfg.alpha, std::max(1.0, gp.rho_hat), n));
        const Graph h = intersection_graph(sample.g, sample.g_bar, sample.pi_star);
        rec.overlap_fraction = 1.0;
        rec.accepted = check_admissible(h, consts).admissible();
      }
    } catch (const Error& e) {
      out.failures.push_back(tag(name) + ": " + e.what());
      continue;
    }
    if (cfg.record_wall_time)
      rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    out.records.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moment verification

struct MomentCase {
  bool cyclic = false;
  std::size_t k = 0;
  double p = 0.0;
  double s = 0.0;
  double theta = 0.0;
};

struct MomentSums {
  long double sum = 0.0L;
  long double sum_sq = 0.0L;
  std::size_t count = 0;
};

// A cycle of length k uses k triples with products G_t Ḡ_{t+1 mod k}; a chain
// of length k uses k+1 triples with free ends.
MomentSums simulate_orbit(const MomentCase& mc, std::size_t samples, Seed seed) {
  Rng rng(seed);
  const std::size_t slots = mc.cyclic ? mc.k : mc.k + 1;
  std::vector<unsigned char> g(slots), gb(slots);
  std::vector<double> weight(mc.k + 1);
  for (std::size_t j = 0; j <= mc.k; ++j) weight[j] = std::exp(mc.theta * static_cast<double>(j));
  MomentSums acc;
  for (std::size_t r = 0; r < samples; ++r) {
    for (std::size_t t = 0; t < slots; ++t) {
      const bool i = rng.uniform() < mc.p;
      const bool j = rng.uniform() < mc.s;
      const bool jb = rng.uniform() < mc.s;
      g[t] = i && j;
      gb[t] = i && jb;
    }
    std::size_t hits = 0;
    for (std::size_t t = 0; t < mc.k; ++t)
      hits += g[t] & gb[mc.cyclic ? (t + 1) % mc.k : t + 1];
    const long double w = weight[hits];
    acc.sum += w;
    acc.sum_sq += w * w;
  }
  acc.count = samples;
  return acc;
}

// ---------------------------------------------------------------------------

json lambda_star_json(const std::optional<LambdaStar>& ls) {
  if (!ls) return nullptr;
  return json{{"estimate", ls->estimate}, {"lower", ls->lower}, {"upper", ls->upper}};
}

std::optional<LambdaStar> try_rho_inverse(double target, const RhoCurve& curve) {
  try {
    return rho_inverse(target, curve);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    return std::nullopt;
  }
}

void validate_curve(const RhoCurve& curve) {
  const std::size_t k = curve.lambda_grid.size();
  const bool shaped = curve.rho_hat.size() == k && curve.stderr_.size() == k &&
                      curve.size_q05.size() == k && curve.size_q50.size() == k;
  require(shaped, ErrorCode::kInternalConsistency, "rho curve: column lengths differ");
  for (std::size_t i = 0; i < k; ++i) {
    const bool ok = std::isfinite(curve.lambda_grid[i]) && std::isfinite(curve.rho_hat[i]) &&
                    curve.stderr_[i] >= 0.0 && curve.size_q05[i] >= 0.0 &&
                    curve.size_q05[i] <= 1.0 && curve.size_q50[i] >= 0.0 &&
                    curve.size_q50[i] <= 1.0;
    require(ok, ErrorCode::kInternalConsistency, "rho curve: row fails the schema");
  }
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kThresholdSweep: return "threshold_sweep";
    case ExperimentKind::kMomentVerification: return "moment_verification";
    case ExperimentKind::kRhoCurve: return "rho_curve";
    case ExperimentKind::kPosteriorStudy: return "posterior_study";
  }
  return "threshold_sweep";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto kind : {ExperimentKind::kThresholdSweep, ExperimentKind::kMomentVerification,
                    ExperimentKind::kRhoCurve, ExperimentKind::kPosteriorStudy}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorCode::kConfig, "config: unknown experiment '" + name + "'");
}

AdmissibilityConstants AdmissibilityOverrides::apply(AdmissibilityConstants base) const {
  if (xi) base.xi = *xi;
  if (beta) base.beta = *beta;
  if (c_big) base.c_big = *c_big;
  if (delta1) base.delta1 = *delta1;
  if (degree_cap) base.degree_cap = *degree_cap;
  if (small_set_cap) base.small_set_cap = *small_set_cap;
  if (tiny_component_cap) base.tiny_component_cap = *tiny_component_cap;
  if (k_good) base.k_good = *k_good;
  if (cycle_len_cap) base.cycle_len_cap = *cycle_len_cap;
  if (search_budget) base.search_budget = *search_budget;
  return base;
}

void ExperimentConfig::validate() const {
  config_check(schema_version == kConfigSchemaVersion,
               "unsupported schema_version " + std::to_string(schema_version));
  config_check(replicates >= 1, "replicates must be at least 1");
  config_check(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  config_check(p > 0.0 && p < 1.0, "p must lie in (0,1)");
  config_check(s > 0.0 && s <= 1.0, "s must lie in (0,1]");
  config_check(!n_grid.empty(), "n_grid must be nonempty");
  for (std::size_t n : n_grid) config_check(n >= 3, "every n must be at least 3");
  for (double l : lambda_grid) config_check(l > 0.0 && std::isfinite(l), "lambda values must be positive");
  config_check(auto_grid_points >= 2, "auto_grid_points must be at least 2");

  config_check(!k_values.empty() && !p_grid.empty() && !s_grid.empty() && !theta_grid.empty(),
               "moment grids must be nonempty");
  for (std::size_t k : k_values) config_check(k >= 1, "k values must be at least 1");
  for (double v : p_grid) config_check(v > 0.0 && v < 1.0, "p_grid values must lie in (0,1)");
  for (double v : s_grid) config_check(v > 0.0 && v <= 1.0, "s_grid values must lie in (0,1]");
  for (double v : theta_grid) config_check(v >= 0.0 && std::isfinite(v), "theta values must be >= 0");
  config_check(samples >= 2 * kMomentChunks, "samples must be at least 32");
  config_check(z_threshold > 0.0, "z_threshold must be positive");

  config_check(!rho_grid.empty(), "rho_grid must be nonempty");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    config_check(rho_grid[i] >= 1.0, "rho_grid values must be at least 1");
    if (i) config_check(rho_grid[i] > rho_grid[i - 1], "rho_grid must be strictly increasing");
  }
  config_check(rho_n == 0 || rho_n >= 3, "rho_n must be 0 or at least 3");
  config_check(rho_replicates >= 2, "rho_replicates must be at least 2");

  config_check(!estimators.empty(), "estimators must be nonempty");
  std::set<std::string> names;
  for (const std::string& e : estimators) {
    config_check(std::find(std::begin(kEstimatorNames), std::end(kEstimatorNames), e) !=
                     std::end(kEstimatorNames),
                 "unknown estimator '" + e + "'");
    config_check(names.insert(e).second, "estimator '" + e + "' listed twice");
  }
  config_check(eta_fraction > 0.0 && eta_fraction < 1.0, "eta_fraction must lie in (0,1)");
  config_check(eta_floor > 0.0, "eta_floor must be positive");
  config_check(delta >= 0.0 && delta <= 1.0, "delta must lie in [0,1]");
  config_check(estimator.restarts >= 1, "estimator.restarts must be at least 1");
  config_check(estimator.budget >= 1, "estimator.budget must be at least 1");
  config_check(estimator.delta >= 0.0 && estimator.delta <= 1.0, "estimator.delta must lie in [0,1]");

  if (kind == ExperimentKind::kPosteriorStudy) {
    for (std::size_t n : n_grid)
      config_check(n <= kMaxPosteriorN, "posterior studies need every n <= 7");
  }
  if (admissibility.xi) config_check(*admissibility.xi >= 0.0, "admissibility.xi must be >= 0");
  if (admissibility.c_big) config_check(*admissibility.c_big >= 1, "admissibility.c_big must be >= 1");
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return std::tie(schema_version, kind, seed, replicates, output, alpha, p, s, n_grid, lambda_grid,
                  auto_grid_points, k_values, p_grid, s_grid, theta_grid, samples, z_threshold,
                  rho_grid, rho_n, rho_replicates, estimators, eta_fraction, eta_floor,
                  record_wall_time, delta, admissibility) ==
             std::tie(o.schema_version, o.kind, o.seed, o.replicates, o.output, o.alpha, o.p, o.s,
                      o.n_grid, o.lambda_grid, o.auto_grid_points, o.k_values, o.p_grid, o.s_grid,
                      o.theta_grid, o.samples, o.z_threshold, o.rho_grid, o.rho_n,
                      o.rho_replicates, o.estimators, o.eta_fraction, o.eta_floor,
                      o.record_wall_time, o.delta, o.admissibility) &&
         same_estimator(estimator, o.estimator);
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["experiment"] = to_string(c.kind);
  j["seed"] = c.seed;
  j["replicates"] = c.replicates;
  j["output"] = c.output;
  j["model"] = {{"alpha", c.alpha}, {"p", c.p}, {"s", c.s}};
  j["n_grid"] = c.n_grid;
  j["lambda_grid"] = c.lambda_grid;
  j["auto_grid_points"] = c.auto_grid_points;
  j["moments"] = {{"k_values", c.k_values}, {"p_grid", c.p_grid},   {"s_grid", c.s_grid},
                  {"theta_grid", c.theta_grid}, {"samples", c.samples}, {"z_threshold", c.z_threshold}};
  j["rho_curve"] = {{"grid", c.rho_grid}, {"n", c.rho_n}, {"replicates", c.rho_replicates}};
  j["sweep"] = {{"estimators", c.estimators},
                {"eta_fraction", c.eta_fraction},
                {"eta_floor", c.eta_floor},
                {"record_wall_time", c.record_wall_time}};
  j["posterior"] = {{"delta", c.delta}};
  const EstimatorConfig& e = c.estimator;
  j["estimator"] = {{"eta", e.eta},         {"rho_hat", e.rho_hat},
                    {"c_lambda_hat", e.c_lambda_hat}, {"delta", e.delta},
                    {"strategy", strategy_name(e.strategy)}, {"budget", e.budget},
                    {"restarts", e.restarts}, {"seed", e.seed}};
  json adm = json::object();
  const AdmissibilityOverrides& a = c.admissibility;
  put_optional(adm, "xi", a.xi);
  put_optional(adm, "beta", a.beta);
  put_optional(adm, "c_big", a.c_big);
  put_optional(adm, "delta1", a.delta1);
  put_optional(adm, "degree_cap", a.degree_cap);
  put_optional(adm, "small_set_cap", a.small_set_cap);
  put_optional(adm, "tiny_component_cap", a.tiny_component_cap);
  put_optional(adm, "k_good", a.k_good);
  put_optional(adm, "cycle_len_cap", a.cycle_len_cap);
  put_optional(adm, "search_budget", a.search_budget);
  j["admissibility"] = adm;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfig, std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader top(j, "");
  config_check(top.has("schema_version"), "schema_version is required");
  top.read("schema_version", c.schema_version);
  config_check(c.schema_version == kConfigSchemaVersion,
               "unsupported schema_version " + std::to_string(c.schema_version));
  std::string kind = to_string(c.kind);
  top.read("experiment", kind);
  c.kind = experiment_kind_from_string(kind);
  top.read("seed", c.seed);
  std::uint64_t u = c.replicates;
  top.read("replicates", u);
  c.replicates = u;
  top.read("output", c.output);
  if (const json* m = top.take("model")) {
    ObjectReader r(*m, "model");
    r.read("alpha", c.alpha);
    r.read("p", c.p);
    r.read("s", c.s);
    r.finish();
  }
  top.read("n_grid", c.n_grid);
  top.read("lambda_grid", c.lambda_grid);
  u = c.auto_grid_points;
  top.read("auto_grid_points", u);
  c.auto_grid_points = u;
  if (const json* m = top.take("moments")) {
    ObjectReader r(*m, "moments");
    r.read("k_values", c.k_values);
    r.read("p_grid", c.p_grid);
    r.read("s_grid", c.s_grid);
    r.read("theta_grid", c.theta_grid);
    u = c.samples;
    r.read("samples", u);
    c.samples = u;
    r.read("z_threshold", c.z_threshold);
    r.finish();
  }
  if (const json* m = top.take("rho_curve")) {
    ObjectReader r(*m, "rho_curve");
    r.read("grid", c.rho_grid);
    u = c.rho_n;
    r.read("n", u);
    c.rho_n = u;
    u = c.rho_replicates;
    r.read("replicates", u);
    c.rho_replicates = u;
    r.finish();
  }
  if (const json* m = top.take("sweep")) {
    ObjectReader r(*m, "sweep");
    r.read("estimators", c.estimators);
    r.read("eta_fraction", c.eta_fraction);
    r.read("eta_floor", c.eta_floor);
    r.read("record_wall_time", c.record_wall_time);
    r.finish();
  }
  if (const json* m = top.take("posterior")) {
    ObjectReader r(*m, "posterior");
    r.read("delta", c.delta);
    r.finish();
  }
  if (const json* m = top.take("estimator")) {
    ObjectReader r(*m, "estimator");
    EstimatorConfig& e = c.estimator;
    r.read("eta", e.eta);
    r.read("rho_hat", e.rho_hat);
    r.read("c_lambda_hat", e.c_lambda_hat);
    r.read("delta", e.delta);
    std::string strategy = strategy_name(e.strategy);
    r.read("strategy", strategy);
    e.strategy = strategy_from_string(strategy);
    r.read("budget", e.budget);
    r.read("restarts", e.restarts);
    r.read("seed", e.seed);
    r.finish();
  }
  if (const json* m = top.take("admissibility")) {
    ObjectReader r(*m, "admissibility");
    AdmissibilityOverrides& a = c.admissibility;
    r.read("xi", a.xi);
    r.read("beta", a.beta);
    r.read("c_big", a.c_big);
    r.read("delta1", a.delta1);
    r.read("degree_cap", a.degree_cap);
    r.read("small_set_cap", a.small_set_cap);
    r.read("tiny_component_cap", a.tiny_component_cap);
    r.read("k_good", a.k_good);
    r.read("cycle_len_cap", a.cycle_len_cap);
    r.read("search_budget", a.search_budget);
    r.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

SweepResult run_threshold_sweep(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  SweepResult result;
  const std::size_t rho_n = cfg.rho_n ? cfg.rho_n : cfg.n_grid.front();
  result.curve = build_rho_curve(cfg.rho_grid, rho_n, cfg.rho_replicates,
                                 replicate_seed(cfg.seed, kRhoStream), threads);
  result.lambda_star = try_rho_inverse(1.0 / cfg.alpha, result.curve);

  if (cfg.lambda_grid.empty()) {
    config_check(result.lambda_star.has_value(),
                 "the rho curve does not bracket 1/alpha; extend rho_curve.grid or give lambda_grid");
    const double lo = std::max(1.2, result.lambda_star->estimate - 1.0);
    const double hi = result.lambda_star->estimate + 1.5;
    for (std::size_t i = 0; i < cfg.auto_grid_points; ++i)
      result.lambda_grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                            static_cast<double>(cfg.auto_grid_points - 1));
  } else {
    result.lambda_grid = cfg.lambda_grid;
  }
  for (double l : result.lambda_grid) {
    config_check(l >= cfg.rho_grid.front() && l <= cfg.rho_grid.back(),
                 "lambda " + format_number(l) + " lies outside the rho curve grid");
  }

  const std::size_t n_lambda = result.lambda_grid.size();
  std::vector<GridPoint> points;
  std::vector<SweepTask> tasks;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    for (std::size_t li = 0; li < n_lambda; ++li) {
      const std::size_t cell = ni * n_lambda + li;
      points.push_back(grid_point(cfg, result.curve, result.lambda_grid[li], cfg.n_grid[ni]));
      for (std::size_t r = 0; r < cfg.replicates; ++r) tasks.push_back({cfg.n_grid[ni], cell, r});
    }
  }

  std::vector<SweepTaskOutput> outputs(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const SweepTask& t = tasks[i];
    const Seed seed = replicate_seed(replicate_seed(cfg.seed, t.cell + 1), t.replicate);
    outputs[i] = run_sweep_task(cfg, points[t.cell], t, seed);
  });

  for (std::size_t c = 0; c < points.size(); ++c) {
    for (const std::string& name : cfg.estimators) {
      SweepCell cell;
      cell.lambda = points[c].lambda;
      cell.n = cfg.n_grid[c / n_lambda];
      cell.estimator = name;
      cell.rho_hat = points[c].rho_hat;
      cell.c_lambda_hat = points[c].c_lambda_hat;
      cell.eta = points[c].eta;
      result.cells.push_back(cell);
    }
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (SweepRecord& rec : outputs[i].records) {
      const std::size_t e = static_cast<std::size_t>(
          std::find(cfg.estimators.begin(), cfg.estimators.end(), rec.estimator) -
          cfg.estimators.begin());
      SweepCell& cell = result.cells[tasks[i].cell * cfg.estimators.size() + e];
      ++cell.trials;
      cell.accepted += rec.accepted ? 1 : 0;
      cell.mean_overlap += rec.overlap_fraction;
      result.records.push_back(std::move(rec));
    }
    for (std::string& f : outputs[i].failures) result.failures.push_back(std::move(f));
  }
  for (SweepCell& cell : result.cells) {
    if (cell.trials) cell.mean_overlap /= static_cast<double>(cell.trials);
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  CsvWriter w(out, {"lambda", "n", "replicate", "seed", "estimator", "overlap_fraction", "accepted",
                    "wall_time"});
  for (const SweepRecord& r : result.records) {
    require(r.overlap_fraction >= 0.0 && r.overlap_fraction <= 1.0, ErrorCode::kInternalConsistency,
            "sweep record: overlap fraction outside [0,1]");
    require(r.wall_time >= 0.0, ErrorCode::kInternalConsistency, "sweep record: negative wall time");
    w.row({r.lambda, std::uint64_t{r.n}, std::uint64_t{r.replicate}, std::uint64_t{r.seed},
           r.estimator, r.overlap_fraction, r.accepted, r.wall_time});
  }
}

bool MomentVerification::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const MomentCheckRow& r) { return r.pass; });
}

MomentVerification run_moment_verification(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  std::vector<MomentCase> cases;
  for (bool cyclic : {true, false})
    for (std::size_t k : cfg.k_values)
      for (double p : cfg.p_grid)
        for (double s : cfg.s_grid)
          for (double theta : cfg.theta_grid) cases.push_back({cyclic, k, p, s, theta});

  std::vector<MomentSums> chunks(cases.size() * kMomentChunks);
  parallel_for(chunks.size(), threads, [&](std::size_t i) {
    const std::size_t c = i / kMomentChunks, part = i % kMomentChunks;
    const std::size_t count = cfg.samples / kMomentChunks + (part < cfg.samples % kMomentChunks);
    chunks[i] = simulate_orbit(cases[c], count, replicate_seed(replicate_seed(cfg.seed, c), part));
  });

  MomentVerification out;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const MomentCase& mc = cases[c];
    MomentSums total;
    for (std::size_t part = 0; part < kMomentChunks; ++part) {
      const MomentSums& m = chunks[c * kMomentChunks + part];
      total.sum += m.sum;
      total.sum_sq += m.sum_sq;
      total.count += m.count;
    }
    const long double cnt = static_cast<long double>(total.count);
    const long double mean = total.sum / cnt;
    const long double var = std::max(0.0L, (total.sum_sq - cnt * mean * mean) / (cnt - 1));

    MomentCheckRow row;
    row.orbit_class = mc.cyclic ? "cycle" : "chain";
    row.k = mc.k;
    row.p = mc.p;
    row.s = mc.s;
    row.theta = mc.theta;
    if (mc.cyclic) {
      const CharRoots roots = char_roots(mc.theta, mc.p, mc.s);
      const double kd = static_cast<double>(mc.k);
      row.closed_form = std::pow(roots.mu1, kd) + std::pow(roots.mu2, kd);
      const double combo = std::exp(cycle_log_moment_by_recurrence(mc.k, mc.theta, mc.p, mc.s));
      row.recurrence_rel_error = std::fabs(row.closed_form - combo) / row.closed_form;
    } else {
      row.closed_form = chain_moment(mc.k, mc.theta, mc.p, mc.s);
    }
    row.mc_mean = static_cast<double>(mean);
    row.stderr_ = static_cast<double>(std::sqrt(var / cnt));
    const double diff = row.mc_mean - row.closed_form;
    if (row.stderr_ > 0.0) {
      row.z = diff / row.stderr_;
    } else {
      row.z = std::fabs(diff) <= 1e-12 * row.closed_form ? 0.0 : (diff > 0 ? 1e300 : -1e300);
    }
    row.pass = std::fabs(row.z) <= cfg.z_threshold && row.recurrence_rel_error <= 1e-9;
    out.rows.push_back(row);
  }
  return out;
}

void write_moment_csv(std::ostream& out, const MomentVerification& result) {
  CsvWriter w(out, {"class", "k", "p", "s", "theta", "closed_form", "mc_mean", "stderr", "z",
                    "recurrence_rel_error", "pass"});
  for (const MomentCheckRow& r : result.rows) {
    require(r.closed_form > 0.0 && r.stderr_ >= 0.0, ErrorCode::kInternalConsistency,
            "moment row: closed form must be positive and stderr non-negative");
    w.row({r.orbit_class, std::uint64_t{r.k}, r.p, r.s, r.theta, r.closed_form, r.mc_mean,
           r.stderr_, r.z, r.recurrence_rel_error, r.pass});
  }
}

RhoCurve run_rho_curve(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::size_t n = cfg.rho_n ? cfg.rho_n : cfg.n_grid.front();
  RhoCurve curve = build_rho_curve(cfg.rho_grid, n, cfg.rho_replicates,
                                   replicate_seed(cfg.seed, kRhoStream), threads);
  validate_curve(curve);
  return curve;
}

PosteriorStudy run_posterior_study(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  for (std::size_t n : cfg.n_grid) {
    require(n <= kMaxPosteriorN, ErrorCode::kSizeLimit, "posterior study: n must be at most 7");
  }
  const std::size_t reps = cfg.replicates;
  PosteriorStudy out;
  out.rows.resize(cfg.n_grid.size() * reps);
  parallel_for(out.rows.size(), threads, [&](std::size_t i) {
    const std::size_t ni = i / reps, r = i % reps;
    const std::size_t n = cfg.n_grid[ni];
    const Seed seed = replicate_seed(replicate_seed(cfg.seed, kPosteriorStream + ni), r);
    const CorrelatedSample sample = sample_correlated(ModelParams{n, cfg.p, cfg.s}, seed);
    const PosteriorTable table =
        exact_posterior(sample.g, sample.g_bar, LikelihoodConstants::make(cfg.p, cfg.s), 1);
    const auto truth = std::lower_bound(table.perms.begin(), table.perms.end(), sample.pi_star);
    require(truth != table.perms.end() && *truth == sample.pi_star, ErrorCode::kInternalConsistency,
            "posterior study: truth missing from the enumeration");
    const std::size_t mode = static_cast<std::size_t>(
        std::max_element(table.prob.begin(), table.prob.end()) - table.prob.begin());

    PosteriorStudyRow& row = out.rows[i];
    row.n = n;
    row.replicate = r;
    row.seed = seed;
    row.mass_at_truth = table.prob[static_cast<std::size_t>(truth - table.perms.begin())];
    row.w_delta = posterior_w(table, cfg.delta);
    row.map_overlap_fraction = fraction(overlap(table.perms[mode], sample.pi_star), n);
    row.log_evidence_ratio = table.log_evidence_ratio;
  });

  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    double mean = 0.0;
    for (std::size_t r = 0; r < reps; ++r) mean += out.rows[ni * reps + r].mass_at_truth;
    mean /= static_cast<double>(reps);
    out.mass_ratio_to_uniform.push_back(mean * std::tgamma(double(cfg.n_grid[ni]) + 1.0));
  }
  return out;
}

void write_posterior_study_csv(std::ostream& out, const PosteriorStudy& result) {
  CsvWriter w(out, {"n", "replicate", "seed", "mass_at_truth", "w_delta", "map_overlap_fraction",
                    "log_evidence_ratio"});
  for (const PosteriorStudyRow& r : result.rows) {
    const bool ok = r.mass_at_truth >= 0.0 && r.mass_at_truth <= 1.0 + 1e-12 && r.w_delta >= 0.0 &&
                    r.w_delta <= 1.0 + 1e-12 && r.map_overlap_fraction >= 0.0 &&
                    r.map_overlap_fraction <= 1.0;
    require(ok, ErrorCode::kInternalConsistency, "posterior row: probability outside [0,1]");
    w.row({std::uint64_t{r.n}, std::uint64_t{r.replicate}, std::uint64_t{r.seed}, r.mass_at_truth,
           r.w_delta, r.map_overlap_fraction, r.log_evidence_ratio});
  }
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& csv, unsigned threads) {
  cfg.validate();
  ExperimentOutcome outcome;
  json summary;
  summary["experiment"] = to_string(cfg.kind);
  switch (cfg.kind) {
    case ExperimentKind::kThresholdSweep: {
      const SweepResult r = run_threshold_sweep(cfg, threads);
      write_sweep_csv(csv, r);
      summary["lambda_star"] = lambda_star_json(r.lambda_star);
      json cells = json::array();
      for (const SweepCell& c : r.cells) {
        cells.push_back({{"lambda", c.lambda},
                         {"n", c.n},
                         {"estimator", c.estimator},
                         {"rho_hat", c.rho_hat},
                         {"c_lambda_hat", c.c_lambda_hat},
                         {"eta", c.eta},
                         {"trials", c.trials},
                         {"accepted", c.accepted},
                         {"acceptance_rate", c.acceptance_rate()},
                         {"mean_overlap", c.mean_overlap}});
      }
      summary["cells"] = cells;
      summary["failures"] = r.failures;
      break;
    }
    case ExperimentKind::kMomentVerification: {
      const MomentVerification r = run_moment_verification(cfg, threads);
      write_moment_csv(csv, r);
      json failing = json::array();
      double worst = 0.0;
      for (const MomentCheckRow& row : r.rows) {
        worst = std::max(worst, std::fabs(row.z));
        if (!row.pass)
          failing.push_back({{"class", row.orbit_class}, {"k", row.k}, {"p", row.p},
                             {"s", row.s}, {"theta", row.theta}, {"z", row.z}});
      }
      summary["rows"] = r.rows.size();
      summary["max_abs_z"] = worst;
      summary["failing"] = failing;
      if (!r.all_pass()) outcome.exit_code = kExitStatisticalFailure;
      break;
    }
    case ExperimentKind::kRhoCurve: {
      const RhoCurve curve = run_rho_curve(cfg, threads);
      write_rho_curve_csv(csv, curve);
      summary["n"] = curve.n_used;
      summary["lambda_star"] = lambda_star_json(try_rho_inverse(1.0 / cfg.alpha, curve));
      break;
    }
    case ExperimentKind::kPosteriorStudy: {
      const PosteriorStudy r = run_posterior_study(cfg, threads);
      write_posterior_study_csv(csv, r);
      summary["mass_ratio_to_uniform"] = r.mass_ratio_to_uniform;
      for (double ratio : r.mass_ratio_to_uniform)
        if (!(ratio > 1.0)) outcome.exit_code = kExitStatisticalFailure;
      break;
    }
  }
  summary["exit_code"] = outcome.exit_code;
  outcome.summary_json = summary.dump();
  return outcome;
}

}  // namespace corrmatch
