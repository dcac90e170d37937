#include "corrmatch/corrmatch.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "corrmatch/admissibility.hpp"
#include "corrmatch/density.hpp"
#include "corrmatch/error.hpp"
#include "corrmatch/graph.hpp"
#include "corrmatch/harness.hpp"
#include "corrmatch/inference.hpp"
#include "corrmatch/orbits.hpp"
#include "corrmatch/parallel.hpp"
#include "json.hpp"

struct cm_graph {
  corrmatch::Graph value;
};

struct cm_bijection {
  corrmatch::Bijection value;
};

struct cm_config {
  corrmatch::ExperimentConfig value;
};

namespace {

using namespace corrmatch;
using nlohmann::json;

thread_local std::string g_last_error;

cm_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return CM_ERR_INVALID_ARGUMENT;
    case ErrorCode::kSizeMismatch: return CM_ERR_SIZE_MISMATCH;
    case ErrorCode::kSizeLimit: return CM_ERR_SIZE_LIMIT;
    case ErrorCode::kInfeasible: return CM_ERR_INFEASIBLE;
    case ErrorCode::kInternalConsistency: return CM_ERR_INTERNAL;
    case ErrorCode::kConfig: return CM_ERR_CONFIG;
    case ErrorCode::kIo: return CM_ERR_IO;
  }
  return CM_ERR_UNKNOWN;
}

// Runs body, translating every exception into a status and a stored message.
template <class Body>
cm_status guarded(Body&& body) {
  try {
    body();
    return CM_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CM_ERR_UNKNOWN;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CM_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return CM_ERR_UNKNOWN;
  }
}

void need(const void* p, const char* name) {
  if (!p) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::ifstream open_in(const char* path) {
  need(path, "path");
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, std::string("cannot open ") + path);
  return in;
}

std::ofstream open_out(const char* path) {
  need(path, "path");
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, std::string("cannot write ") + path);
  return out;
}

void finish_write(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) fail(ErrorCode::kIo, std::string("write failed for ") + path);
}

// Reuses the config parser so estimator and override objects accept exactly
// the keys a config file does.
ExperimentConfig config_with(const char* key, const char* object_json) {
  json wrapper = {{"schema_version", kConfigSchemaVersion}};
  if (object_json && *object_json) {
    try {
      wrapper[key] = json::parse(object_json);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::kConfig, std::string("malformed JSON: ") + e.what());
    }
  }
  return config_from_json(wrapper.dump());
}

json vertices_json(std::span<const Vertex> vs) { return json(std::vector<Vertex>(vs.begin(), vs.end())); }

}  // namespace

extern "C" {

const char* cm_version(void) { return "1.0.0"; }

const char* cm_status_name(cm_status status) {
  switch (status) {
    case CM_OK: return "ok";
    case CM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CM_ERR_SIZE_MISMATCH: return "size_mismatch";
    case CM_ERR_SIZE_LIMIT: return "size_limit";
    case CM_ERR_INFEASIBLE: return "infeasible";
    case CM_ERR_INTERNAL: return "internal_consistency";
    case CM_ERR_CONFIG: return "config";
    case CM_ERR_IO: return "io";
    case CM_ERR_NULL_ARGUMENT: return "null_argument";
    case CM_ERR_UNKNOWN: return "unknown";
  }
  return "unknown";
}

const char* cm_last_error(void) { return g_last_error.c_str(); }

void cm_string_free(char* s) { std::free(s); }

unsigned cm_default_thread_count(void) { return default_thread_count(); }

cm_status cm_graph_from_edges(size_t n, const uint32_t* pairs, size_t m, cm_graph** out) {
  if (!out || (m > 0 && !pairs)) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    std::vector<Edge> edges(m);
    for (size_t i = 0; i < m; ++i) edges[i] = Edge{pairs[2 * i], pairs[2 * i + 1]};
    *out = new cm_graph{Graph(n, std::move(edges))};
  });
}

cm_status cm_graph_read(const char* path, cm_graph** out) {
  if (!out || !path) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    std::ifstream in = open_in(path);
    *out = new cm_graph{read_edge_list(in)};
  });
}

cm_status cm_graph_write(const cm_graph* g, const char* path) {
  if (!g || !path) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    std::ofstream out = open_out(path);
    write_edge_list(out, g->value);
    finish_write(out, path);
  });
}

size_t cm_graph_vertex_count(const cm_graph* g) { return g ? g->value.vertex_count() : 0; }
size_t cm_graph_edge_count(const cm_graph* g) { return g ? g->value.edge_count() : 0; }
void cm_graph_free(cm_graph* g) { delete g; }

cm_status cm_bijection_from_images(size_t n, const uint32_t* images, cm_bijection** out) {
  if (!out || (n > 0 && !images)) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    *out = new cm_bijection{Bijection(std::vector<Vertex>(images, images + n))};
  });
}

cm_status cm_bijection_read(const char* path, cm_bijection** out) {
  if (!out || !path) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    std::ifstream in = open_in(path);
    *out = new cm_bijection{read_bijection(in)};
  });
}

cm_status cm_bijection_write(const cm_bijection* pi, const char* path) {
  if (!pi || !path) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    std::ofstream out = open_out(path);
    write_bijection(out, pi->value);
    finish_write(out, path);
  });
}

size_t cm_bijection_size(const cm_bijection* pi) { return pi ? pi->value.size() : 0; }

cm_status cm_bijection_images(const cm_bijection* pi, uint32_t* images) {
  if (!pi || (pi->value.size() > 0 && !images)) return CM_ERR_NULL_ARGUMENT;
  const auto fwd = pi->value.forward();
  for (size_t i = 0; i < fwd.size(); ++i) images[i] = fwd[i];
  return CM_OK;
}

void cm_bijection_free(cm_bijection* pi) { delete pi; }

cm_status cm_sample_correlated(size_t n, double p, double s, uint64_t seed, cm_graph** g,
                               cm_graph** g_bar, cm_bijection** pi_star) {
  if (!g || !g_bar || !pi_star) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    CorrelatedSample sample = sample_correlated(ModelParams{n, p, s}, seed);
    auto a = std::make_unique<cm_graph>(cm_graph{std::move(sample.g)});
    auto b = std::make_unique<cm_graph>(cm_graph{std::move(sample.g_bar)});
    auto c = std::make_unique<cm_bijection>(cm_bijection{std::move(sample.pi_star)});
    *g = a.release();
    *g_bar = b.release();
    *pi_star = c.release();
  });
}

cm_status cm_params_from_lambda_alpha(size_t n, double lambda, double alpha, double* p, double* s) {
  if (!p || !s) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const ModelParams m = ModelParams::from_lambda_alpha(n, lambda, alpha);
    *p = m.p;
    *s = m.s;
  });
}

cm_status cm_intersection_graph(const cm_graph* g, const cm_graph* g_bar, const cm_bijection* pi,
                                cm_graph** out) {
  if (!g || !g_bar || !pi || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] { *out = new cm_graph{intersection_graph(g->value, g_bar->value, pi->value)}; });
}

cm_status cm_orbit_census_csv(const cm_bijection* pi_star, const cm_bijection* pi,
                              const uint32_t* subset, size_t subset_size, char** csv) {
  if (!pi_star || !pi || !csv || (subset_size > 0 && !subset)) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const OrbitDecomposition orbits =
        subset ? restricted_orbits(pi_star->value, pi->value,
                                   make_vertex_set(std::vector<Vertex>(subset, subset + subset_size),
                                                   pi_star->value.size()))
               : edge_orbits(pi_star->value, pi->value);
    std::ostringstream out;
    write_census_csv(out, orbits.census);
    *csv = copy_string(out.str());
  });
}

cm_status cm_densest_subgraph_json(const cm_graph* g, char** out) {
  if (!g || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const DensityResult r = densest_subgraph_exact(g->value);
    const json j = {{"edges", r.density.edges},
                    {"vertices", r.density.vertices},
                    {"density", r.density.value()},
                    {"subset", vertices_json(r.best_subset)}};
    *out = copy_string(j.dump());
  });
}

cm_status cm_admissibility_json(const cm_graph* h, double alpha, double rho_hat,
                                const char* overrides_json, char** out) {
  if (!h || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const ExperimentConfig cfg = config_with("admissibility", overrides_json);
    const AdmissibilityConstants consts = cfg.admissibility.apply(
        default_constants(alpha, rho_hat, h->value.vertex_count()));
    const AdmissibilityReport report = check_admissible(h->value, consts);
    json j = json::parse(report_to_json(report));
    j["constants"] = {{"xi", consts.xi},
                      {"zeta", consts.zeta},
                      {"beta", consts.beta},
                      {"c_big", consts.c_big},
                      {"delta1", consts.delta1},
                      {"k_good", consts.k_good},
                      {"degree_cap", consts.degree_cap},
                      {"small_set_cap", consts.small_set_cap},
                      {"tiny_component_cap", consts.tiny_component_cap},
                      {"cycle_len_cap", consts.cycle_len_cap}};
    *out = copy_string(j.dump());
  });
}

cm_status cm_estimate_json(const cm_graph* g, const cm_graph* g_bar, double p, double s,
                           const char* estimator, const char* config_json,
                           const cm_bijection* truth, char** out) {
  if (!g || !g_bar || !estimator || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const ModelParams params{g->value.vertex_count(), p, s};
    params.validate();
    const EstimatorConfig cfg = config_with("estimator", config_json).estimator;
    const std::string name = estimator;
    json j = {{"estimator", name}};
    std::optional<Bijection> pi;
    if (name == "map") {
      const MapResult r = map_estimator(g->value, g_bar->value, params, cfg);
      j["common_edges"] = r.common_edges;
      j["exhaustive"] = r.exhaustive;
      j["budget_exhausted"] = r.budget_exhausted;
      pi = r.pi;
    } else if (name == "candidate_search") {
      cfg.validate(params.alpha_hat());
      const CandidateSearchResult r = reasonable_candidate_search(g->value, g_bar->value, cfg);
      j["evaluated"] = r.evaluated;
      j["accepted"] = r.pi.has_value();
      if (r.pi) {
        j["max_density"] = r.check.max_density.value();
        j["certificate"] = vertices_json(r.check.certificate);
      }
      pi = r.pi;
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown estimator '" + name + "'");
    }
    j["pi"] = pi ? vertices_json(pi->forward()) : json(nullptr);
    if (truth && pi) {
      require(truth->value.size() == pi->size(), ErrorCode::kSizeMismatch,
              "truth has the wrong size");
      const std::size_t ov = overlap(*pi, truth->value);
      j["overlap"] = ov;
      j["overlap_fraction"] = static_cast<double>(ov) / static_cast<double>(pi->size());
    }
    *out = copy_string(j.dump());
  });
}

cm_status cm_posterior_csv(const cm_graph* g, const cm_graph* g_bar, double p, double s,
                           const cm_bijection* truth, unsigned threads, char** csv) {
  if (!g || !g_bar || !csv) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const PosteriorTable table =
        exact_posterior(g->value, g_bar->value, LikelihoodConstants::make(p, s), threads);
    std::ostringstream out;
    write_posterior_csv(out, table, truth ? &truth->value : nullptr);
    *csv = copy_string(out.str());
  });
}

cm_status cm_tv_json(size_t n, double p, double s, size_t mc_replicates, uint64_t seed,
                     unsigned threads, char** out) {
  if (!out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const ModelParams params{n, p, s};
    json j = {{"n", n}, {"p", p}, {"s", s}, {"exact", nullptr}, {"mc", nullptr}};
    if (n <= 4) j["exact"] = tv_exact(params);
    if (mc_replicates > 0) {
      const TvEstimate e = tv_mc(params, mc_replicates, seed, threads);
      j["mc"] = {{"estimate", e.estimate}, {"stderr", e.stderr_}, {"replicates", mc_replicates}};
    }
    if (n > 4 && mc_replicates == 0)
      fail(ErrorCode::kSizeLimit, "exact TV needs n <= 4; request Monte Carlo replicates");
    *out = copy_string(j.dump());
  });
}

cm_status cm_config_parse(const char* text, cm_config** out) {
  if (!text || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] { *out = new cm_config{config_from_json(text)}; });
}

cm_status cm_config_load(const char* path, cm_config** out) {
  if (!path || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] { *out = new cm_config{load_config(path)}; });
}

cm_status cm_config_default(const char* experiment, cm_config** out) {
  if (!experiment || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    ExperimentConfig c;
    c.kind = experiment_kind_from_string(experiment);
    if (c.kind == ExperimentKind::kPosteriorStudy) c.n_grid = {5};
    c.validate();
    *out = new cm_config{std::move(c)};
  });
}

cm_status cm_config_set_experiment(cm_config* cfg, const char* experiment) {
  if (!cfg || !experiment) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    ExperimentConfig c = cfg->value;
    c.kind = experiment_kind_from_string(experiment);
    c.validate();
    cfg->value = std::move(c);
  });
}

cm_status cm_config_set_seed(cm_config* cfg, uint64_t seed) {
  if (!cfg) return CM_ERR_NULL_ARGUMENT;
  cfg->value.seed = seed;
  return CM_OK;
}

cm_status cm_config_to_json(const cm_config* cfg, char** out) {
  if (!cfg || !out) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] { *out = copy_string(config_to_json(cfg->value)); });
}

cm_status cm_config_output(const cm_config* cfg, char** path) {
  if (!cfg || !path) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] { *path = copy_string(cfg->value.output); });
}

void cm_config_free(cm_config* cfg) { delete cfg; }

cm_status cm_run_experiment(const cm_config* cfg, unsigned threads, const char* csv_path,
                            char** csv, int* exit_code, char** summary_json) {
  if (!cfg || !exit_code || !summary_json || (!csv_path && !csv)) return CM_ERR_NULL_ARGUMENT;
  return guarded([&] {
    const unsigned workers = threads ? threads : default_thread_count();
    ExperimentOutcome outcome;
    if (csv_path) {
      std::ofstream out = open_out(csv_path);
      outcome = run_experiment(cfg->value, out, workers);
      finish_write(out, csv_path);
    } else {
      std::ostringstream out;
      outcome = run_experiment(cfg->value, out, workers);
      *csv = copy_string(out.str());
    }
    *exit_code = outcome.exit_code;
    *summary_json = copy_string(outcome.summary_json);
  });
}

}  // extern "C"
