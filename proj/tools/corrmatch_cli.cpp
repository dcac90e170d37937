// Command-line front end. Talks to the library only through corrmatch.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corrmatch/corrmatch.h"
#include "json.hpp"

namespace {

constexpr int kExitRuntimeError = 1;
constexpr int kExitConfigError = 3;

// Thrown from inside a subcommand once a C call fails; carries the exit code.
struct Failure {
  int exit_code;
};

void check(cm_status status, const char* what) {
  if (status == CM_OK) return;
  std::cerr << "corrmatch: " << what << " failed [" << cm_status_name(status)
            << "]: " << cm_last_error() << "\n";
  throw Failure{status == CM_ERR_CONFIG ? kExitConfigError : kExitRuntimeError};
}

struct GraphDeleter {
  void operator()(cm_graph* g) const { cm_graph_free(g); }
};
struct BijectionDeleter {
  void operator()(cm_bijection* p) const { cm_bijection_free(p); }
};
struct ConfigDeleter {
  void operator()(cm_config* c) const { cm_config_free(c); }
};
struct StringDeleter {
  void operator()(char* s) const { cm_string_free(s); }
};

using GraphPtr = std::unique_ptr<cm_graph, GraphDeleter>;
using BijectionPtr = std::unique_ptr<cm_bijection, BijectionDeleter>;
using ConfigPtr = std::unique_ptr<cm_config, ConfigDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

GraphPtr load_graph(const std::string& path) {
  cm_graph* g = nullptr;
  check(cm_graph_read(path.c_str(), &g), ("reading " + path).c_str());
  return GraphPtr(g);
}

BijectionPtr load_bijection(const std::string& path) {
  cm_bijection* p = nullptr;
  check(cm_bijection_read(path.c_str(), &p), ("reading " + path).c_str());
  return BijectionPtr(p);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "corrmatch: cannot open " << path << "\n";
    throw Failure{kExitConfigError};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) {
    std::cerr << "corrmatch: cannot write " << out_path << "\n";
    throw Failure{kExitRuntimeError};
  }
}

std::vector<std::uint32_t> parse_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--subset", "not a vertex id: " + item);
    }
  }
  return out;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  if (with_config) cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--threads", c.threads, "worker threads (0: CORRMATCH_THREADS or all cores)");
  cmd->add_option("--out", c.out, "output path (default: stdout)");
}

unsigned threads_of(const Common& c) { return c.threads ? c.threads : cm_default_thread_count(); }

// Loads --config (or the defaults for `experiment`), forces the experiment
// kind, applies --seed, and runs it. The CSV goes to --out, then the
// config's output path, then stdout; the summary goes to stderr.
int run_experiment(const Common& c, const char* experiment) {
  cm_config* raw = nullptr;
  if (c.config.empty()) {
    check(cm_config_default(experiment, &raw), "building default config");
  } else {
    check(cm_config_load(c.config.c_str(), &raw), "loading config");
  }
  ConfigPtr cfg(raw);
  check(cm_config_set_experiment(cfg.get(), experiment), "setting experiment");
  if (c.seed) check(cm_config_set_seed(cfg.get(), *c.seed), "setting seed");

  std::string out_path = c.out;
  if (out_path.empty()) {
    char* configured = nullptr;
    check(cm_config_output(cfg.get(), &configured), "reading output path");
    out_path = StringPtr(configured).get();
  }

  int exit_code = 0;
  char* summary = nullptr;
  char* csv = nullptr;
  check(cm_run_experiment(cfg.get(), threads_of(c), out_path.empty() ? nullptr : out_path.c_str(),
                          out_path.empty() ? &csv : nullptr, &exit_code, &summary),
        experiment);
  StringPtr summary_owner(summary), csv_owner(csv);
  if (csv) std::cout << csv;
  std::cerr << summary << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corrmatch: correlated Erdos-Renyi graph matching laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cm_version()));
  int exit_code = 0;

  // sample ---------------------------------------------------------------
  Common sample_opts;
  std::size_t sample_n = 0;
  std::optional<double> sample_p, sample_s, sample_lambda, sample_alpha;
  auto* sample = app.add_subcommand("sample", "draw (pi*, G, G_bar) from the correlated model");
  add_common(sample, sample_opts, false);
  sample->add_option("--n", sample_n, "vertex count")->required();
  sample->add_option("--p", sample_p, "parent edge probability");
  sample->add_option("--s", sample_s, "subsampling probability");
  sample->add_option("--lambda", sample_lambda, "n p s^2 (with --alpha)");
  sample->add_option("--alpha", sample_alpha, "p = n^-alpha (with --lambda)");
  sample->callback([&] {
    double p = 0, s = 0;
    if (sample_lambda && sample_alpha) {
      check(cm_params_from_lambda_alpha(sample_n, *sample_lambda, *sample_alpha, &p, &s),
            "deriving (p, s)");
    } else if (sample_p && sample_s) {
      p = *sample_p;
      s = *sample_s;
    } else {
      throw CLI::ValidationError("sample", "give either --p and --s or --lambda and --alpha");
    }
    if (sample_opts.out.empty()) throw CLI::ValidationError("sample", "--out PREFIX is required");
    cm_graph *g = nullptr, *g_bar = nullptr;
    cm_bijection* pi = nullptr;
    check(cm_sample_correlated(sample_n, p, s, sample_opts.seed.value_or(1), &g, &g_bar, &pi),
          "sampling");
    GraphPtr g_owner(g), g_bar_owner(g_bar);
    BijectionPtr pi_owner(pi);
    const std::string prefix = sample_opts.out;
    check(cm_graph_write(g, (prefix + ".g.txt").c_str()), "writing G");
    check(cm_graph_write(g_bar, (prefix + ".gbar.txt").c_str()), "writing G_bar");
    check(cm_bijection_write(pi, (prefix + ".pi.txt").c_str()), "writing pi*");
    std::cout.precision(17);
    std::cout << "{\"n\":" << sample_n << ",\"p\":" << p << ",\"s\":" << s
              << ",\"edges_g\":" << cm_graph_edge_count(g)
              << ",\"edges_g_bar\":" << cm_graph_edge_count(g_bar) << "}\n";
  });

  // orbits ---------------------------------------------------------------
  Common orbit_opts;
  std::string orbit_pi_star, orbit_pi, orbit_subset;
  auto* orbits = app.add_subcommand("orbits", "edge-orbit census of Phi = pi^-1 pi*");
  add_common(orbits, orbit_opts, false);
  orbits->add_option("--pi-star", orbit_pi_star, "true bijection file")->required();
  orbits->add_option("--pi", orbit_pi, "candidate bijection file")->required();
  orbits->add_option("--subset", orbit_subset, "comma-separated vertex subset");
  orbits->callback([&] {
    BijectionPtr a = load_bijection(orbit_pi_star), b = load_bijection(orbit_pi);
    const std::vector<std::uint32_t> subset = parse_list(orbit_subset);
    char* csv = nullptr;
    check(cm_orbit_census_csv(a.get(), b.get(), orbit_subset.empty() ? nullptr : subset.data(),
                              subset.size(), &csv),
          "orbit census");
    emit(StringPtr(csv).get(), orbit_opts.out);
  });

  // experiments ----------------------------------------------------------
  Common moments_opts, rho_opts, sweep_opts;
  auto* moments = app.add_subcommand("moments-check", "Monte Carlo check of orbit moment formulas");
  add_common(moments, moments_opts, true);
  moments->callback([&] { exit_code = run_experiment(moments_opts, "moment_verification"); });

  auto* rho = app.add_subcommand("rho-curve", "estimate the densest-subgraph curve rho(lambda)");
  add_common(rho, rho_opts, true);
  rho->callback([&] { exit_code = run_experiment(rho_opts, "rho_curve"); });

  auto* sweep = app.add_subcommand("threshold-sweep", "finite-n sweep across the threshold");
  add_common(sweep, sweep_opts, true);
  sweep->callback([&] { exit_code = run_experiment(sweep_opts, "threshold_sweep"); });

  // density --------------------------------------------------------------
  Common density_opts;
  std::string density_graph;
  auto* density = app.add_subcommand("density", "exact densest subgraph");
  add_common(density, density_opts, false);
  density->add_option("--graph", density_graph, "edge-list file")->required();
  density->callback([&] {
    GraphPtr g = load_graph(density_graph);
    char* json = nullptr;
    check(cm_densest_subgraph_json(g.get(), &json), "densest subgraph");
    emit(StringPtr(json).get(), density_opts.out);
  });

  // estimate -------------------------------------------------------------
  Common est_opts;
  std::string est_g, est_g_bar, est_truth, est_name = "map", est_config;
  double est_p = 0, est_s = 0;
  auto* estimate = app.add_subcommand("estimate", "run an estimator on (G, G_bar)");
  add_common(estimate, est_opts, false);
  estimate->add_option("--g", est_g, "G edge list")->required();
  estimate->add_option("--gbar", est_g_bar, "G_bar edge list")->required();
  estimate->add_option("--p", est_p, "model p")->required();
  estimate->add_option("--s", est_s, "model s")->required();
  estimate->add_option("--estimator", est_name, "map | candidate_search")
      ->check(CLI::IsMember({"map", "candidate_search"}));
  estimate->add_option("--estimator-config", est_config, "JSON file with estimator settings")
      ->check(CLI::ExistingFile);
  estimate->add_option("--truth", est_truth, "true bijection, to report overlap");
  estimate->callback([&] {
    GraphPtr g = load_graph(est_g), g_bar = load_graph(est_g_bar);
    BijectionPtr truth = est_truth.empty() ? nullptr : load_bijection(est_truth);
    std::string settings = est_config.empty() ? "" : read_file(est_config);
    if (est_opts.seed) {
      // The estimator seed lives in its settings object.
      nlohmann::json obj = nlohmann::json::object();
      if (!settings.empty()) {
        try {
          obj = nlohmann::json::parse(settings);
        } catch (const nlohmann::json::parse_error& e) {
          std::cerr << "corrmatch: malformed " << est_config << ": " << e.what() << "\n";
          throw Failure{kExitConfigError};
        }
      }
      obj["seed"] = *est_opts.seed;
      settings = obj.dump();
    }
    char* json = nullptr;
    check(cm_estimate_json(g.get(), g_bar.get(), est_p, est_s, est_name.c_str(),
                           settings.empty() ? nullptr : settings.c_str(), truth.get(), &json),
          "estimate");
    emit(StringPtr(json).get(), est_opts.out);
  });

  // posterior ------------------------------------------------------------
  Common post_opts;
  std::string post_g, post_g_bar, post_truth;
  double post_p = 0, post_s = 0;
  auto* posterior =
      app.add_subcommand("posterior", "exact posterior dump, or a posterior study with --config");
  add_common(posterior, post_opts, true);
  posterior->add_option("--g", post_g, "G edge list");
  posterior->add_option("--gbar", post_g_bar, "G_bar edge list");
  posterior->add_option("--p", post_p, "model p");
  posterior->add_option("--s", post_s, "model s");
  posterior->add_option("--truth", post_truth, "true bijection for the overlap column");
  posterior->callback([&] {
    if (post_g.empty() && post_g_bar.empty()) {
      exit_code = run_experiment(post_opts, "posterior_study");
      return;
    }
    if (post_g.empty() || post_g_bar.empty())
      throw CLI::ValidationError("posterior", "--g and --gbar go together");
    GraphPtr g = load_graph(post_g), g_bar = load_graph(post_g_bar);
    BijectionPtr truth = post_truth.empty() ? nullptr : load_bijection(post_truth);
    char* csv = nullptr;
    check(cm_posterior_csv(g.get(), g_bar.get(), post_p, post_s, truth.get(), threads_of(post_opts),
                           &csv),
          "posterior");
    emit(StringPtr(csv).get(), post_opts.out);
  });

  // tv -------------------------------------------------------------------
  Common tv_opts;
  std::size_t tv_n = 0, tv_mc = 0;
  double tv_p = 0, tv_s = 0;
  auto* tv = app.add_subcommand("tv", "total variation between correlated and independent laws");
  add_common(tv, tv_opts, false);
  tv->add_option("--n", tv_n, "vertex count")->required();
  tv->add_option("--p", tv_p, "model p")->required();
  tv->add_option("--s", tv_s, "model s")->required();
  tv->add_option("--mc", tv_mc, "Monte Carlo replicates (0: exact only)");
  tv->callback([&] {
    char* json = nullptr;
    check(cm_tv_json(tv_n, tv_p, tv_s, tv_mc, tv_opts.seed.value_or(1), threads_of(tv_opts), &json),
          "tv");
    emit(StringPtr(json).get(), tv_opts.out);
  });

  // admissibility --------------------------------------------------------
  Common adm_opts;
  std::string adm_graph, adm_overrides;
  double adm_alpha = 0, adm_rho = 0;
  auto* adm = app.add_subcommand("admissibility", "check the five truncation conditions on a graph");
  add_common(adm, adm_opts, false);
  adm->add_option("--graph", adm_graph, "edge-list file")->required();
  adm->add_option("--alpha", adm_alpha, "alpha in (0,1)")->required();
  adm->add_option("--rho-hat", adm_rho, "rho estimate below 1/alpha")->required();
  adm->add_option("--overrides", adm_overrides, "JSON file of constant overrides")
      ->check(CLI::ExistingFile);
  adm->callback([&] {
    GraphPtr h = load_graph(adm_graph);
    const std::string overrides = adm_overrides.empty() ? "" : read_file(adm_overrides);
    char* json = nullptr;
    check(cm_admissibility_json(h.get(), adm_alpha, adm_rho,
                                overrides.empty() ? nullptr : overrides.c_str(), &json),
          "admissibility");
    emit(StringPtr(json).get(), adm_opts.out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return exit_code;
}
