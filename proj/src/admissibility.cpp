#include "corrmatch/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "corrmatch/density.hpp"
#include "corrmatch/error.hpp"

namespace corrmatch {

namespace {

bool violates_ratio(std::uint64_t edges, std::uint64_t vertices, double ratio) {
  return static_cast<double>(edges) > ratio * static_cast<double>(vertices);
}

// Breadth-first search from `sources` out to `max_depth`, reusing buffers
// across calls. Depth -1 marks unvisited.
class BoundedBfs {
 public:
  explicit BoundedBfs(std::size_t n) : depth_(n, -1), label_(n, 0) {}

  template <class Visit>
  void run(const Graph& h, std::span<const Vertex> sources, std::size_t max_depth, Visit visit) {
    for (Vertex v : touched_) depth_[v] = -1;
    touched_.clear();
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const Vertex s = sources[i];
      if (depth_[s] >= 0) continue;
      depth_[s] = 0;
      label_[s] = static_cast<Vertex>(i);
      touched_.push_back(s);
    }
    for (std::size_t qi = 0; qi < touched_.size(); ++qi) {
      const Vertex u = touched_[qi];
      visit(u);
      if (static_cast<std::size_t>(depth_[u]) == max_depth) continue;
      for (Vertex w : h.neighbors(u)) {
        if (depth_[w] >= 0) continue;
        depth_[w] = depth_[u] + 1;
        label_[w] = label_[u];
        touched_.push_back(w);
      }
    }
  }

  int depth(Vertex v) const { return depth_[v]; }
  Vertex label(Vertex v) const { return label_[v]; }
  std::span<const Vertex> reached() const { return touched_; }

 private:
  std::vector<int> depth_;
  std::vector<Vertex> label_;
  std::vector<Vertex> touched_;
};

std::vector<VertexSet> components_within(const Graph& h, std::span<const Vertex> domain) {
  std::vector<char> inside(h.vertex_count(), 0);
  for (Vertex v : domain) inside[v] = 1;
  std::vector<VertexSet> out;
  for (Vertex root : domain) {
    if (inside[root] != 1) continue;
    VertexSet comp{root};
    inside[root] = 2;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (Vertex w : h.neighbors(comp[i])) {
        if (inside[w] == 1) {
          inside[w] = 2;
          comp.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

// Enumerates connected vertex sets of one component (each exactly once, rooted
// at their minimum vertex) up to `cap` vertices, looking for one with
// edges > ratio * vertices.
class ViolatorSearch {
 public:
  ViolatorSearch(const Graph& h, const VertexSet& comp, std::size_t cap, double ratio,
                 std::uint64_t& budget)
      : h_(h), cap_(cap), ratio_(ratio), budget_(budget),
        allowed_(h.vertex_count(), 0), in_set_(h.vertex_count(), 0),
        touch_(h.vertex_count(), 0) {
    for (Vertex v : comp) allowed_[v] = 1;
    for (Vertex v : comp) {
      std::uint64_t d = 0;
      for (Vertex w : h.neighbors(v)) d += allowed_[w];
      max_gain_ = std::max(max_gain_, d);
    }
    roots_ = comp;
  }

  // kFail with witness, kPass when exhausted, kUndecided when out of budget.
  CheckStatus run(VertexSet& witness) {
    for (Vertex r : roots_) {
      root_ = r;
      add(r);
      std::vector<Vertex> ext;
      for (Vertex w : h_.neighbors(r))
        if (allowed_[w] && w > r) ext.push_back(w);
      const CheckStatus s = extend(ext);
      remove(r);
      if (s != CheckStatus::kPass) {
        if (s == CheckStatus::kFail) {
          witness = found_;
          std::sort(witness.begin(), witness.end());
        }
        return s;
      }
    }
    return CheckStatus::kPass;
  }

 private:
  void add(Vertex v) {
    std::uint64_t gained = 0;
    for (Vertex w : h_.neighbors(v)) {
      gained += in_set_[w];
      ++touch_[w];
    }
    edges_stack_.push_back(edges_);
    edges_ += gained;
    in_set_[v] = 1;
    ++touch_[v];
    set_.push_back(v);
  }

  void remove(Vertex v) {
    for (Vertex w : h_.neighbors(v)) --touch_[w];
    --touch_[v];
    in_set_[v] = 0;
    edges_ = edges_stack_.back();
    edges_stack_.pop_back();
    set_.pop_back();
  }

  bool hopeless() const {
    const std::uint64_t s = set_.size();
    const double slack = static_cast<double>(edges_) - ratio_ * static_cast<double>(s);
    const double per_vertex = static_cast<double>(max_gain_) - ratio_;
    if (per_vertex <= 0.0) return true;
    return slack + per_vertex * static_cast<double>(cap_ - s) <= 0.0;
  }

  CheckStatus extend(std::vector<Vertex> ext) {
    if (budget_ == 0) return CheckStatus::kUndecided;
    --budget_;
    if (violates_ratio(edges_, set_.size(), ratio_)) {
      found_ = set_;
      return CheckStatus::kFail;
    }
    if (set_.size() >= cap_ || hopeless()) return CheckStatus::kPass;
    while (!ext.empty()) {
      const Vertex w = ext.back();
      ext.pop_back();
      // Exclusive neighbours of w: not in the set and not adjacent to it.
      std::vector<Vertex> next = ext;
      for (Vertex u : h_.neighbors(w))
        if (allowed_[u] && u > root_ && touch_[u] == 0) next.push_back(u);
      add(w);
      const CheckStatus s = extend(std::move(next));
      remove(w);
      if (s != CheckStatus::kPass) return s;
    }
    return CheckStatus::kPass;
  }

  const Graph& h_;
  std::size_t cap_;
  double ratio_;
  std::uint64_t& budget_;
  std::vector<char> allowed_;
  std::vector<char> in_set_;
  std::vector<std::uint32_t> touch_;
  std::uint64_t max_gain_ = 0;
  VertexSet roots_;
  Vertex root_ = 0;
  std::vector<Vertex> set_;
  std::vector<std::uint64_t> edges_stack_;
  std::uint64_t edges_ = 0;
  std::vector<Vertex> found_;
};

ConditionResult check_densest(const Graph& h, double xi) {
  ConditionResult r;
  const DensityResult d = densest_subgraph_exact(h);
  r.explored = 1;
  if (violates_ratio(d.density.edges, d.density.vertices, xi)) {
    r.status = CheckStatus::kFail;
    r.witness = d.best_subset;
  }
  return r;
}

// Connected sets of size <= cap with edges > ratio * size. A minimal violator
// has minimum degree > ratio, so only the (floor(ratio)+1)-core is searched.
ConditionResult check_small_sets(const Graph& h, double ratio, std::uint64_t cap,
                                 std::uint64_t budget) {
  ConditionResult r;
  if (cap == 0) return r;
  const std::uint64_t start = budget;
  const auto k = static_cast<std::size_t>(std::floor(ratio)) + 1;
  const VertexSet core = k_core(h, all_vertices(h.vertex_count()), k);
  bool undecided = false;
  for (const VertexSet& comp : components_within(h, core)) {
    const DensityResult d = densest_subgraph_exact(h, comp);
    if (!violates_ratio(d.density.edges, d.density.vertices, ratio)) continue;
    if (d.best_subset.size() <= cap) {
      r.status = CheckStatus::kFail;
      r.witness = d.best_subset;
      r.explored = start - budget;
      return r;
    }
    ViolatorSearch search(h, comp, cap, ratio, budget);
    VertexSet witness;
    const CheckStatus s = search.run(witness);
    if (s == CheckStatus::kFail) {
      r.status = s;
      r.witness = std::move(witness);
      r.explored = start - budget;
      return r;
    }
    if (s == CheckStatus::kUndecided) undecided = true;
  }
  r.explored = start - budget;
  if (undecided) r.status = CheckStatus::kUndecided;
  return r;
}

class CycleCounter {
 public:
  CycleCounter(const Graph& h, std::size_t max_len, std::uint64_t budget)
      : h_(h), max_len_(max_len), budget_(budget), allowed_(h.vertex_count(), 0),
        on_path_(h.vertex_count(), 0), counts_(max_len >= 3 ? max_len - 2 : 0, 0),
        examples_(counts_.size()) {
    for (Vertex v : k_core(h, all_vertices(h.vertex_count()), 2)) allowed_[v] = 1;
  }

  bool run() {
    if (max_len_ < 3) return true;
    for (Vertex r = 0; r < h_.vertex_count(); ++r) {
      if (!allowed_[r]) continue;
      root_ = r;
      path_.assign(1, r);
      on_path_[r] = 1;
      const bool ok = dfs(r);
      on_path_[r] = 0;
      if (!ok) return false;
    }
    return true;
  }

  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const std::vector<std::vector<Vertex>>& examples() const { return examples_; }

 private:
  bool dfs(Vertex u) {
    if (budget_ == 0) return false;
    --budget_;
    for (Vertex w : h_.neighbors(u)) {
      if (w == root_ && path_.size() >= 3 && path_[1] < path_.back()) {
        const std::size_t len = path_.size();
        if (counts_[len - 3]++ == 0) examples_[len - 3] = path_;
        continue;
      }
      if (w <= root_ || !allowed_[w] || on_path_[w] || path_.size() >= max_len_) continue;
      on_path_[w] = 1;
      path_.push_back(w);
      const bool ok = dfs(w);
      path_.pop_back();
      on_path_[w] = 0;
      if (!ok) return false;
    }
    return true;
  }

  const Graph& h_;
  std::size_t max_len_;
  std::uint64_t budget_;
  std::vector<char> allowed_;
  std::vector<char> on_path_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::vector<Vertex>> examples_;
  std::vector<Vertex> path_;
  Vertex root_ = 0;
};

bool is_connected_set(const Graph& h, std::span<const Vertex> set) {
  if (set.empty()) return false;
  VertexSet sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Vertex> seen{sorted.front()};
  std::vector<char> mark(h.vertex_count(), 0);
  mark[sorted.front()] = 1;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    for (Vertex w : h.neighbors(seen[i])) {
      if (!mark[w] && std::binary_search(sorted.begin(), sorted.end(), w)) {
        mark[w] = 1;
        seen.push_back(w);
      }
    }
  }
  return seen.size() == sorted.size();
}

bool valid_subset(const Graph& h, std::span<const Vertex> set) {
  if (set.empty()) return false;
  for (Vertex v : set)
    if (v >= h.vertex_count()) return false;
  VertexSet sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

std::vector<char> near_short_cycles(const Graph& h, std::uint64_t c_big, BoundedBfs& bfs) {
  std::vector<char> near(h.vertex_count(), 0);
  if (c_big < 3) return near;
  const std::vector<char> on = on_short_cycle(h, c_big);
  VertexSet sources;
  for (Vertex v = 0; v < h.vertex_count(); ++v)
    if (on[v]) sources.push_back(v);
  if (sources.empty()) return near;
  bfs.run(h, sources, c_big, [&](Vertex u) { near[u] = 1; });
  return near;
}

}  // namespace

std::uint64_t AdmissibilityConstants::cycle_cap(std::uint64_t k) const {
  const double v = std::ceil(std::pow(static_cast<double>(n), delta1 * static_cast<double>(k)));
  if (!(v < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(v);
}

AdmissibilityConstants default_constants(double alpha, double rho_hat, std::size_t n) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::kInvalidArgument, "alpha must lie in (0,1)");
  require(rho_hat >= 1.0, ErrorCode::kInvalidArgument, "rho_hat must be at least 1");
  require(n >= 3, ErrorCode::kInvalidArgument, "n must be at least 3");
  AdmissibilityConstants c;
  c.alpha = alpha;
  c.rho_hat = rho_hat;
  c.n = n;
  c.xi = (rho_hat + 1.0 / alpha) / 2.0;
  if (!(c.xi < 1.0 / alpha))
    fail(ErrorCode::kInfeasible, "xi >= 1/alpha: lambda is not below the threshold");

  for (int j = 1; j <= 30 && c.zeta == 0.0; ++j) {
    const double z = 1.0 + std::ldexp(1.0, -j);
    if (z * alpha < 1.0 && 1.0 + z * (alpha - 1.0) < 2.0 - z) c.zeta = z;
  }
  if (c.zeta == 0.0) fail(ErrorCode::kInfeasible, "no zeta grid point satisfies its constraint");

  const double beta_low =
      std::max(1.0 - alpha, (1.0 + c.zeta * (alpha - 1.0)) / (2.0 - c.zeta));
  if (!(beta_low < 1.0)) fail(ErrorCode::kInfeasible, "empty interval for beta");
  c.beta = (beta_low + 1.0) / 2.0;

  const double gap = 1.0 / alpha - c.xi;
  auto c_big = static_cast<std::uint64_t>(std::floor(1.0 / gap)) + 1;
  while (c_big > 1 && alpha * (c.xi + 1.0 / static_cast<double>(c_big - 1)) < 1.0) --c_big;
  while (!(alpha * (c.xi + 1.0 / static_cast<double>(c_big)) < 1.0)) ++c_big;
  c.c_big = c_big;

  c.delta1 = 0.5 * std::min(1.0 - alpha * c.xi, c.beta / static_cast<double>(c.c_big));
  const double ln = std::log(static_cast<double>(n));
  c.degree_cap = static_cast<std::uint64_t>(std::ceil(ln));
  c.small_set_cap = static_cast<std::uint64_t>(std::floor(static_cast<double>(n) / ln));
  c.tiny_component_cap = static_cast<std::uint64_t>(std::ceil(std::log(ln)));
  c.k_good = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), c.beta)));
  validate_constants(c);
  return c;
}

void validate_constants(const AdmissibilityConstants& c) {
  const auto check = [](bool ok, const char* what) {
    require(ok, ErrorCode::kInternalConsistency, what);
  };
  const double a = c.alpha;
  check(c.xi < 1.0 / a, "constraint xi < 1/alpha violated");
  check(c.zeta > 1.0 && 1.0 + c.zeta * (a - 1.0) < 2.0 - c.zeta, "zeta constraint violated");
  check(std::max(1.0 - a, (1.0 + c.zeta * (a - 1.0)) / (2.0 - c.zeta)) < c.beta && c.beta < 1.0,
        "beta constraint violated");
  check(c.c_big >= 1 && a * (c.xi + 1.0 / static_cast<double>(c.c_big)) < 1.0,
        "C constraint violated");
  check(c.delta1 > 0.0 &&
            c.delta1 < std::min(1.0 - a * c.xi, c.beta / static_cast<double>(c.c_big)),
        "delta1 constraint violated");
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kUndecided: return "undecided";
  }
  return "undecided";
}

bool AdmissibilityReport::admissible() const {
  return std::all_of(std::begin(conditions), std::end(conditions),
                     [](const ConditionResult& c) { return c.status == CheckStatus::kPass; });
}

bool AdmissibilityReport::any_undecided() const {
  return std::any_of(std::begin(conditions), std::end(conditions),
                     [](const ConditionResult& c) { return c.status == CheckStatus::kUndecided; });
}

AdmissibilityReport check_admissible(const Graph& h, const AdmissibilityConstants& consts) {
  AdmissibilityReport report;
  report.conditions[0] = check_densest(h, consts.xi);
  report.conditions[1] =
      check_small_sets(h, consts.zeta, consts.small_set_cap, consts.search_budget);

  ConditionResult& deg = report.conditions[2];
  for (Vertex v = 0; v < h.vertex_count(); ++v) {
    if (h.degree(v) >= consts.degree_cap) {
      deg.status = CheckStatus::kFail;
      deg.witness = {v};
      break;
    }
  }
  deg.explored = h.vertex_count();

  report.conditions[3] = check_small_sets(h, 1.0, consts.tiny_component_cap, consts.search_budget);

  ConditionResult& cyc = report.conditions[4];
  CycleCounter counter(h, consts.cycle_len_cap, consts.search_budget);
  if (!counter.run()) {
    cyc.status = CheckStatus::kUndecided;
    return report;
  }
  report.cycle_counts = counter.counts();
  for (std::size_t i = 0; i < report.cycle_counts.size(); ++i) {
    const std::uint64_t k = i + 3;
    if (report.cycle_counts[i] > consts.cycle_cap(k)) {
      cyc.status = CheckStatus::kFail;
      cyc.cycle_length = k;
      cyc.cycle_count = report.cycle_counts[i];
      cyc.witness = counter.examples()[i];
      break;
    }
  }
  return report;
}

bool witness_violates(const Graph& h, const AdmissibilityConstants& consts, int index,
                      const ConditionResult& result) {
  if (result.status != CheckStatus::kFail) return false;
  const auto& w = result.witness;
  switch (index) {
    case 0:
      return valid_subset(h, w) && violates_ratio(h.edges_within(w), w.size(), consts.xi);
    case 1:
      return valid_subset(h, w) && w.size() <= consts.small_set_cap &&
             violates_ratio(h.edges_within(w), w.size(), consts.zeta);
    case 2:
      return w.size() == 1 && w[0] < h.vertex_count() && h.degree(w[0]) >= consts.degree_cap;
    case 3:
      return valid_subset(h, w) && w.size() <= consts.tiny_component_cap &&
             is_connected_set(h, w) && h.edges_within(w) > w.size();
    case 4: {
      const std::size_t k = result.cycle_length;
      if (k < 3 || w.size() != k || !valid_subset(h, w)) return false;
      for (std::size_t i = 0; i < k; ++i)
        if (!h.has_edge(w[i], w[(i + 1) % k])) return false;
      std::vector<std::uint64_t> counts;
      if (!count_simple_cycles(h, k, std::numeric_limits<std::uint64_t>::max(), counts))
        return false;
      return counts[k - 3] == result.cycle_count && result.cycle_count > consts.cycle_cap(k);
    }
    default:
      return false;
  }
}

std::string report_to_json(const AdmissibilityReport& report) {
  static const char* kNames[5] = {"i", "ii", "iii", "iv", "v"};
  nlohmann::json out = nlohmann::json::object();
  for (int i = 0; i < 5; ++i) {
    const ConditionResult& c = report.conditions[i];
    nlohmann::json entry{{"status", to_string(c.status)}};
    if (c.status == CheckStatus::kFail) {
      entry["witness"] = c.witness;
      if (i == 4) {
        entry["cycle_length"] = c.cycle_length;
        entry["cycle_count"] = c.cycle_count;
      }
    } else {
      entry["witness"] = nullptr;
    }
    out[kNames[i]] = std::move(entry);
  }
  out["admissible"] = report.admissible();
  if (!report.cycle_counts.empty()) out["cycle_counts"] = report.cycle_counts;
  return out.dump();
}

bool count_simple_cycles(const Graph& h, std::size_t max_len, std::uint64_t budget,
                         std::vector<std::uint64_t>& counts) {
  CycleCounter counter(h, max_len, budget);
  const bool ok = counter.run();
  counts = counter.counts();
  return ok;
}

std::vector<char> on_short_cycle(const Graph& h, std::size_t max_len) {
  const std::size_t n = h.vertex_count();
  std::vector<char> on(n, 0);
  if (max_len < 3) return on;
  // Shortest cycle through v: BFS in h - v seeded by v's neighbours (depth 1),
  // closed by an edge between differently labelled branches.
  std::vector<int> depth(n, -1);
  std::vector<Vertex> label(n, 0);
  std::vector<Vertex> queue;
  for (Vertex v : k_core(h, all_vertices(n), 2)) {
    queue.clear();
    depth[v] = 0;
    for (Vertex w : h.neighbors(v)) {
      depth[w] = 1;
      label[w] = w;
      queue.push_back(w);
    }
    bool found = false;
    for (std::size_t qi = 0; qi < queue.size() && !found; ++qi) {
      const Vertex u = queue[qi];
      for (Vertex w : h.neighbors(u)) {
        if (w == v) continue;
        if (depth[w] < 0) {
          if (static_cast<std::size_t>(depth[u]) + 1 < max_len) {
            depth[w] = depth[u] + 1;
            label[w] = label[u];
            queue.push_back(w);
          }
        } else if (label[w] != label[u] &&
                   static_cast<std::size_t>(depth[u] + depth[w]) + 1 <= max_len) {
          found = true;
          break;
        }
      }
    }
    on[v] = found;
    depth[v] = -1;
    for (Vertex u : queue) depth[u] = -1;
  }
  return on;
}

GoodSetCheck is_good_set(const Graph& h, std::span<const Vertex> a, std::uint64_t c_big) {
  const VertexSet members = make_vertex_set({a.begin(), a.end()}, h.vertex_count());
  GoodSetCheck out;
  if (members.empty()) return out;
  BoundedBfs bfs(h.vertex_count());

  const std::size_t reach = 2 * c_big + 2;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  bfs.run(h, members, reach, [](Vertex) {});
  for (Vertex u : bfs.reached()) {
    for (Vertex w : h.neighbors(u)) {
      if (bfs.depth(w) < 0 || bfs.label(w) == bfs.label(u)) continue;
      const std::size_t d = static_cast<std::size_t>(bfs.depth(u) + bfs.depth(w)) + 1;
      if (d <= reach && d < best) {
        best = d;
        out.good = false;
        out.first = std::min(members[bfs.label(u)], members[bfs.label(w)]);
        out.second = std::max(members[bfs.label(u)], members[bfs.label(w)]);
        out.distance = d;
      }
    }
  }
  if (!out.good) return out;

  const std::vector<char> near = near_short_cycles(h, c_big, bfs);
  for (Vertex v : members) {
    if (near[v]) {
      out.good = false;
      out.first = out.second = v;
      // Recover the distance to the nearest short-cycle vertex.
      const std::vector<char> on = on_short_cycle(h, c_big);
      const Vertex src[1] = {v};
      std::size_t d = 0;
      bool done = false;
      bfs.run(h, src, c_big, [&](Vertex u) {
        if (!done && on[u]) {
          d = static_cast<std::size_t>(bfs.depth(u));
          done = true;
        }
      });
      out.distance = d;
      return out;
    }
  }
  return out;
}

GoodSetResult find_good_set(const Graph& h, std::span<const Vertex> b, std::size_t k_target,
                            std::uint64_t c_big) {
  const VertexSet pool = make_vertex_set({b.begin(), b.end()}, h.vertex_count());
  GoodSetResult out;
  out.requested = k_target;
  BoundedBfs bfs(h.vertex_count());
  const std::vector<char> near = near_short_cycles(h, c_big, bfs);
  std::vector<char> blocked(h.vertex_count(), 0);
  for (Vertex v : pool) {
    if (out.set.size() >= k_target) break;
    if (near[v] || blocked[v]) continue;
    out.set.push_back(v);
    const Vertex src[1] = {v};
    bfs.run(h, src, 2 * c_big + 2, [&](Vertex u) { blocked[u] = 1; });
  }
  out.shortfall = out.set.size() < k_target;
  return out;
}

}  // namespace corrmatch
