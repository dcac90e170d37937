#include "corrmatch/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "corrmatch/error.hpp"

namespace corrmatch {

FlowNetwork::FlowNetwork(int nodes) : head_(static_cast<std::size_t>(nodes), -1) {
  require(nodes >= 2, ErrorCode::kInvalidArgument, "flow network needs at least two nodes");
}

void FlowNetwork::add_arc(int u, int v, Cap cap, Cap reverse_cap) {
  require(cap >= 0 && reverse_cap >= 0, ErrorCode::kInvalidArgument, "negative arc capacity");
  arcs_.push_back({v, head_[u], cap});
  head_[u] = static_cast<int>(arcs_.size()) - 1;
  arcs_.push_back({u, head_[v], reverse_cap});
  head_[v] = static_cast<int>(arcs_.size()) - 1;
}

bool FlowNetwork::build_levels(int source, int sink) {
  level_.assign(head_.size(), -1);
  std::vector<int> queue{source};
  level_[source] = 0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const int u = queue[qi];
    for (int a = head_[u]; a != -1; a = arcs_[a].next) {
      if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
        level_[arcs_[a].to] = level_[u] + 1;
        queue.push_back(arcs_[a].to);
      }
    }
  }
  return level_[sink] >= 0;
}

FlowNetwork::Cap FlowNetwork::augment(int u, int sink, Cap limit) {
  if (u == sink) return limit;
  Cap pushed_total = 0;
  for (int& a = cursor_[u]; a != -1; a = arcs_[a].next) {
    Arc& arc = arcs_[a];
    if (arc.cap <= 0 || level_[arc.to] != level_[u] + 1) continue;
    const Cap pushed = augment(arc.to, sink, std::min(limit - pushed_total, arc.cap));
    if (pushed > 0) {
      arc.cap -= pushed;
      arcs_[a ^ 1].cap += pushed;
      pushed_total += pushed;
      if (pushed_total == limit) return pushed_total;
    }
  }
  level_[u] = -1;
  return pushed_total;
}

FlowNetwork::Cap FlowNetwork::max_flow(int source, int sink) {
  source_ = source;
  sink_ = sink;
  Cap flow = 0;
  while (build_levels(source, sink)) {
    cursor_ = head_;
    flow += augment(source, sink, std::numeric_limits<Cap>::max());
  }
  return flow;
}

std::vector<char> FlowNetwork::source_side() const {
  std::vector<char> seen(head_.size(), 0);
  std::vector<int> stack{source_};
  seen[source_] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int a = head_[u]; a != -1; a = arcs_[a].next) {
      if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
        seen[arcs_[a].to] = 1;
        stack.push_back(arcs_[a].to);
      }
    }
  }
  return seen;
}

std::vector<char> FlowNetwork::maximal_source_side() const {
  // Reverse search from the sink over arcs u->v that still have residual
  // capacity.
  std::vector<char> reaches(head_.size(), 0);
  std::vector<int> stack{sink_};
  reaches[sink_] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int a = head_[v]; a != -1; a = arcs_[a].next) {
      // arcs_[a] is v->w; its partner a^1 is w->v.
      const int w = arcs_[a].to;
      if (arcs_[a ^ 1].cap > 0 && !reaches[w]) {
        reaches[w] = 1;
        stack.push_back(w);
      }
    }
  }
  for (auto& r : reaches) r = !r;
  return reaches;
}

}  // namespace corrmatch
