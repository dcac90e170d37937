#pragma once

#include <cstdint>
#include <vector>

namespace corrmatch {

/// Dinic's algorithm on an integer-capacity directed network.
class FlowNetwork {
 public:
  using Cap = std::int64_t;

  explicit FlowNetwork(int nodes);

  int node_count() const { return static_cast<int>(head_.size()); }

  /// Adds arc u->v with capacity `cap` and a reverse arc with capacity
  /// `reverse_cap` (0 for a plain directed arc).
  void add_arc(int u, int v, Cap cap, Cap reverse_cap = 0);

  Cap max_flow(int source, int sink);

  /// After max_flow: nodes reachable from the source in the residual network
  /// (the inclusion-minimal source side of a minimum cut).
  std::vector<char> source_side() const;

  /// After max_flow: nodes that cannot reach the sink in the residual network
  /// (the inclusion-maximal source side of a minimum cut).
  std::vector<char> maximal_source_side() const;

 private:
  struct Arc {
    int to;
    int next;
    Cap cap;
  };

  bool build_levels(int source, int sink);
  Cap augment(int u, int sink, Cap limit);

  std::vector<int> head_;
  std::vector<Arc> arcs_;
  std::vector<int> level_;
  std::vector<int> cursor_;
  int source_ = -1;
  int sink_ = -1;
};

}  // namespace corrmatch
