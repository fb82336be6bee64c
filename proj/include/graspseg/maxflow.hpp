#pragma once

#include <cstdint>
#include <vector>

#include "graspseg/core.hpp"

namespace graspseg {

/// Side of an s-t cut. For segmentation the source terminal stands for
/// background and the sink terminal for foreground.
enum class CutSide : std::uint8_t { Source = 0, Sink = 1 };

/// Directed s-t graph with non-negative finite capacities.
class CutGraph {
 public:
  using NodeId = int;

  struct Arc {
    NodeId from;
    NodeId to;
    double capacity;
  };

  CutGraph() = default;
  explicit CutGraph(int node_count);

  NodeId add_node();
  int node_count() const { return static_cast<int>(source_cap_.size()); }

  /// Adds capacity on source->node and node->sink. Accumulates across calls.
  void add_terminal_weights(NodeId node, double source_cap, double sink_cap);

  /// Adds the arc pair a->b (cap_ab) and b->a (cap_ba).
  void add_edge(NodeId a, NodeId b, double cap_ab, double cap_ba);

  double source_capacity(NodeId n) const { return source_cap_[static_cast<std::size_t>(n)]; }
  double sink_capacity(NodeId n) const { return sink_cap_[static_cast<std::size_t>(n)]; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  /// Sum of capacities crossing from the source side to the sink side.
  double cut_cost(const std::vector<CutSide>& sides) const;

 private:
  void check_node(NodeId n) const;

  std::vector<double> source_cap_;
  std::vector<double> sink_cap_;
  std::vector<Arc> arcs_;
};

struct MinCutResult {
  std::vector<CutSide> sides;
  double cut_value = 0.0;
};

/// Exact minimum s-t cut via Boykov-Kolmogorov augmenting paths with tree
/// reuse. Nodes that end up in neither search tree are placed on the source
/// side.
MinCutResult min_cut(const CutGraph& graph);

}  // namespace graspseg
