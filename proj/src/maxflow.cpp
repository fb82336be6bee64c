#include "graspseg/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace graspseg {

CutGraph::CutGraph(int node_count) {
  if (node_count < 0) throw InvalidArgument("node count must be >= 0");
  source_cap_.assign(static_cast<std::size_t>(node_count), 0.0);
  sink_cap_.assign(static_cast<std::size_t>(node_count), 0.0);
}

CutGraph::NodeId CutGraph::add_node() {
  source_cap_.push_back(0.0);
  sink_cap_.push_back(0.0);
  return node_count() - 1;
}

void CutGraph::check_node(NodeId n) const {
  if (n < 0 || n >= node_count())
    throw InvalidArgument("cut graph node " + std::to_string(n) + " out of range");
}

namespace {
void check_capacity(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw InvalidArgument("cut graph capacities must be finite and non-negative");
}
}  // namespace

void CutGraph::add_terminal_weights(NodeId node, double source_cap, double sink_cap) {
  check_node(node);
  check_capacity(source_cap);
  check_capacity(sink_cap);
  source_cap_[static_cast<std::size_t>(node)] += source_cap;
  sink_cap_[static_cast<std::size_t>(node)] += sink_cap;
}

void CutGraph::add_edge(NodeId a, NodeId b, double cap_ab, double cap_ba) {
  check_node(a);
  check_node(b);
  if (a == b) throw InvalidArgument("cut graph self loops are not allowed");
  check_capacity(cap_ab);
  check_capacity(cap_ba);
  arcs_.push_back({a, b, cap_ab});
  arcs_.push_back({b, a, cap_ba});
}

double CutGraph::cut_cost(const std::vector<CutSide>& sides) const {
  if (sides.size() != source_cap_.size())
    throw DimensionMismatch("cut_cost: one side per node required");
  double cost = 0.0;
  for (std::size_t n = 0; n < sides.size(); ++n)
    cost += sides[n] == CutSide::Sink ? source_cap_[n] : sink_cap_[n];
  for (const Arc& a : arcs_)
    if (sides[static_cast<std::size_t>(a.from)] == CutSide::Source &&
        sides[static_cast<std::size_t>(a.to)] == CutSide::Sink)
      cost += a.capacity;
  return cost;
}

namespace {

class BkSolver {
 public:
  explicit BkSolver(const CutGraph& g) : n_(static_cast<std::size_t>(g.node_count())) {
    tr_cap_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto id = static_cast<CutGraph::NodeId>(i);
      tr_cap_[i] = g.source_capacity(id) - g.sink_capacity(id);
    }
    const auto& arcs = g.arcs();
    head_.resize(arcs.size());
    next_.resize(arcs.size());
    r_cap_.resize(arcs.size());
    first_.assign(n_, kNone);
    // Arcs come in sister pairs (2e, 2e+1).
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      head_[a] = arcs[a].to;
      r_cap_[a] = arcs[a].capacity;
      const auto from = static_cast<std::size_t>(arcs[a].from);
      next_[a] = first_[from];
      first_[from] = static_cast<int>(a);
    }
    parent_.assign(n_, kNone);
    is_sink_.assign(n_, 0);
    active_.assign(n_, 0);
    ts_.assign(n_, 0);
    dist_.assign(n_, 0);
  }

  void run() {
    for (std::size_t i = 0; i < n_; ++i) {
      if (tr_cap_[i] > 0.0) {
        is_sink_[i] = 0;
        parent_[i] = kTerminal;
        set_active(static_cast<int>(i));
        dist_[i] = 1;
      } else if (tr_cap_[i] < 0.0) {
        is_sink_[i] = 1;
        parent_[i] = kTerminal;
        set_active(static_cast<int>(i));
        dist_[i] = 1;
      }
    }

    int current = -1;
    while (true) {
      int i = current;
      if (i >= 0) {
        active_[static_cast<std::size_t>(i)] = 0;
        if (parent_[static_cast<std::size_t>(i)] == kNone) i = -1;
      }
      if (i < 0) {
        i = next_active();
        if (i < 0) break;
      }
      const auto iu = static_cast<std::size_t>(i);

      int meet = kNone;
      if (!is_sink_[iu]) {
        for (int a = first_[iu]; a != kNone; a = next_[static_cast<std::size_t>(a)]) {
          if (r_cap_[static_cast<std::size_t>(a)] <= 0.0) continue;
          const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]);
          if (parent_[j] == kNone) {
            is_sink_[j] = 0;
            parent_[j] = sister(a);
            ts_[j] = ts_[iu];
            dist_[j] = dist_[iu] + 1;
            set_active(static_cast<int>(j));
          } else if (is_sink_[j]) {
            meet = a;
            break;
          } else if (ts_[j] <= ts_[iu] && dist_[j] > dist_[iu]) {
            parent_[j] = sister(a);
            ts_[j] = ts_[iu];
            dist_[j] = dist_[iu] + 1;
          }
        }
      } else {
        for (int a = first_[iu]; a != kNone; a = next_[static_cast<std::size_t>(a)]) {
          if (r_cap_[static_cast<std::size_t>(sister(a))] <= 0.0) continue;
          const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]);
          if (parent_[j] == kNone) {
            is_sink_[j] = 1;
            parent_[j] = sister(a);
            ts_[j] = ts_[iu];
            dist_[j] = dist_[iu] + 1;
            set_active(static_cast<int>(j));
          } else if (!is_sink_[j]) {
            meet = sister(a);
            break;
          } else if (ts_[j] <= ts_[iu] && dist_[j] > dist_[iu]) {
            parent_[j] = sister(a);
            ts_[j] = ts_[iu];
            dist_[j] = dist_[iu] + 1;
          }
        }
      }

      ++time_;
      if (meet != kNone) {
        active_[iu] = 1;  // keep expanding from i after the augmentation
        current = i;
        augment(meet);
        adopt_orphans();
      } else {
        current = -1;
      }
    }
  }

  std::vector<CutSide> sides() const {
    std::vector<CutSide> out(n_, CutSide::Source);
    for (std::size_t i = 0; i < n_; ++i)
      if (parent_[i] != kNone && is_sink_[i]) out[i] = CutSide::Sink;
    return out;
  }

 private:
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;
  static constexpr int kInfiniteDist = std::numeric_limits<int>::max();

  static int sister(int a) { return a ^ 1; }

  void set_active(int i) {
    auto& flag = active_[static_cast<std::size_t>(i)];
    if (!flag) {
      flag = 1;
      queue_.push_back(i);
    }
  }

  int next_active() {
    while (!queue_.empty()) {
      const int i = queue_.front();
      queue_.pop_front();
      active_[static_cast<std::size_t>(i)] = 0;
      if (parent_[static_cast<std::size_t>(i)] != kNone) return i;
    }
    return -1;
  }

  void set_orphan_front(std::size_t i) {
    parent_[i] = kOrphan;
    orphans_.push_front(static_cast<int>(i));
  }
  void set_orphan_rear(std::size_t i) {
    parent_[i] = kOrphan;
    orphans_.push_back(static_cast<int>(i));
  }

  // `middle` runs from a source-tree node to a sink-tree node.
  void augment(int middle) {
    const auto mid = static_cast<std::size_t>(middle);
    double bottleneck = r_cap_[mid];

    auto i = static_cast<std::size_t>(head_[static_cast<std::size_t>(sister(middle))]);
    while (parent_[i] != kTerminal) {
      const auto a = static_cast<std::size_t>(parent_[i]);
      bottleneck = std::min(bottleneck, r_cap_[static_cast<std::size_t>(sister(static_cast<int>(a)))]);
      i = static_cast<std::size_t>(head_[a]);
    }
    bottleneck = std::min(bottleneck, tr_cap_[i]);

    i = static_cast<std::size_t>(head_[mid]);
    while (parent_[i] != kTerminal) {
      const auto a = static_cast<std::size_t>(parent_[i]);
      bottleneck = std::min(bottleneck, r_cap_[a]);
      i = static_cast<std::size_t>(head_[a]);
    }
    bottleneck = std::min(bottleneck, -tr_cap_[i]);

    r_cap_[static_cast<std::size_t>(sister(middle))] += bottleneck;
    r_cap_[mid] -= bottleneck;

    i = static_cast<std::size_t>(head_[static_cast<std::size_t>(sister(middle))]);
    while (parent_[i] != kTerminal) {
      const auto a = static_cast<std::size_t>(parent_[i]);
      const auto s = static_cast<std::size_t>(sister(static_cast<int>(a)));
      r_cap_[a] += bottleneck;
      r_cap_[s] -= bottleneck;
      const auto up = static_cast<std::size_t>(head_[a]);
      if (r_cap_[s] <= 0.0) {
        r_cap_[s] = 0.0;
        set_orphan_front(i);
      }
      i = up;
    }
    tr_cap_[i] -= bottleneck;
    if (tr_cap_[i] <= 0.0) {
      tr_cap_[i] = 0.0;
      set_orphan_front(i);
    }

    i = static_cast<std::size_t>(head_[mid]);
    while (parent_[i] != kTerminal) {
      const auto a = static_cast<std::size_t>(parent_[i]);
      const auto s = static_cast<std::size_t>(sister(static_cast<int>(a)));
      r_cap_[s] += bottleneck;
      r_cap_[a] -= bottleneck;
      const auto up = static_cast<std::size_t>(head_[a]);
      if (r_cap_[a] <= 0.0) {
        r_cap_[a] = 0.0;
        set_orphan_front(i);
      }
      i = up;
    }
    tr_cap_[i] += bottleneck;
    if (tr_cap_[i] >= 0.0) {
      tr_cap_[i] = 0.0;
      set_orphan_front(i);
    }
  }

  void adopt_orphans() {
    while (!orphans_.empty()) {
      const auto i = static_cast<std::size_t>(orphans_.front());
      orphans_.pop_front();
      process_orphan(i, is_sink_[i] != 0);
    }
  }

  // Residual capacity that lets an orphan in the given tree hang below
  // neighbour head(a).
  double tree_cap(int a, bool sink_tree) const {
    return sink_tree ? r_cap_[static_cast<std::size_t>(a)]
                     : r_cap_[static_cast<std::size_t>(sister(a))];
  }

  void process_orphan(std::size_t i, bool sink_tree) {
    int best_arc = kNone;
    int best_dist = kInfiniteDist;

    for (int a0 = first_[i]; a0 != kNone; a0 = next_[static_cast<std::size_t>(a0)]) {
      if (tree_cap(a0, sink_tree) <= 0.0) continue;
      auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(a0)]);
      if (static_cast<bool>(is_sink_[j]) != sink_tree || parent_[j] == kNone) continue;

      // Walk to the terminal to confirm the candidate is still rooted.
      int d = 0;
      while (true) {
        if (ts_[j] == time_) {
          d += dist_[j];
          break;
        }
        const int a = parent_[j];
        ++d;
        if (a == kTerminal) {
          ts_[j] = time_;
          dist_[j] = 1;
          break;
        }
        if (a == kOrphan) {
          d = kInfiniteDist;
          break;
        }
        j = static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]);
      }
      if (d == kInfiniteDist) continue;
      if (d < best_dist) {
        best_arc = a0;
        best_dist = d;
      }
      for (j = static_cast<std::size_t>(head_[static_cast<std::size_t>(a0)]); ts_[j] != time_;
           j = static_cast<std::size_t>(head_[static_cast<std::size_t>(parent_[j])])) {
        ts_[j] = time_;
        dist_[j] = d--;
      }
    }

    if (best_arc != kNone) {
      parent_[i] = best_arc;
      ts_[i] = time_;
      dist_[i] = best_dist + 1;
      return;
    }

    parent_[i] = kNone;
    for (int a0 = first_[i]; a0 != kNone; a0 = next_[static_cast<std::size_t>(a0)]) {
      const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(a0)]);
      if (static_cast<bool>(is_sink_[j]) != sink_tree) continue;
      const int a = parent_[j];
      if (a == kNone) continue;
      if (tree_cap(a0, sink_tree) > 0.0) set_active(static_cast<int>(j));
      if (a != kTerminal && a != kOrphan && static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]) == i)
        set_orphan_rear(j);
    }
  }

  std::size_t n_;
  std::vector<double> tr_cap_;
  std::vector<int> head_, next_;
  std::vector<double> r_cap_;
  std::vector<int> first_;
  std::vector<int> parent_;
  std::vector<std::uint8_t> is_sink_, active_;
  std::vector<long> ts_;
  std::vector<int> dist_;
  std::deque<int> queue_;
  std::deque<int> orphans_;
  long time_ = 0;
};

}  // namespace

MinCutResult min_cut(const CutGraph& graph) {
  BkSolver solver(graph);
  solver.run();
  MinCutResult out;
  out.sides = solver.sides();
  out.cut_value = graph.cut_cost(out.sides);
  return out;
}

}  // namespace graspseg
