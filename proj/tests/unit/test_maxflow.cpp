#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>
#include <random>

#include "graspseg/maxflow.hpp"
#include "oracles.hpp"

using namespace graspseg;

namespace {

// Edmonds-Karp on a dense residual matrix; node n is the source, n+1 the sink.
double max_flow_oracle(const CutGraph& g) {
  const int n = g.node_count() + 2, s = n - 2, t = n - 1;
  std::vector<std::vector<double>> cap(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < g.node_count(); ++i) {
    cap[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] += g.source_capacity(i);
    cap[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] += g.sink_capacity(i);
  }
  for (const auto& a : g.arcs()) cap[static_cast<std::size_t>(a.from)][static_cast<std::size_t>(a.to)] += a.capacity;
  double flow = 0;
  for (;;) {
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    parent[static_cast<std::size_t>(s)] = s;
    std::deque<int> q{s};
    while (!q.empty() && parent[static_cast<std::size_t>(t)] < 0) {
      const int u = q.front();
      q.pop_front();
      for (int v = 0; v < n; ++v)
        if (parent[static_cast<std::size_t>(v)] < 0 && cap[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] > 0) {
          parent[static_cast<std::size_t>(v)] = u;
          q.push_back(v);
        }
    }
    if (parent[static_cast<std::size_t>(t)] < 0) return flow;
    double b = std::numeric_limits<double>::infinity();
    for (int v = t; v != s; v = parent[static_cast<std::size_t>(v)])
      b = std::min(b, cap[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])][static_cast<std::size_t>(v)]);
    for (int v = t; v != s; v = parent[static_cast<std::size_t>(v)]) {
      const int u = parent[static_cast<std::size_t>(v)];
      cap[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] -= b;
      cap[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] += b;
    }
    flow += b;
  }
}

CutGraph random_graph(std::mt19937_64& rng, int n, double density, int max_cap) {
  CutGraph g(n);
  std::uniform_int_distribution<int> cap(0, max_cap);
  std::bernoulli_distribution edge(density), terminal(0.6);
  for (int i = 0; i < n; ++i)
    g.add_terminal_weights(i, terminal(rng) ? cap(rng) : 0, terminal(rng) ? cap(rng) : 0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (edge(rng)) g.add_edge(a, b, cap(rng), cap(rng));
  return g;
}

}  // namespace

TEST_CASE("single node goes to the cheaper side") {
  CutGraph g(1);
  g.add_terminal_weights(0, 5, 3);
  const auto r = min_cut(g);
  CHECK(r.sides[0] == CutSide::Source);
  CHECK(r.cut_value == 3.0);

  CutGraph h(1);
  h.add_terminal_weights(0, 3, 5);
  CHECK(min_cut(h).sides[0] == CutSide::Sink);
  CHECK(min_cut(h).cut_value == 3.0);
}

TEST_CASE("free nodes stay on the source side") {
  CutGraph g(3);
  g.add_terminal_weights(0, 0, 4);
  const auto r = min_cut(g);
  CHECK(r.cut_value == 0.0);
  CHECK(r.sides[0] == CutSide::Sink);
  CHECK(r.sides[1] == CutSide::Source);
  CHECK(r.sides[2] == CutSide::Source);
}

TEST_CASE("a clamped node follows its clamp") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 50; ++t) {
    auto g = random_graph(rng, 8, 0.5, 20);
    g.add_terminal_weights(3, 1e9, 0);
    g.add_terminal_weights(5, 0, 1e9);
    const auto r = min_cut(g);
    CHECK(r.sides[3] == CutSide::Source);
    CHECK(r.sides[5] == CutSide::Sink);
  }
}

TEST_CASE("two-node chain") {
  CutGraph g(2);
  g.add_terminal_weights(0, 10, 0);
  g.add_terminal_weights(1, 0, 10);
  g.add_edge(0, 1, 4, 100);
  const auto r = min_cut(g);
  CHECK(r.cut_value == 4.0);
  CHECK(r.sides[0] == CutSide::Source);
  CHECK(r.sides[1] == CutSide::Sink);
}

TEST_CASE("graph construction rejects bad input") {
  CutGraph g(2);
  CHECK_THROWS_AS(g.add_edge(0, 2, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(g.add_terminal_weights(0, -1, 0), InvalidArgument);
  CHECK_THROWS_AS(g.add_edge(0, 1, std::numeric_limits<double>::infinity(), 0), InvalidArgument);
  CHECK_THROWS_AS(g.add_edge(0, 1, std::nan(""), 0), InvalidArgument);
}

TEST_CASE("small graphs match exhaustive enumeration exactly") {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % 12;
    const auto g = random_graph(rng, n, 0.2 + 0.1 * (t % 7), 1 + t % 50);
    const auto r = min_cut(g);
    const auto brute = oracle::min_cut(g);
    CHECK(r.cut_value == brute.value);
    CHECK(g.cut_cost(r.sides) == r.cut_value);
  }
}

TEST_CASE("larger graphs: cut value equals the max flow of an independent solver") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 40; ++t) {
    const auto g = random_graph(rng, 20 + t, 0.15, 30);
    const auto r = min_cut(g);
    CHECK(r.cut_value == max_flow_oracle(g));
    CHECK(g.cut_cost(r.sides) == r.cut_value);
  }
}

TEST_CASE("grid graphs with fractional capacities") {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 10; ++t) {
    const int h = 8, w = 9;
    CutGraph g(h * w);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const int i = r * w + c;
        g.add_terminal_weights(i, u(rng), u(rng));
        if (c + 1 < w) g.add_edge(i, i + 1, u(rng), u(rng));
        if (r + 1 < h) g.add_edge(i, i + w, u(rng), u(rng));
      }
    const auto r = min_cut(g);
    CHECK(r.cut_value == doctest::Approx(max_flow_oracle(g)).epsilon(1e-9));
    CHECK(g.cut_cost(r.sides) == r.cut_value);
  }
}
