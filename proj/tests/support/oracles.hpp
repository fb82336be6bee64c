#pragma once

// Slow, obviously-correct reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "graspseg/core.hpp"
#include "graspseg/maxflow.hpp"

namespace oracle {

using graspseg::BinaryMask;

inline BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p = 0.5) {
  std::bernoulli_distribution b(p);
  BinaryMask m(h, w);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = b(rng) ? 1 : 0;
  return m;
}

/// Blobby mask: union of random rectangles, more realistic than white noise.
inline BinaryMask random_blobs(std::mt19937_64& rng, int h, int w, int count) {
  BinaryMask m(h, w);
  std::uniform_int_distribution<int> rr(0, h - 1), cc(0, w - 1), sz(1, std::max(1, std::min(h, w) / 2));
  for (int k = 0; k < count; ++k) {
    const int r0 = rr(rng), c0 = cc(rng), hh = sz(rng), ww = sz(rng);
    for (int r = r0; r < std::min(h, r0 + hh); ++r)
      for (int c = c0; c < std::min(w, c0 + ww); ++c) m(r, c) = 1;
  }
  return m;
}

inline bool at(const BinaryMask& m, int r, int c, bool outside) {
  if (r < 0 || c < 0 || r >= m.height() || c >= m.width()) return outside;
  return m(r, c) != 0;
}

/// Window rows/cols [i - a, i - a + n); every pixel must be set.
inline BinaryMask erode(const BinaryMask& m, int n, int a, bool outside = false) {
  BinaryMask out(m.height(), m.width());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      bool all = true;
      for (int dr = 0; dr < n && all; ++dr)
        for (int dc = 0; dc < n && all; ++dc) all = at(m, r - a + dr, c - a + dc, outside);
      out(r, c) = all;
    }
  return out;
}

/// Reflected window [i - (n - 1 - a), i + a]; any pixel set.
inline BinaryMask dilate(const BinaryMask& m, int n, int a, bool outside = false) {
  BinaryMask out(m.height(), m.width());
  const int lo = n - 1 - a;
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      bool any = false;
      for (int dr = -lo; dr <= a && !any; ++dr)
        for (int dc = -lo; dc <= a && !any; ++dc) any = at(m, r + dr, c + dc, outside);
      out(r, c) = any;
    }
  return out;
}

/// Complement of the border-reachable part of the complement (4-connected BFS).
inline BinaryMask fill_holes(const BinaryMask& m) {
  const int h = m.height(), w = m.width();
  BinaryMask reach(h, w);
  std::deque<std::pair<int, int>> q;
  auto push = [&](int r, int c) {
    if (r < 0 || c < 0 || r >= h || c >= w || m(r, c) || reach(r, c)) return;
    reach(r, c) = 1;
    q.emplace_back(r, c);
  };
  for (int r = 0; r < h; ++r) {
    push(r, 0);
    push(r, w - 1);
  }
  for (int c = 0; c < w; ++c) {
    push(0, c);
    push(h - 1, c);
  }
  while (!q.empty()) {
    auto [r, c] = q.front();
    q.pop_front();
    push(r + 1, c);
    push(r - 1, c);
    push(r, c + 1);
    push(r, c - 1);
  }
  BinaryMask out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = reach[i] ? 0 : 1;
  return out;
}

/// Exhaustive minimum over all 2^n side assignments.
struct BruteCut {
  double value = std::numeric_limits<double>::infinity();
  std::vector<graspseg::CutSide> sides;
};

inline BruteCut min_cut(const graspseg::CutGraph& g) {
  const int n = g.node_count();
  BruteCut best;
  std::vector<graspseg::CutSide> sides(static_cast<std::size_t>(n));
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    for (int i = 0; i < n; ++i)
      sides[static_cast<std::size_t>(i)] = (bits >> i) & 1u ? graspseg::CutSide::Sink : graspseg::CutSide::Source;
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      if (sides[static_cast<std::size_t>(i)] == graspseg::CutSide::Sink) v += g.source_capacity(i);
      else v += g.sink_capacity(i);
    }
    for (const auto& a : g.arcs())
      if (sides[static_cast<std::size_t>(a.from)] == graspseg::CutSide::Source &&
          sides[static_cast<std::size_t>(a.to)] == graspseg::CutSide::Sink)
        v += a.capacity;
    if (v < best.value) {
      best.value = v;
      best.sides = sides;
    }
  }
  return best;
}

}  // namespace oracle
