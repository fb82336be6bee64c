#include "graspseg/felzenszwalb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace graspseg {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      std::size_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // Returns the surviving root.
  std::size_t join(std::size_t a, std::size_t b) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

  std::int64_t size(std::size_t root) const { return size_[root]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::int64_t> size_;
};

struct Edge {
  float weight;
  std::uint32_t a;
  std::uint32_t b;
};

// Neighbour offsets in (row, col); listed in the order edges are emitted for
// each pixel so that a stable sort by weight yields (weight, row, col,
// direction) ordering.
constexpr int kNeighbours[4][2] = {{0, 1}, {1, 0}, {1, 1}, {-1, 1}};

std::vector<Edge> build_edges(const DepthImage& d) {
  std::vector<Edge> edges;
  edges.reserve(d.size() * 4);
  for (int r = 0; r < d.height(); ++r) {
    for (int c = 0; c < d.width(); ++c) {
      if (!d.valid(r, c)) continue;
      for (const auto& off : kNeighbours) {
        const int rr = r + off[0];
        const int cc = c + off[1];
        if (!d.contains(rr, cc) || !d.valid(rr, cc)) continue;
        edges.push_back({std::fabs(d(r, c) - d(rr, cc)), static_cast<std::uint32_t>(d.index(r, c)),
                         static_cast<std::uint32_t>(d.index(rr, cc))});
      }
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& x, const Edge& y) { return x.weight < y.weight; });
  return edges;
}

}  // namespace

void FelzParams::validate() const {
  if (!(sigma >= 0.0)) throw InvalidArgument("felzenszwalb sigma must be >= 0");
  if (!(k > 0.0)) throw InvalidArgument("felzenszwalb k must be > 0");
  if (min_size < 1) throw InvalidArgument("felzenszwalb min_size must be >= 1");
}

int SegmentMap::valid_segment_count() const {
  return static_cast<int>(std::count(invalid.begin(), invalid.end(), false));
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& t : taps) t /= sum;
  return taps;
}

DepthImage gaussian_smooth(const DepthImage& depth, double sigma) {
  if (sigma < 0.0) throw InvalidArgument("gaussian_smooth: sigma must be >= 0");
  if (sigma == 0.0 || depth.empty()) return depth;

  const auto taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = depth.height();
  const int w = depth.width();

  // Blur value*validity and validity separately; their ratio is the 2D
  // renormalized average over valid pixels.
  Grid<double> num(h, w), den(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double n = 0.0, m = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        const int cc = c + t;
        if (cc < 0 || cc >= w || !depth.valid(r, cc)) continue;
        const double wt = taps[static_cast<std::size_t>(t + radius)];
        n += wt * depth(r, cc);
        m += wt;
      }
      num(r, c) = n;
      den(r, c) = m;
    }
  }

  DepthImage out(h, w, kInvalidDepth);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!depth.valid(r, c)) continue;
      double n = 0.0, m = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        const int rr = r + t;
        if (rr < 0 || rr >= h) continue;
        const double wt = taps[static_cast<std::size_t>(t + radius)];
        n += wt * num(rr, c);
        m += wt * den(rr, c);
      }
      out(r, c) = static_cast<float>(n / m);
    }
  }
  return out;
}

SegmentMap felzenszwalb_segment(const DepthImage& depth, const FelzParams& params) {
  params.validate();
  if (depth.empty()) throw InvalidArgument("felzenszwalb_segment: empty image");

  const DepthImage smoothed = gaussian_smooth(depth, params.sigma);
  const auto edges = build_edges(smoothed);

  const std::size_t n = depth.size();
  DisjointSet sets(n);
  std::vector<double> threshold(n, params.k);

  for (const Edge& e : edges) {
    std::size_t a = sets.find(e.a);
    std::size_t b = sets.find(e.b);
    if (a == b) continue;
    if (e.weight <= threshold[a] && e.weight <= threshold[b]) {
      const std::size_t root = sets.join(a, b);
      threshold[root] = e.weight + params.k / static_cast<double>(sets.size(root));
    }
  }

  // Small segments are absorbed through their cheapest boundary edge.
  for (const Edge& e : edges) {
    std::size_t a = sets.find(e.a);
    std::size_t b = sets.find(e.b);
    if (a != b && (sets.size(a) < params.min_size || sets.size(b) < params.min_size))
      sets.join(a, b);
  }

  // Invalid pixels form their own 8-connected groups.
  const int h = depth.height();
  const int w = depth.width();
  std::vector<std::int64_t> invalid_group(n, -1);
  {
    std::vector<std::size_t> stack;
    std::int64_t next = 0;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t i = depth.index(r, c);
        if (depth.valid(r, c) || invalid_group[i] >= 0) continue;
        invalid_group[i] = next;
        stack.push_back(i);
        while (!stack.empty()) {
          const std::size_t p = stack.back();
          stack.pop_back();
          const int pr = static_cast<int>(p / static_cast<std::size_t>(w));
          const int pc = static_cast<int>(p % static_cast<std::size_t>(w));
          for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
              const int rr = pr + dr, cc = pc + dc;
              if (!depth.contains(rr, cc) || depth.valid(rr, cc)) continue;
              const std::size_t q = depth.index(rr, cc);
              if (invalid_group[q] >= 0) continue;
              invalid_group[q] = next;
              stack.push_back(q);
            }
          }
        }
        ++next;
      }
    }
  }

  SegmentMap out;
  out.labels = Grid<std::int32_t>(h, w, -1);
  std::vector<std::int32_t> id_of_root(n, -1);
  std::vector<std::int32_t> id_of_invalid(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::int32_t* slot = nullptr;
    bool is_invalid = false;
    if (invalid_group[i] >= 0) {
      slot = &id_of_invalid[static_cast<std::size_t>(invalid_group[i])];
      is_invalid = true;
    } else {
      slot = &id_of_root[sets.find(i)];
    }
    if (*slot < 0) {
      *slot = out.segment_count++;
      out.segment_sizes.push_back(0);
      out.invalid.push_back(is_invalid);
    }
    out.labels[i] = *slot;
    ++out.segment_sizes[static_cast<std::size_t>(*slot)];
  }
  return out;
}

}  // namespace graspseg
