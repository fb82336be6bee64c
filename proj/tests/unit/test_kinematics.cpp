#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "graspseg/kinematics.hpp"

using namespace graspseg;

namespace {

const CameraIntrinsics kK{500, 500, 320, 240};

struct Case {
  DepthImage depth;
  SegmentMap seg;
  std::vector<LinkPoint> links;
  CameraIntrinsics k;
};

Case random_case(std::mt19937_64& rng) {
  const int h = 30, w = 40;
  std::uniform_real_distribution<float> depth(400.0f, 3000.0f);
  std::bernoulli_distribution hole(0.05);
  DepthImage d(h, w);
  // Vertical bands of constant depth.
  std::vector<float> bands(5);
  for (auto& b : bands) b = depth(rng);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) d(r, c) = hole(rng) ? 0.0f : bands[static_cast<std::size_t>(c / 8)];
  Case out{d, felzenszwalb_segment(d, FelzParams{0.0, 50.0, 1}), {}, CameraIntrinsics{40, 40, 19.5, 14.5}};
  std::uniform_real_distribution<double> xy(-1200.0, 1200.0), z(-100.0, 3000.0);
  const int n = std::uniform_int_distribution<int>(0, 8)(rng);
  for (int i = 0; i < n; ++i) out.links.push_back({xy(rng), xy(rng), z(rng)});
  return out;
}

// Direct reading of the selection rule.
BinaryMask select_oracle(const Case& c, double lambda) {
  std::set<int> chosen;
  for (const auto& p : c.links) {
    if (p.z <= 0) continue;
    const int col = static_cast<int>(std::floor(c.k.fx * p.x / p.z + c.k.cx + 0.5));
    const int row = static_cast<int>(std::floor(c.k.fy * p.y / p.z + c.k.cy + 0.5));
    if (row < 0 || col < 0 || row >= c.depth.height() || col >= c.depth.width()) continue;
    const float d = c.depth(row, col);
    if (!(d > 0.0f)) continue;
    const int id = c.seg.labels(row, col);
    if (c.seg.invalid[static_cast<std::size_t>(id)]) continue;
    if (d <= p.z + lambda) chosen.insert(id);
  }
  BinaryMask m(c.depth.height(), c.depth.width());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = chosen.count(c.seg.labels[i]) ? 1 : 0;
  return m;
}

SegmentMap single_segment(int h, int w) {
  return felzenszwalb_segment(DepthImage(h, w, 1000.0f), FelzParams{0.0, 800.0, 1});
}

}  // namespace

TEST_CASE("optical-axis point maps to the principal point") {
  const auto p = project_link({0, 0, 1000}, kK);
  CHECK(p.pixel == PixelCoord{240, 320});
  CHECK(p.expected_depth_z == 1000.0);
}

TEST_CASE("off-axis point projects by hand-computed pixel") {
  const auto p = project_link({100, 50, 1000}, kK);
  CHECK(p.pixel.col == 370);
  CHECK(p.pixel.row == 265);
}

TEST_CASE("points at or behind the camera throw") {
  CHECK_THROWS_AS(project_link({0, 0, -10}, kK), BehindCamera);
  CHECK_THROWS_AS(project_link({0, 0, 0}, kK), BehindCamera);
}

TEST_CASE("bounds flag uses the image size") {
  CHECK(project_link({0, 0, 1000}, kK, 480, 640).in_bounds);
  CHECK_FALSE(project_link({0, 0, 1000}, kK, 240, 640).in_bounds);
  CHECK_FALSE(project_link({-1000, 0, 1000}, kK, 480, 640).in_bounds);
}

TEST_CASE("rounding is floor(x + 0.5)") {
  // 500 * 1 / 1000 + 320 = 320.5 rounds up; -0.5 offset rounds up to the integer.
  CHECK(project_link({1, 0, 1000}, kK).pixel.col == 321);
  CHECK(project_link({-1, 0, 1000}, kK).pixel.col == 320);
}

TEST_CASE("link on a segment at exactly its depth selects it") {
  const auto seg = single_segment(10, 10);
  const DepthImage d(10, 10, 1000.0f);
  const CameraIntrinsics k{10, 10, 4.5, 4.5};
  const std::vector<LinkPoint> links{{0, 0, 1000}};
  const auto m = select_foreground_segments(seg, d, links, k, {});
  CHECK(mask_area(m) == 100);
}

TEST_CASE("measured surface beyond z + lambda is rejected") {
  const auto seg = single_segment(10, 10);
  const DepthImage d(10, 10, 900.0f);
  const CameraIntrinsics k{10, 10, 4.5, 4.5};
  const std::vector<LinkPoint> links{{0, 0, 600}};
  CHECK(mask_area(select_foreground_segments(seg, d, links, k, FgSelectParams{200})) == 0);
  CHECK(mask_area(select_foreground_segments(seg, d, links, k, FgSelectParams{300})) == 100);
}

TEST_CASE("occluding surface in front of the link is accepted") {
  const auto seg = single_segment(10, 10);
  const DepthImage d(10, 10, 300.0f);
  const CameraIntrinsics k{10, 10, 4.5, 4.5};
  const std::vector<LinkPoint> links{{0, 0, 2000}};
  CHECK(mask_area(select_foreground_segments(seg, d, links, k, FgSelectParams{0})) == 100);
}

TEST_CASE("out-of-bounds, behind-camera and empty links contribute nothing") {
  const auto seg = single_segment(10, 10);
  const DepthImage d(10, 10, 1000.0f);
  const CameraIntrinsics k{10, 10, 4.5, 4.5};
  const std::vector<LinkPoint> links{{5000, 0, 1000}, {0, 0, -50}};
  CHECK(mask_area(select_foreground_segments(seg, d, links, k, {})) == 0);
  CHECK(mask_area(select_foreground_segments(seg, d, {}, k, {})) == 0);
}

TEST_CASE("dimension mismatch and negative lambda throw") {
  const auto seg = single_segment(10, 10);
  const CameraIntrinsics k{10, 10, 4.5, 4.5};
  CHECK_THROWS_AS(select_foreground_segments(seg, DepthImage(10, 11, 1.0f), {}, k, {}), DimensionMismatch);
  CHECK_THROWS_AS(select_foreground_segments(seg, DepthImage(10, 10, 1.0f), {}, k, FgSelectParams{-1}),
                  InvalidArgument);
}

TEST_CASE("random scenes: matches the rule, whole segments, monotone in lambda") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_case(rng);
    BinaryMask prev(c.depth.height(), c.depth.width());
    for (double lambda : {0.0, 50.0, 200.0, 800.0, 5000.0}) {
      const auto m = select_foreground_segments(c.seg, c.depth, c.links, c.k, FgSelectParams{lambda});
      CHECK(m == select_oracle(c, lambda));
      std::vector<int> state(static_cast<std::size_t>(c.seg.segment_count), -1);
      for (std::size_t i = 0; i < m.size(); ++i) {
        int& s = state[static_cast<std::size_t>(c.seg.labels[i])];
        if (s < 0) s = m[i];
        CHECK(s == m[i]);
      }
      CHECK(mask_subset(prev, m));
      prev = m;
    }
  }
}
