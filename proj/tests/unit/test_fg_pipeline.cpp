#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "graspseg/fg_pipeline.hpp"
#include "graspseg/synth.hpp"
#include "oracles.hpp"

using namespace graspseg;

namespace {

double iou_oracle(const BinaryMask& a, const BinaryMask& b) {
  std::size_t i = 0, u = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    i += a[k] && b[k];
    u += a[k] || b[k];
  }
  return u == 0 ? 1.0 : static_cast<double>(i) / static_cast<double>(u);
}

SceneBundle scene(std::uint64_t seed, double depth_noise, bool with_object = true) {
  RandomSceneOptions o;
  o.depth_noise_sigma = depth_noise;
  o.color_noise_sigma = depth_noise > 0 ? 4.0 : 0.0;
  o.with_object = with_object;
  return generate_scene(random_scene_spec(seed, o));
}

const CameraIntrinsics kK{525.0, 525.0, 319.5, 239.5};

}  // namespace

TEST_CASE("no selected segment gives an empty m0 and a degenerate result") {
  const DepthImage d(60, 80, 1500.0f);
  const RgbImage rgb(60, 80, Rgb{100, 100, 100});
  // A link far in front of the only surface fails the depth test.
  const std::vector<LinkPoint> links{{0, 0, 500}};
  const CameraIntrinsics k{60, 60, 39.5, 29.5};
  CHECK(mask_area(depth_foreground(d, links, k, {})) == 0);
  const auto r = foreground_mask(rgb, d, links, k, {}, 0);
  CHECK(r.degenerate);
  CHECK(mask_area(r.foreground) == 0);
  CHECK(r.foreground.height() == 60);
}

// On exactly constant depth the segment threshold of a large region shrinks
// towards zero, so pixels touched by the blur split off. Every other loss
// comes from the opening trimming narrow tips, and M0 never claims background.
TEST_CASE("noise-free arm-only scene: m0 misses only blurred edge pixels") {
  const int rad = static_cast<int>(std::ceil(4 * FelzParams{}.sigma));
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto s = scene(seed, 0.0, false);
    SegmentMap seg;
    const auto m0 = depth_foreground(s.depth, s.links, kK, {}, &seg);
    const auto selected = select_foreground_segments(seg, s.depth, s.links, kK, {});
    CHECK(mask_subset(m0, s.gt_arm));
    std::size_t missed_far = 0;
    for (int r = 0; r < m0.height(); ++r)
      for (int c = 0; c < m0.width(); ++c) {
        if (!s.gt_arm(r, c) || m0(r, c)) continue;
        bool near_edge = false;
        for (int dr = -rad; dr <= rad && !near_edge; ++dr)
          for (int dc = -rad; dc <= rad && !near_edge; ++dc)
            near_edge = s.depth.contains(r + dr, c + dc) && s.depth(r + dr, c + dc) != s.depth(r, c);
        missed_far += !near_edge && !selected(r, c);
      }
    CHECK(missed_far == 0);
    CHECK(iou_oracle(m0, s.gt_arm) >= 0.85);
  }
}

TEST_CASE("ring-shaped silhouette has its hole filled") {
  const int h = 80, w = 80;
  DepthImage d(h, w, 2000.0f);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int d2 = (r - 40) * (r - 40) + (c - 40) * (c - 40);
      if (d2 <= 30 * 30 && d2 >= 12 * 12) d(r, c) = 700.0f;
    }
  const CameraIntrinsics k{80, 80, 39.5, 39.5};
  // Link on the ring body, 20 px right of the centre.
  const std::vector<LinkPoint> links{{20.0 * 700 / 80, 0.0, 700}};
  const auto m0 = depth_foreground(d, links, k, {});
  CHECK(m0(40, 40) == 1);
  CHECK(m0(40, 75) == 0);
  CHECK(m0(40, 20) == 1);
}

TEST_CASE("trimap composition: examples and oracle") {
  const FgPipelineParams p;
  CHECK(build_trimap(BinaryMask(40, 40), p) == Trimap(40, 40, 0));

  BinaryMask m0(120, 120);
  for (int r = 40; r < 80; ++r)
    for (int c = 40; c < 80; ++c) m0(r, c) = 1;
  const auto t = build_trimap(m0, p);
  CHECK(t(60, 60) == 3);
  CHECK(t(40, 40) == 2);
  CHECK(t(20, 60) == 1);
  CHECK(t(0, 0) == 0);

  std::mt19937_64 rng(71);
  for (int i = 0; i < 30; ++i) {
    const auto m = oracle::random_blobs(rng, 50, 60, 3);
    FgPipelineParams q;
    q.erode_kernel = 1 + i % 10;
    q.dilate_kernel = 1 + i % 17;
    const auto tt = build_trimap(m, q);
    const auto mp = oracle::erode(m, q.erode_kernel, (q.erode_kernel - 1) / 2);
    const auto mr = oracle::dilate(m, q.dilate_kernel, (q.dilate_kernel - 1) / 2);
    CHECK(mask_subset(mp, m));
    CHECK(mask_subset(m, mr));
    for (std::size_t k = 0; k < tt.size(); ++k) CHECK(tt[k] == mp[k] + m[k] + mr[k]);
  }
}

TEST_CASE("trimap foreground takes values 2 and 3") {
  const Trimap t(1, 4, std::vector<std::uint8_t>{0, 1, 2, 3});
  CHECK(trimap_foreground(t) == BinaryMask(1, 4, std::vector<std::uint8_t>{0, 0, 1, 1}));
}

TEST_CASE("full pipeline on synthetic scenes") {
  for (std::uint64_t seed : {21u, 22u}) {
    for (double noise : {0.0, 5.0}) {
      const auto s = scene(seed, noise);
      const FgPipelineParams p;
      const auto r = foreground_mask(s.rgb, s.depth, s.links, kK, p, seed, true);
      REQUIRE_FALSE(r.degenerate);
      REQUIRE(r.debug.has_value());
      CHECK(iou_oracle(r.foreground, s.gt_foreground) >= (noise == 0.0 ? 0.97 : 0.95));

      const auto& dbg = *r.debug;
      CHECK(mask_subset(dbg.precision_mask, dbg.m0));
      CHECK(mask_subset(dbg.m0, dbg.recall_mask));
      CHECK(mask_subset(r.foreground, dbg.recall_mask));
      CHECK(mask_subset(dbg.precision_mask, r.foreground));
      CHECK(dbg.foreground == r.foreground);
      CHECK(trimap_foreground(dbg.refined_trimap) == r.foreground);
      CHECK(dbg.links.size() == s.links.size());

      CHECK(foreground_mask(s.rgb, s.depth, s.links, kK, p, seed).foreground == r.foreground);
    }
  }
}

TEST_CASE("mismatched inputs and bad kernels throw") {
  const DepthImage d(10, 10, 1000.0f);
  CHECK_THROWS_AS(foreground_mask(RgbImage(10, 11), d, {}, kK, {}, 0), DimensionMismatch);
  FgPipelineParams p;
  p.dilate_kernel = 0;
  CHECK_THROWS_AS(build_trimap(BinaryMask(5, 5), p), InvalidArgument);
}
