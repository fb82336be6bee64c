#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "graspseg/augment.hpp"
#include "oracles.hpp"

using namespace graspseg;

namespace {

RgbImage random_rgb(std::mt19937_64& rng, int h, int w) {
  std::uniform_int_distribution<int> u(0, 255);
  RgbImage img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = Rgb{static_cast<std::uint8_t>(u(rng)), static_cast<std::uint8_t>(u(rng)), static_cast<std::uint8_t>(u(rng))};
  return img;
}

LabeledFrame random_frame(std::mt19937_64& rng, int h, int w) {
  return {random_rgb(rng, h, w), oracle::random_blobs(rng, h, w, 3)};
}

// Smooth pattern so bilinear resampling error stays small.
RgbaImage smooth_object(int h, int w) {
  RgbaImage o(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      o(r, c) = Rgba{static_cast<std::uint8_t>(100 + 2 * r), static_cast<std::uint8_t>(60 + 3 * c), 90, 255};
  return o;
}

}  // namespace

TEST_CASE("split sizes follow the repeat rule") {
  const auto plan = plan_srn_dataset(297, 1800, 80, AugmentSpec{});
  std::map<AugmentSplit, std::size_t> n;
  for (const auto& it : plan) ++n[it.split];
  CHECK(n[AugmentSplit::Orig] == 297);
  CHECK(n[AugmentSplit::FG] == 891);
  CHECK(n[AugmentSplit::BG] == 5400);
  CHECK(n[AugmentSplit::FGBG] == 5400);
  CHECK(plan.size() == 11988);
}

TEST_CASE("resources cycle and scale/rotation stay in range") {
  AugmentSpec spec;
  spec.scale_min = 0.5;
  spec.scale_max = 0.9;
  spec.rotation_min_deg = 10;
  spec.rotation_max_deg = 20;
  const auto plan = plan_srn_dataset(5, 3, 2, spec);
  for (const auto& it : plan) {
    CHECK(it.frame == it.index % 5);
    if (it.background) CHECK(*it.background == it.index % 3);
    if (it.object) {
      CHECK(*it.object == it.index % 2);
      CHECK(it.scale >= 0.5);
      CHECK(it.scale <= 0.9);
      CHECK(it.rotation_deg >= 10);
      CHECK(it.rotation_deg <= 20);
    }
    const bool bg = it.split == AugmentSplit::BG || it.split == AugmentSplit::FGBG;
    const bool fg = it.split == AugmentSplit::FG || it.split == AugmentSplit::FGBG;
    CHECK(it.background.has_value() == bg);
    CHECK(it.object.has_value() == fg);
  }
}

TEST_CASE("missing resources for a requested split throw") {
  CHECK_THROWS_AS(plan_srn_dataset(0, 3, 3, {}), InvalidArgument);
  CHECK_THROWS_AS(plan_srn_dataset(3, 0, 3, {}), InvalidArgument);
  CHECK_THROWS_AS(plan_srn_dataset(3, 3, 0, {}), InvalidArgument);
  AugmentSpec only_bg;
  only_bg.splits = {AugmentSplit::BG};
  CHECK(plan_srn_dataset(3, 4, 0, only_bg).size() == 12);
  AugmentSpec bad;
  bad.repeats = 0;
  CHECK_THROWS_AS(plan_srn_dataset(3, 3, 3, bad), InvalidArgument);
}

TEST_CASE("background substitution examples and splice oracle") {
  std::mt19937_64 rng(91);
  const auto rgb = random_rgb(rng, 12, 14), bg = random_rgb(rng, 12, 14);
  CHECK(substitute_background({rgb, BinaryMask(12, 14, 1)}, bg).rgb == rgb);
  CHECK(substitute_background({rgb, BinaryMask(12, 14, 0)}, bg).rgb == bg);
  for (int t = 0; t < 50; ++t) {
    const auto f = random_frame(rng, 12, 14);
    const auto out = substitute_background(f, bg);
    CHECK(out.manipulator_mask == f.manipulator_mask);
    for (std::size_t i = 0; i < f.rgb.size(); ++i) CHECK(out.rgb[i] == (f.manipulator_mask[i] ? f.rgb[i] : bg[i]));
  }
  CHECK_THROWS_AS(substitute_background({rgb, BinaryMask(12, 14)}, RgbImage(12, 13)), DimensionMismatch);
}

TEST_CASE("fit_background: identity, constant upscale, centre crop") {
  std::mt19937_64 rng(92);
  const auto bg = random_rgb(rng, 10, 10);
  CHECK(fit_background(bg, 10, 10) == bg);
  const RgbImage flat(3, 5, Rgb{7, 8, 9});
  const auto big = fit_background(flat, 30, 20);
  CHECK(big.height() == 30);
  CHECK(big.width() == 20);
  for (std::size_t i = 0; i < big.size(); ++i) CHECK(big[i] == Rgb{7, 8, 9});
  // Left half red, right half blue; a tall crop keeps the middle columns.
  RgbImage halves(10, 40);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 40; ++c) halves(r, c) = c < 20 ? Rgb{255, 0, 0} : Rgb{0, 0, 255};
  const auto crop = fit_background(halves, 10, 10);
  CHECK(crop(5, 0) == Rgb{255, 0, 0});
  CHECK(crop(5, 9) == Rgb{0, 0, 255});
}

TEST_CASE("overlay: transparent object, opaque square, full turn") {
  std::mt19937_64 rng(93);
  const auto f = random_frame(rng, 41, 51);
  CHECK(overlay_foreground(f, RgbaImage(9, 9), 1.0, 30.0).rgb == f.rgb);

  LabeledFrame full{f.rgb, BinaryMask(41, 51, 1)};
  const RgbaImage square(11, 11, Rgba{250, 250, 0, 255});
  const auto o = overlay_foreground(full, square, 1.0, 0.0);
  for (int r = 15; r <= 25; ++r)
    for (int c = 20; c <= 30; ++c) {
      CHECK(o.manipulator_mask(r, c) == 0);
      CHECK(o.rgb(r, c) == Rgb{250, 250, 0});
    }
  CHECK(o.manipulator_mask(5, 5) == 1);
  CHECK(o.rgb(5, 5) == f.rgb(5, 5));

  const auto obj = smooth_object(17, 23);
  const auto a = overlay_foreground(f, obj, 1.0, 0.0), b = overlay_foreground(f, obj, 1.0, 360.0);
  double diff = 0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i)
    diff += std::abs(a.rgb[i].r - b.rgb[i].r) + std::abs(a.rgb[i].g - b.rgb[i].g) + std::abs(a.rgb[i].b - b.rgb[i].b);
  CHECK(diff / (3.0 * static_cast<double>(a.rgb.size())) <= 1.0);
  CHECK_THROWS_AS(overlay_foreground(f, obj, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("overlay only clears manipulator pixels, never adds them") {
  std::mt19937_64 rng(94);
  for (int t = 0; t < 20; ++t) {
    const auto f = random_frame(rng, 30, 30);
    const auto o = overlay_foreground(f, smooth_object(12, 9), 0.5 + 0.1 * t, 17.0 * t);
    CHECK(mask_subset(o.manipulator_mask, f.manipulator_mask));
  }
}

TEST_CASE("tiny-frame dataset reproduces the split table and is deterministic") {
  std::mt19937_64 rng(95);
  std::vector<LabeledFrame> frames;
  for (int i = 0; i < 297; ++i) frames.push_back(random_frame(rng, 4, 4));
  std::vector<RgbImage> bgs;
  for (int i = 0; i < 1800; ++i) bgs.push_back(random_rgb(rng, 3, 5));
  std::vector<RgbaImage> objs(80, RgbaImage(2, 2, Rgba{1, 2, 3, 255}));

  std::size_t streamed = 0;
  const auto set = build_srn_dataset(frames, bgs, objs, AugmentSpec{},
                                     [&](const AugmentItem&, const std::string&, const LabeledFrame&) { ++streamed; });
  CHECK(streamed == 11988);
  CHECK(set.splits.at("Orig").size() == 297);
  CHECK(set.splits.at("FG").size() == 891);
  CHECK(set.splits.at("BG").size() == 5400);
  CHECK(set.splits.at("FGBG").size() == 5400);
  CHECK(set.splits.at("All").size() == 11988);
  std::set<std::string> names;
  for (const auto& im : set.images) names.insert(im.file_name);
  CHECK(names.size() == 11988);
  for (const auto& a : set.annotations) CHECK(a.category_id == kManipulatorClassId);
  CHECK_NOTHROW(set.validate());

  AugmentSpec few;
  few.repeats = 1;
  const std::span<const LabeledFrame> some(frames.data(), 6);
  const std::span<const RgbImage> somebg(bgs.data(), 4);
  const std::span<const RgbaImage> someobj(objs.data(), 3);
  CHECK(build_srn_dataset(some, somebg, someobj, few) == build_srn_dataset(some, somebg, someobj, few));
}
