#include "graspseg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace graspseg {

namespace {

bool uses_objects(AugmentSplit s) { return s == AugmentSplit::FG || s == AugmentSplit::FGBG; }
bool uses_backgrounds(AugmentSplit s) { return s == AugmentSplit::BG || s == AugmentSplit::FGBG; }

std::mt19937_64 item_rng(std::uint64_t seed, AugmentSplit split, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(split), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  return std::mt19937_64(seq);
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Rgb sample_bilinear(const RgbImage& img, double y, double x) {
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, img.height() - 1);
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const double fy = std::clamp(y - y0, 0.0, 1.0), fx = std::clamp(x - x0, 0.0, 1.0);
  auto mix = [&](auto channel) {
    const double top = (1 - fx) * channel(img(y0, x0)) + fx * channel(img(y0, x1));
    const double bot = (1 - fx) * channel(img(y1, x0)) + fx * channel(img(y1, x1));
    return to_u8((1 - fy) * top + fy * bot);
  };
  return {mix([](const Rgb& p) { return double(p.r); }), mix([](const Rgb& p) { return double(p.g); }),
          mix([](const Rgb& p) { return double(p.b); })};
}

}  // namespace

const char* split_name(AugmentSplit s) {
  switch (s) {
    case AugmentSplit::Orig: return "Orig";
    case AugmentSplit::FG: return "FG";
    case AugmentSplit::BG: return "BG";
    case AugmentSplit::FGBG: return "FGBG";
  }
  return "?";
}

void AugmentSpec::validate() const {
  if (repeats < 1) throw InvalidArgument("augment repeats must be >= 1");
  if (!(scale_min > 0.0) || scale_max < scale_min)
    throw InvalidArgument("augment scale range must satisfy 0 < min <= max");
  if (rotation_max_deg < rotation_min_deg) throw InvalidArgument("augment rotation range inverted");
}

std::vector<AugmentItem> plan_srn_dataset(std::size_t frames, std::size_t backgrounds,
                                          std::size_t objects, const AugmentSpec& spec) {
  spec.validate();
  if (frames == 0) throw InvalidArgument("augment: no labeled frames");
  const auto r = static_cast<std::size_t>(spec.repeats);

  std::vector<AugmentItem> items;
  for (AugmentSplit split : spec.splits) {
    if (uses_objects(split) && objects == 0)
      throw InvalidArgument(std::string("augment: split ") + split_name(split) +
                            " needs foreground objects");
    if (uses_backgrounds(split) && backgrounds == 0)
      throw InvalidArgument(std::string("augment: split ") + split_name(split) +
                            " needs background images");

    std::size_t count = frames;
    if (split != AugmentSplit::Orig) {
      std::size_t plentiful = frames;
      if (uses_objects(split)) plentiful = std::max(plentiful, objects);
      if (uses_backgrounds(split)) plentiful = std::max(plentiful, backgrounds);
      count = r * plentiful;
    }

    for (std::size_t i = 0; i < count; ++i) {
      AugmentItem item;
      item.split = split;
      item.index = i;
      item.frame = i % frames;
      if (uses_backgrounds(split)) item.background = i % backgrounds;
      if (uses_objects(split)) {
        item.object = i % objects;
        auto rng = item_rng(spec.seed, split, i);
        item.scale = std::uniform_real_distribution<double>(spec.scale_min, spec.scale_max)(rng);
        item.rotation_deg = spec.rotation_max_deg > spec.rotation_min_deg
                                ? std::uniform_real_distribution<double>(spec.rotation_min_deg,
                                                                         spec.rotation_max_deg)(rng)
                                : spec.rotation_min_deg;
      }
      items.push_back(item);
    }
  }
  return items;
}

RgbImage fit_background(const RgbImage& background, int height, int width) {
  if (background.empty()) throw InvalidArgument("fit_background: empty background");
  if (background.height() == height && background.width() == width) return background;
  const double scale = std::max(static_cast<double>(height) / background.height(),
                                static_cast<double>(width) / background.width());
  const double scaled_h = background.height() * scale, scaled_w = background.width() * scale;
  const double off_y = (scaled_h - height) / 2.0, off_x = (scaled_w - width) / 2.0;
  RgbImage out(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      out(r, c) = sample_bilinear(background, (r + off_y + 0.5) / scale - 0.5,
                                  (c + off_x + 0.5) / scale - 0.5);
  return out;
}

LabeledFrame substitute_background(const LabeledFrame& frame, const RgbImage& background) {
  require_same_shape(frame.rgb, frame.manipulator_mask, "substitute_background");
  require_same_shape(frame.rgb, background, "substitute_background");
  LabeledFrame out = frame;
  for (std::size_t i = 0; i < out.rgb.size(); ++i)
    if (!frame.manipulator_mask[i]) out.rgb[i] = background[i];
  return out;
}

LabeledFrame overlay_foreground(const LabeledFrame& frame, const RgbaImage& obj, double scale,
                                double rotation_deg) {
  require_same_shape(frame.rgb, frame.manipulator_mask, "overlay_foreground");
  if (!(scale > 0.0)) throw InvalidArgument("overlay_foreground: scale must be > 0");
  LabeledFrame out = frame;
  if (obj.empty()) return out;

  const int h = frame.rgb.height(), w = frame.rgb.width();
  const double theta = rotation_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double fcy = (h - 1) / 2.0, fcx = (w - 1) / 2.0;
  const double ocy = (obj.height() - 1) / 2.0, ocx = (obj.width() - 1) / 2.0;

  // Bounding radius of the transformed object limits the scan.
  const double radius = scale * std::hypot(obj.height() / 2.0 + 1, obj.width() / 2.0 + 1);
  const int r0 = std::max(0, static_cast<int>(std::floor(fcy - radius)));
  const int r1 = std::min(h - 1, static_cast<int>(std::ceil(fcy + radius)));
  const int c0 = std::max(0, static_cast<int>(std::floor(fcx - radius)));
  const int c1 = std::min(w - 1, static_cast<int>(std::ceil(fcx + radius)));

  auto texel = [&](int y, int x) -> Rgba {
    if (y < 0 || x < 0 || y >= obj.height() || x >= obj.width()) return {};
    return obj(y, x);
  };

  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double dy = r - fcy, dx = c - fcx;
      const double ox = (cs * dx + sn * dy) / scale + ocx;
      const double oy = (-sn * dx + cs * dy) / scale + ocy;
      const int x0 = static_cast<int>(std::floor(ox)), y0 = static_cast<int>(std::floor(oy));
      const double fx = ox - x0, fy = oy - y0;
      double alpha = 0.0, pr = 0.0, pg = 0.0, pb = 0.0;
      const double weights[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const Rgba taps[4] = {texel(y0, x0), texel(y0, x0 + 1), texel(y0 + 1, x0), texel(y0 + 1, x0 + 1)};
      for (int t = 0; t < 4; ++t) {
        const double a = weights[t] * taps[t].a / 255.0;
        alpha += a;
        pr += a * taps[t].r;
        pg += a * taps[t].g;
        pb += a * taps[t].b;
      }
      if (alpha <= 0.0) continue;
      Rgb& dst = out.rgb(r, c);
      dst = {to_u8(pr + (1 - alpha) * dst.r), to_u8(pg + (1 - alpha) * dst.g),
             to_u8(pb + (1 - alpha) * dst.b)};
      if (alpha >= 0.5) out.manipulator_mask(r, c) = 0;
    }
  }
  return out;
}

LabeledFrame render_item(const AugmentItem& item, std::span<const LabeledFrame> frames,
                         std::span<const RgbImage> backgrounds, std::span<const RgbaImage> objects) {
  if (item.frame >= frames.size()) throw InvalidArgument("augment item frame index out of range");
  LabeledFrame out = frames[item.frame];
  if (item.background) {
    if (*item.background >= backgrounds.size())
      throw InvalidArgument("augment item background index out of range");
    out = substitute_background(
        out, fit_background(backgrounds[*item.background], out.rgb.height(), out.rgb.width()));
  }
  if (item.object) {
    if (*item.object >= objects.size()) throw InvalidArgument("augment item object index out of range");
    out = overlay_foreground(out, objects[*item.object], item.scale, item.rotation_deg);
  }
  return out;
}

AnnotationSet build_srn_dataset(std::span<const LabeledFrame> frames,
                                std::span<const RgbImage> backgrounds,
                                std::span<const RgbaImage> objects, const AugmentSpec& spec,
                                const AugmentSink& sink) {
  const auto plan = plan_srn_dataset(frames.size(), backgrounds.size(), objects.size(), spec);
  AnnotationSet set;
  set.categories = {{kManipulatorClassId, "manipulator"}};
  auto& all = set.splits["All"];
  std::int64_t next_id = 1;
  char name[64];
  for (const AugmentItem& item : plan) {
    const LabeledFrame frame = render_item(item, frames, backgrounds, objects);
    std::snprintf(name, sizeof(name), "%s/%s_%06zu.png", split_name(item.split),
                  split_name(item.split), item.index);
    const std::int64_t id = next_id++;
    set.images.push_back({id, name, frame.rgb.height(), frame.rgb.width()});
    set.add_mask(id, kManipulatorClassId, frame.manipulator_mask);
    set.splits[split_name(item.split)].push_back(id);
    all.push_back(id);
    if (sink) sink(item, name, frame);
  }
  return set;
}

}  // namespace graspseg
