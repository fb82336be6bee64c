#include "graspseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace graspseg {

namespace {

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

bool inside_primitive(const ArmPrimitive& p, double r, double c) {
  const double dr = p.p1.row - p.p0.row, dc = p.p1.col - p.p0.col;
  const double len2 = dr * dr + dc * dc;
  double t = len2 > 0 ? ((r - p.p0.row) * dr + (c - p.p0.col) * dc) / len2 : 0.0;
  if (p.shape == PrimitiveShape::Rectangle && (t < 0.0 || t > 1.0)) return false;
  t = std::clamp(t, 0.0, 1.0);
  const double er = r - (p.p0.row + t * dr), ec = c - (p.p0.col + t * dc);
  return er * er + ec * ec <= p.radius * p.radius;
}

bool inside_blob(const ObjectBlob& b, double r, double c) {
  const double th = b.angle_deg * std::numbers::pi / 180.0;
  const double dr = r - b.center.row, dc = c - b.center.col;
  const double u = std::cos(th) * dr + std::sin(th) * dc;
  const double v = -std::sin(th) * dr + std::cos(th) * dc;
  if (b.shape == BlobShape::Rectangle) return std::abs(u) <= b.radius_row && std::abs(v) <= b.radius_col;
  return (u * u) / (b.radius_row * b.radius_row) + (v * v) / (b.radius_col * b.radius_col) <= 1.0;
}

Rgb background_pixel(const SceneSpec& s, int r, int c, std::mt19937_64& rng) {
  switch (s.texture) {
    case TextureMode::Flat: return s.background_color;
    case TextureMode::Checker:
      return ((r / s.checker_size) + (c / s.checker_size)) % 2 == 0 ? s.background_color
                                                                    : s.background_color2;
    case TextureMode::Noise: {
      std::uniform_real_distribution<double> u(-s.texture_amplitude, s.texture_amplitude);
      const double d = u(rng);
      return {clamp_u8(s.background_color.r + d), clamp_u8(s.background_color.g + d * 0.8),
              clamp_u8(s.background_color.b + d * 0.6)};
    }
  }
  return s.background_color;
}

Rgb hsv(double h_deg, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h_deg, 360.0) / 60.0;
  const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  if (hp < 1) r = c, g = x;
  else if (hp < 2) r = x, g = c;
  else if (hp < 3) g = c, b = x;
  else if (hp < 4) g = x, b = c;
  else if (hp < 5) r = x, b = c;
  else r = c, b = x;
  const double m = v - c;
  return {clamp_u8((r + m) * 255), clamp_u8((g + m) * 255), clamp_u8((b + m) * 255)};
}

}  // namespace

void SceneSpec::validate() const {
  if (height <= 0 || width <= 0) throw InvalidArgument("scene dimensions must be positive");
  intrinsics.validate();
  if (!(max_range_mm > 0)) throw InvalidArgument("scene max range must be positive");
  if (!(background_depth_mm > 0) || background_depth_mm > max_range_mm)
    throw InvalidArgument("scene background depth outside sensor range");
  if (texture == TextureMode::Checker && checker_size <= 0)
    throw InvalidArgument("checker size must be positive");
  if (depth_noise_sigma < 0 || color_noise_sigma < 0 || texture_amplitude < 0)
    throw InvalidArgument("scene noise levels must be non-negative");
  for (const auto& p : arm) {
    if (!(p.radius > 0)) throw InvalidArgument("arm primitive radius must be positive");
    if (!(p.depth_mm > 0) || p.depth_mm >= background_depth_mm)
      throw InvalidArgument("arm depth must lie in front of the background");
  }
  for (const auto& l : links) {
    if (l.primitive < 0 || l.primitive >= static_cast<int>(arm.size()))
      throw InvalidArgument("link anchor references a missing arm primitive");
    if (!(l.t >= 0.0 && l.t <= 1.0)) throw InvalidArgument("link anchor t must lie in [0,1]");
  }
  if (object) {
    if (!(object->radius_row > 0) || !(object->radius_col > 0))
      throw InvalidArgument("object radii must be positive");
    if (!(object->depth_mm > 0) || object->depth_mm >= background_depth_mm)
      throw InvalidArgument("object depth must lie in front of the background");
  }
}

SceneBundle generate_scene(const SceneSpec& spec) {
  spec.validate();
  const int h = spec.height, w = spec.width;
  std::mt19937_64 rng(spec.seed);

  SceneBundle out;
  out.rgb = RgbImage(h, w);
  out.gt_arm = BinaryMask(h, w);
  out.gt_object = BinaryMask(h, w);
  Grid<float> clean_depth(h, w, static_cast<float>(spec.background_depth_mm));

  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.rgb(r, c) = background_pixel(spec, r, c, rng);

  // Layers: arm primitives and the object, painted far to near. Equal depths
  // keep declaration order, so the object paints over the arm.
  struct Layer {
    double depth;
    int index;  // -1 for the object
  };
  std::vector<Layer> layers;
  for (int i = 0; i < static_cast<int>(spec.arm.size()); ++i) layers.push_back({spec.arm[i].depth_mm, i});
  if (spec.object) layers.push_back({spec.object->depth_mm, -1});
  std::stable_sort(layers.begin(), layers.end(),
                   [](const Layer& a, const Layer& b) { return a.depth > b.depth; });

  for (const Layer& layer : layers) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const bool hit = layer.index < 0 ? inside_blob(*spec.object, r, c)
                                         : inside_primitive(spec.arm[layer.index], r, c);
        if (!hit) continue;
        clean_depth(r, c) = static_cast<float>(layer.depth);
        if (layer.index < 0) {
          out.rgb(r, c) = spec.object->color;
          out.gt_object(r, c) = 1;
          out.gt_arm(r, c) = 0;
        } else {
          out.rgb(r, c) = spec.arm[layer.index].color;
          out.gt_arm(r, c) = 1;
          out.gt_object(r, c) = 0;
        }
      }
    }
  }
  out.gt_foreground = mask_union(out.gt_arm, out.gt_object);

  if (spec.color_noise_sigma > 0) {
    std::normal_distribution<double> n(0.0, spec.color_noise_sigma);
    for (std::size_t i = 0; i < out.rgb.size(); ++i) {
      Rgb& p = out.rgb[i];
      p = {clamp_u8(p.r + n(rng)), clamp_u8(p.g + n(rng)), clamp_u8(p.b + n(rng))};
    }
  }

  out.depth = DepthImage(h, w);
  std::normal_distribution<double> dn(0.0, spec.depth_noise_sigma > 0 ? spec.depth_noise_sigma : 1.0);
  for (std::size_t i = 0; i < out.depth.size(); ++i) {
    double d = clean_depth[i];
    if (spec.depth_noise_sigma > 0) d += dn(rng);
    out.depth[i] = static_cast<float>(std::clamp(std::round(d), 1.0, spec.max_range_mm));
  }

  const auto& k = spec.intrinsics;
  for (const LinkAnchor& a : spec.links) {
    const ArmPrimitive& p = spec.arm[a.primitive];
    const double row = std::round(p.p0.row + a.t * (p.p1.row - p.p0.row));
    const double col = std::round(p.p0.col + a.t * (p.p1.col - p.p0.col));
    const double z = p.depth_mm;
    out.links.push_back({(col - k.cx) * z / k.fx, (row - k.cy) * z / k.fy, z});
  }
  return out;
}

SceneSpec random_scene_spec(std::uint64_t seed, const RandomSceneOptions& options) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  SceneSpec s;
  s.height = options.height;
  s.width = options.width;
  const double scale = std::min(s.height / 480.0, s.width / 640.0);
  const double f = 525.0 * s.width / 640.0;
  s.intrinsics = {f, f, (s.width - 1) / 2.0, (s.height - 1) / 2.0};
  s.depth_noise_sigma = options.depth_noise_sigma;
  s.color_noise_sigma = options.color_noise_sigma;
  s.seed = seed;
  s.background_depth_mm = uni(1800.0, 2400.0);
  s.texture = options.texture ? *options.texture : static_cast<TextureMode>(pick(3));
  s.checker_size = std::max(4, static_cast<int>(std::lround(32 * scale)));

  const double bg_hue = uni(0.0, 360.0);
  s.background_color = hsv(bg_hue, uni(0.25, 0.45), uni(0.55, 0.8));
  s.background_color2 = hsv(bg_hue + 20.0, uni(0.25, 0.45), uni(0.35, 0.5));

  const double gray = uni(60.0, 100.0);
  const Rgb arm_color{clamp_u8(gray), clamp_u8(gray), clamp_u8(gray + 2)};

  // Object centre near the image centre; arm enters from a random border.
  const ImagePoint centre{s.height / 2.0 + uni(-30, 30) * scale, s.width / 2.0 + uni(-40, 40) * scale};
  ImagePoint base;
  switch (pick(3)) {
    case 0: base = {s.height + 20.0 * scale, uni(0.2, 0.8) * s.width}; break;
    case 1: base = {uni(0.3, 0.9) * s.height, s.width + 20.0 * scale}; break;
    default: base = {uni(0.3, 0.9) * s.height, -20.0 * scale}; break;
  }
  const double obj_r = uni(40.0, 65.0) * scale;
  const double dr = centre.row - base.row, dc = centre.col - base.col;
  const double len = std::hypot(dr, dc);
  const ImagePoint gripper{centre.row - dr / len * obj_r * 0.5, centre.col - dc / len * obj_r * 0.5};

  const int segments = 2 + pick(2);
  std::vector<ImagePoint> joints{base};
  for (int i = 1; i < segments; ++i) {
    const double t = static_cast<double>(i) / segments;
    const double off = uni(-50, 50) * scale;
    joints.push_back({base.row + t * (gripper.row - base.row) + off * dc / len,
                      base.col + t * (gripper.col - base.col) - off * dr / len});
  }
  joints.push_back(gripper);

  double depth = uni(750.0, 900.0);
  for (int i = 0; i < segments; ++i) {
    ArmPrimitive p;
    p.shape = pick(2) == 0 ? PrimitiveShape::Capsule : PrimitiveShape::Rectangle;
    if (i + 1 == segments) p.shape = PrimitiveShape::Capsule;  // rounded tip holds the hand frame
    p.p0 = joints[i];
    p.p1 = joints[i + 1];
    p.radius = (i + 1 == segments ? uni(14.0, 18.0) : uni(20.0, 28.0)) * scale;
    p.depth_mm = depth;
    p.color = arm_color;
    s.arm.push_back(p);
    s.links.push_back({i, 0.5});
    depth -= uni(60.0, 120.0);
  }
  // Hand frame at the gripper tip, which the held object covers.
  s.links.push_back({segments - 1, 1.0});

  if (options.with_object) {
    ObjectBlob b;
    b.shape = pick(3) == 0 ? BlobShape::Rectangle : BlobShape::Ellipse;
    b.center = centre;
    b.radius_row = obj_r;
    b.radius_col = obj_r * uni(0.7, 1.0);
    b.angle_deg = uni(0.0, 180.0);
    b.depth_mm = s.arm.back().depth_mm - uni(10.0, 30.0);
    if (options.saturation == ObjectSaturation::High) {
      b.color = hsv(bg_hue + uni(120.0, 240.0), uni(0.75, 0.95), uni(0.7, 0.95));
    } else {
      b.color = {clamp_u8(gray + uni(-8, 8)), clamp_u8(gray + uni(-8, 8)), clamp_u8(gray + uni(-8, 8))};
    }
    s.object = b;
  }
  return s;
}

}  // namespace graspseg
