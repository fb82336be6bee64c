#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "graspseg/core.hpp"

namespace graspseg {

enum class TextureMode { Flat, Checker, Noise };
enum class PrimitiveShape { Capsule, Rectangle };
enum class BlobShape { Ellipse, Rectangle };

/// Image-plane point, fractional pixels (row down, column right).
struct ImagePoint {
  double row = 0.0;
  double col = 0.0;
};

/// Arm segment between two image points. Rectangles have square ends,
/// capsules round ones; `radius` is the half-width in pixels.
struct ArmPrimitive {
  PrimitiveShape shape = PrimitiveShape::Capsule;
  ImagePoint p0, p1;
  double radius = 10.0;
  double depth_mm = 500.0;
  Rgb color{90, 90, 90};
};

/// Link frame placed on the axis of primitive `primitive` at p0 + t (p1 - p0).
struct LinkAnchor {
  int primitive = 0;
  double t = 0.5;
};

struct ObjectBlob {
  BlobShape shape = BlobShape::Ellipse;
  ImagePoint center;
  double radius_row = 30.0;
  double radius_col = 30.0;
  double angle_deg = 0.0;
  double depth_mm = 480.0;
  Rgb color{200, 40, 40};
};

struct SceneSpec {
  int height = 480;
  int width = 640;
  CameraIntrinsics intrinsics{525.0, 525.0, 319.5, 239.5};
  double background_depth_mm = 2000.0;
  TextureMode texture = TextureMode::Flat;
  Rgb background_color{150, 130, 100};
  Rgb background_color2{110, 120, 150};  // second checker colour
  int checker_size = 32;
  double texture_amplitude = 25.0;        // noise texture, per channel
  std::vector<ArmPrimitive> arm;
  std::vector<LinkAnchor> links;
  std::optional<ObjectBlob> object;
  double depth_noise_sigma = 0.0;  // mm
  double color_noise_sigma = 0.0;  // per channel, 8-bit units
  double max_range_mm = kDefaultMaxRangeMm;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SceneBundle {
  RgbImage rgb;
  DepthImage depth;
  std::vector<LinkPoint> links;
  BinaryMask gt_arm;
  BinaryMask gt_object;
  BinaryMask gt_foreground;
};

/// Rasterizes far to near. Depth is rounded to whole millimeters after noise
/// and clamped to [1, max_range]. Ground truth is taken from the noise-free
/// layering, so gt_arm and gt_object are disjoint.
SceneBundle generate_scene(const SceneSpec& spec);

enum class ObjectSaturation { Low, High };

struct RandomSceneOptions {
  int height = 480;
  int width = 640;
  double depth_noise_sigma = 5.0;
  double color_noise_sigma = 4.0;
  ObjectSaturation saturation = ObjectSaturation::High;
  bool with_object = true;
  std::optional<TextureMode> texture;  // random when unset
};

/// A plausible arm-holding-object scene: a two or three segment gray arm
/// entering from an image border, ending near the centre, with the object
/// held at the gripper slightly in front of it.
SceneSpec random_scene_spec(std::uint64_t seed, const RandomSceneOptions& options = {});

}  // namespace graspseg
