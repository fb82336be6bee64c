#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspseg/annotations.hpp"
#include "graspseg/core.hpp"

namespace graspseg {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  bool operator==(const Rgba&) const = default;
};

class RgbaImage : public Grid<Rgba> {
 public:
  using Grid<Rgba>::Grid;
};

/// Manipulator-only training frame: class 0 background, class 1 manipulator.
struct LabeledFrame {
  RgbImage rgb;
  BinaryMask manipulator_mask;
};

enum class AugmentSplit { Orig, FG, BG, FGBG };

const char* split_name(AugmentSplit s);

struct AugmentSpec {
  int repeats = 3;
  double scale_min = 0.3;
  double scale_max = 1.2;
  double rotation_min_deg = 0.0;
  double rotation_max_deg = 360.0;
  std::uint64_t seed = 0;
  std::vector<AugmentSplit> splits = {AugmentSplit::Orig, AugmentSplit::FG, AugmentSplit::BG,
                                      AugmentSplit::FGBG};

  void validate() const;
};

/// Recipe for one generated image. Resource indices cycle through the smaller
/// collections.
struct AugmentItem {
  AugmentSplit split = AugmentSplit::Orig;
  std::size_t index = 0;
  std::size_t frame = 0;
  std::optional<std::size_t> background;
  std::optional<std::size_t> object;
  double scale = 1.0;
  double rotation_deg = 0.0;
};

/// Each augmentation type is repeated `repeats` times per element of its most
/// plentiful resource: |FG| = r * max(F, O), |BG| = r * max(F, B),
/// |FGBG| = r * max(F, B, O), |Orig| = F.
std::vector<AugmentItem> plan_srn_dataset(std::size_t frames, std::size_t backgrounds,
                                          std::size_t objects, const AugmentSpec& spec);

/// Resizes to cover (h, w) preserving aspect ratio, then centre-crops.
RgbImage fit_background(const RgbImage& background, int height, int width);

/// Replaces every non-manipulator pixel with the background pixel.
LabeledFrame substitute_background(const LabeledFrame& frame, const RgbImage& background);

/// Alpha-composites `obj`, scaled and rotated about its centre, at the image
/// centre (bilinear). Manipulator pixels under alpha >= 0.5 are cleared.
LabeledFrame overlay_foreground(const LabeledFrame& frame, const RgbaImage& obj, double scale,
                                double rotation_deg);

LabeledFrame render_item(const AugmentItem& item, std::span<const LabeledFrame> frames,
                         std::span<const RgbImage> backgrounds, std::span<const RgbaImage> objects);

/// Receives every generated image with its file name before it is dropped.
using AugmentSink = std::function<void(const AugmentItem&, const std::string& file_name,
                                       const LabeledFrame&)>;

/// Builds the SRN training set. Splits are recorded under their names plus
/// "All" (the union). Images are streamed to `sink` so large sets never sit in
/// memory at once.
AnnotationSet build_srn_dataset(std::span<const LabeledFrame> frames,
                                std::span<const RgbImage> backgrounds,
                                std::span<const RgbaImage> objects, const AugmentSpec& spec,
                                const AugmentSink& sink = {});

}  // namespace graspseg
