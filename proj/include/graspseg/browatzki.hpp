#pragma once

#include <cstdint>
#include <optional>

#include "graspseg/core.hpp"
#include "graspseg/gmm.hpp"

namespace graspseg {

enum class ThresholdDomain { Density, LogDensity };

/// In-hand segmentation baseline: a colour GMM is fitted on the frame between
/// two concentric square boxes, and pixels inside the inner box that the model
/// finds unlikely are labeled object.
struct BrowatzkiParams {
  int inner_box = 270;
  int outer_box = 300;
  int n_gaussians = 1;
  /// Compared against the density, or against log-density when
  /// `threshold_domain` is LogDensity.
  double density_threshold = 1e-15;
  ThresholdDomain threshold_domain = ThresholdDomain::Density;
  CovarianceType covariance = CovarianceType::Full;
  /// Box centre; the image centre when unset.
  std::optional<PixelCoord> center;
  int em_max_iters = 100;

  void validate() const;
};

struct PixelBox {
  int row0 = 0, col0 = 0;  // inclusive
  int row1 = 0, col1 = 0;  // exclusive
  bool contains(int r, int c) const { return r >= row0 && r < row1 && c >= col0 && c < col1; }
  bool empty() const { return row1 <= row0 || col1 <= col0; }
};

/// Square of side `side` centred on `center` (rows center-side/2 ..), clamped
/// to the image.
PixelBox centered_box(PixelCoord center, int side, int height, int width);

BinaryMask browatzki_segment(const RgbImage& rgb, const BrowatzkiParams& params, std::uint64_t seed);

}  // namespace graspseg
