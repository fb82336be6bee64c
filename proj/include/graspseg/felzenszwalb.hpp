#pragma once

#include <cstdint>
#include <vector>

#include "graspseg/core.hpp"

namespace graspseg {

struct FelzParams {
  double sigma = 0.5;
  double k = 800.0;
  int min_size = 50;

  void validate() const;
};

/// Exhaustive, mutually exclusive partition of the image into segments with
/// contiguous ids 0..segment_count-1. Segments made of pixels without a depth
/// reading are flagged in `invalid`.
struct SegmentMap {
  Grid<std::int32_t> labels;
  int segment_count = 0;
  std::vector<std::int64_t> segment_sizes;
  std::vector<bool> invalid;

  int height() const { return labels.height(); }
  int width() const { return labels.width(); }
  int valid_segment_count() const;

  bool operator==(const SegmentMap&) const = default;
};

/// Separable Gaussian blur that ignores sentinel pixels. Weights are
/// renormalized over valid neighbours; sentinel pixels stay sentinel.
/// The kernel is truncated at radius ceil(4 sigma).
DepthImage gaussian_smooth(const DepthImage& depth, double sigma);

/// Normalized 1D Gaussian taps for `sigma`, centre at index radius.
std::vector<double> gaussian_kernel(double sigma);

/// Graph-based over-segmentation of the depth channel on an 8-connected grid,
/// edge weight |smoothed depth difference| in millimeters.
SegmentMap felzenszwalb_segment(const DepthImage& depth, const FelzParams& params);

}  // namespace graspseg
