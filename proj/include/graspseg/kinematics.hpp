#pragma once

#include <span>
#include <vector>

#include "graspseg/core.hpp"
#include "graspseg/felzenszwalb.hpp"

namespace graspseg {

class BehindCamera : public Error {
 public:
  using Error::Error;
};

struct ProjectedLink {
  PixelCoord pixel;
  double expected_depth_z = 0.0;
  bool in_bounds = false;
};

struct FgSelectParams {
  /// Depth noise allowance past the expected link depth, millimeters.
  double lambda = 200.0;

  void validate() const;
};

/// Pinhole projection rounded to the nearest pixel. The intrinsic matrix
/// yields (u, v) = (col, row). `in_bounds` is left false; see
/// project_link(p, k, height, width).
ProjectedLink project_link(const LinkPoint& p, const CameraIntrinsics& k);
ProjectedLink project_link(const LinkPoint& p, const CameraIntrinsics& k, int height, int width);

/// Union of every segment that holds a projected link whose measured depth is
/// no further than z + lambda. Links behind the camera, outside the image or on
/// sentinel depth are skipped, as are invalid-flagged segments.
BinaryMask select_foreground_segments(const SegmentMap& seg, const DepthImage& depth,
                                      std::span<const LinkPoint> links,
                                      const CameraIntrinsics& k, const FgSelectParams& params);

}  // namespace graspseg
