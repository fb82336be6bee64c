#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graspseg/core.hpp"
#include "graspseg/felzenszwalb.hpp"
#include "graspseg/grabcut.hpp"
#include "graspseg/kinematics.hpp"
#include "graspseg/morphology.hpp"

namespace graspseg {

struct FgPipelineParams {
  FelzParams felz;
  FgSelectParams select;
  int open_kernel = 8;
  int erode_kernel = 10;
  int dilate_kernel = 75;
  GrabCutParams grabcut;

  void validate() const;
};

struct FgDebugBundle {
  SegmentMap segments;
  std::vector<ProjectedLink> links;
  BinaryMask m0;
  BinaryMask precision_mask;  // erosion of m0
  BinaryMask recall_mask;     // dilation of m0
  Trimap initial_trimap;
  Trimap refined_trimap;
  BinaryMask foreground;
};

struct FgResult {
  BinaryMask foreground;
  /// Set when the trimap had no foreground (or no background) seeds and
  /// GrabCut was skipped; `foreground` is then empty.
  bool degenerate = false;
  std::optional<FgDebugBundle> debug;
};

/// Depth-only stage: segment, select by link projections, rasterize, fill
/// holes, open with the J_open kernel.
BinaryMask depth_foreground(const DepthImage& depth, std::span<const LinkPoint> links,
                            const CameraIntrinsics& k, const FgPipelineParams& params,
                            SegmentMap* segments_out = nullptr);

/// trimap = dilate(m0) + m0 + erode(m0).
Trimap build_trimap(const BinaryMask& m0, const FgPipelineParams& params);

/// Full kinematics-based foreground segmentation with GrabCut refinement.
FgResult foreground_mask(const RgbImage& rgb, const DepthImage& depth,
                         std::span<const LinkPoint> links, const CameraIntrinsics& k,
                         const FgPipelineParams& params, std::uint64_t seed,
                         bool want_debug = false);

/// Pixels of the trimap valued 2 or 3.
BinaryMask trimap_foreground(const Trimap& t);

}  // namespace graspseg
