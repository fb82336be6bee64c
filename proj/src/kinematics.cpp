#include "graspseg/kinematics.hpp"

#include <cmath>

namespace graspseg {

void FgSelectParams::validate() const {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
}

ProjectedLink project_link(const LinkPoint& p, const CameraIntrinsics& k) {
  if (!(p.z > 0.0)) throw BehindCamera("link point is behind the camera (z <= 0)");
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
    throw InvalidArgument("link point must be finite");
  ProjectedLink out;
  out.pixel.col = static_cast<int>(std::floor(k.fx * p.x / p.z + k.cx + 0.5));
  out.pixel.row = static_cast<int>(std::floor(k.fy * p.y / p.z + k.cy + 0.5));
  out.expected_depth_z = p.z;
  return out;
}

ProjectedLink project_link(const LinkPoint& p, const CameraIntrinsics& k, int height, int width) {
  ProjectedLink out = project_link(p, k);
  out.in_bounds = out.pixel.row >= 0 && out.pixel.col >= 0 && out.pixel.row < height &&
                  out.pixel.col < width;
  return out;
}

BinaryMask select_foreground_segments(const SegmentMap& seg, const DepthImage& depth,
                                      std::span<const LinkPoint> links,
                                      const CameraIntrinsics& k, const FgSelectParams& params) {
  require_same_shape(seg.labels, depth, "select_foreground_segments");
  params.validate();
  k.validate();

  std::vector<bool> selected(static_cast<std::size_t>(seg.segment_count), false);
  bool any = false;
  for (const LinkPoint& link : links) {
    if (!(link.z > 0.0)) continue;
    const ProjectedLink p = project_link(link, k, depth.height(), depth.width());
    if (!p.in_bounds) continue;
    const int r = p.pixel.row, c = p.pixel.col;
    if (!depth.valid(r, c)) continue;
    const auto id = static_cast<std::size_t>(seg.labels(r, c));
    if (seg.invalid[id]) continue;
    if (depth(r, c) <= p.expected_depth_z + params.lambda) {
      selected[id] = true;
      any = true;
    }
  }

  BinaryMask out(depth.height(), depth.width());
  if (!any) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = selected[static_cast<std::size_t>(seg.labels[i])] ? 1 : 0;
  return out;
}

}  // namespace graspseg
