#include "graspseg/fg_pipeline.hpp"

namespace graspseg {

void FgPipelineParams::validate() const {
  felz.validate();
  select.validate();
  grabcut.validate();
  if (open_kernel < 1 || erode_kernel < 1 || dilate_kernel < 1)
    throw InvalidArgument("morphology kernel sizes must be >= 1");
}

BinaryMask depth_foreground(const DepthImage& depth, std::span<const LinkPoint> links,
                            const CameraIntrinsics& k, const FgPipelineParams& params,
                            SegmentMap* segments_out) {
  params.validate();
  SegmentMap seg = felzenszwalb_segment(depth, params.felz);
  const BinaryMask selected = select_foreground_segments(seg, depth, links, k, params.select);
  BinaryMask m0 = open(fill_holes(selected), SquareKernel::ones(params.open_kernel));
  if (segments_out) *segments_out = std::move(seg);
  return m0;
}

Trimap build_trimap(const BinaryMask& m0, const FgPipelineParams& params) {
  const BinaryMask mp = erode(m0, SquareKernel::ones(params.erode_kernel));
  const BinaryMask mr = dilate(m0, SquareKernel::ones(params.dilate_kernel));
  Trimap t(m0.height(), m0.width());
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<std::uint8_t>((mr[i] ? 1 : 0) + (m0[i] ? 1 : 0) + (mp[i] ? 1 : 0));
  return t;
}

BinaryMask trimap_foreground(const Trimap& t) {
  BinaryMask out(t.height(), t.width());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t.is_foreground(i) ? 1 : 0;
  return out;
}

FgResult foreground_mask(const RgbImage& rgb, const DepthImage& depth,
                         std::span<const LinkPoint> links, const CameraIntrinsics& k,
                         const FgPipelineParams& params, std::uint64_t seed, bool want_debug) {
  require_same_shape(rgb, depth, "foreground_mask");
  SegmentMap seg;
  const BinaryMask m0 = depth_foreground(depth, links, k, params, want_debug ? &seg : nullptr);
  const Trimap trimap = build_trimap(m0, params);

  FgResult result;
  Trimap refined;
  try {
    refined = grabcut_refine(rgb, trimap, params.grabcut, seed);
    result.foreground = trimap_foreground(refined);
  } catch (const DegenerateTrimap&) {
    result.degenerate = true;
    result.foreground = BinaryMask(rgb.height(), rgb.width());
    refined = trimap;
  }

  if (want_debug) {
    FgDebugBundle dbg;
    dbg.segments = std::move(seg);
    for (const LinkPoint& p : links)
      if (p.z > 0.0) dbg.links.push_back(project_link(p, k, depth.height(), depth.width()));
    dbg.m0 = m0;
    dbg.precision_mask = erode(m0, SquareKernel::ones(params.erode_kernel));
    dbg.recall_mask = dilate(m0, SquareKernel::ones(params.dilate_kernel));
    dbg.initial_trimap = trimap;
    dbg.refined_trimap = refined;
    dbg.foreground = result.foreground;
    result.debug = std::move(dbg);
  }
  return result;
}

}  // namespace graspseg
