#include "graspseg/browatzki.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace graspseg {

void BrowatzkiParams::validate() const {
  if (inner_box <= 0) throw InvalidArgument("inner box must be > 0");
  if (outer_box <= inner_box) throw InvalidArgument("outer box must be larger than inner box");
  if (n_gaussians < 1) throw InvalidArgument("need at least one Gaussian");
  if (threshold_domain == ThresholdDomain::Density && !(density_threshold > 0.0))
    throw InvalidArgument("density threshold must be > 0");
}

PixelBox centered_box(PixelCoord center, int side, int height, int width) {
  PixelBox b;
  b.row0 = std::clamp(center.row - side / 2, 0, height);
  b.col0 = std::clamp(center.col - side / 2, 0, width);
  b.row1 = std::clamp(center.row - side / 2 + side, 0, height);
  b.col1 = std::clamp(center.col - side / 2 + side, 0, width);
  return b;
}

BinaryMask browatzki_segment(const RgbImage& rgb, const BrowatzkiParams& params, std::uint64_t seed) {
  params.validate();
  const int h = rgb.height(), w = rgb.width();
  const PixelCoord center = params.center.value_or(PixelCoord{h / 2, w / 2});
  const PixelBox inner = centered_box(center, params.inner_box, h, w);
  const PixelBox outer = centered_box(center, params.outer_box, h, w);

  std::vector<Color3> frame;
  for (int r = outer.row0; r < outer.row1; ++r)
    for (int c = outer.col0; c < outer.col1; ++c)
      if (!inner.contains(r, c)) frame.push_back(to_color3(rgb(r, c)));
  if (frame.empty()) throw InvalidArgument("browatzki: frame region is empty after clamping");

  EmOptions em;
  em.n_components = params.n_gaussians;
  em.seed = seed;
  em.covariance = params.covariance;
  em.max_iters = params.em_max_iters;
  const GmmModel model = fit_em(frame, em).model;

  BinaryMask out(h, w);
  for (int r = inner.row0; r < inner.row1; ++r) {
    for (int c = inner.col0; c < inner.col1; ++c) {
      const Color3 z = to_color3(rgb(r, c));
      const bool unlikely = params.threshold_domain == ThresholdDomain::Density
                                ? model.pdf(z) < params.density_threshold
                                : model.log_pdf(z) < params.density_threshold;
      out(r, c) = unlikely ? 1 : 0;
    }
  }
  return out;
}

}  // namespace graspseg
