#include "graspseg/core.hpp"

#include <algorithm>
#include <cmath>

namespace graspseg {

namespace {

void check_trimap_values(const Trimap& t) {
  for (std::uint8_t v : t.data())
    if (v > Trimap::kForeground) throw InvalidArgument("trimap value outside {0,1,2,3}");
}

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, const char* what, Op op) {
  require_same_shape(a, b, what);
  BinaryMask out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i] != 0, b[i] != 0) ? 1 : 0;
  return out;
}

}  // namespace

Trimap::Trimap(int height, int width, std::uint8_t fill)
    : Grid<std::uint8_t>(height, width, fill) {
  if (fill > kForeground) throw InvalidArgument("trimap value outside {0,1,2,3}");
}

Trimap::Trimap(int height, int width, std::vector<std::uint8_t> data)
    : Grid<std::uint8_t>(height, width, std::move(data)) {
  check_trimap_values(*this);
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw InvalidArgument("camera focal lengths must be positive and finite");
  if (!std::isfinite(cx) || !std::isfinite(cy))
    throw InvalidArgument("camera principal point must be finite");
}

BinaryMask mask_intersect_complement(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_intersect_complement", [](bool x, bool y) { return x && !y; });
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_union", [](bool x, bool y) { return x || y; });
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_intersection", [](bool x, bool y) { return x && y; });
}

BinaryMask mask_not(const BinaryMask& m) {
  BinaryMask out(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
  return out;
}

std::size_t mask_area(const BinaryMask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.data().begin(), m.data().end(), [](std::uint8_t v) { return v != 0; }));
}

bool mask_subset(const BinaryMask& inner, const BinaryMask& outer) {
  require_same_shape(inner, outer, "mask_subset");
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (inner[i] && !outer[i]) return false;
  return true;
}

void validate_depth(const DepthImage& depth, float max_range_mm) {
  for (float d : depth.data()) {
    if (!std::isfinite(d) || d < 0.0f)
      throw InvalidArgument("depth values must be finite and non-negative");
    if (d > max_range_mm) throw InvalidArgument("depth value exceeds configured max range");
  }
}

}  // namespace graspseg
