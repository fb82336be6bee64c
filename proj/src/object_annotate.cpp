#include "graspseg/object_annotate.hpp"

#include <cmath>

#include "graspseg/morphology.hpp"

namespace graspseg {

std::optional<std::size_t> best_srn_prediction(std::span<const SrnPrediction> preds) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!std::isfinite(preds[i].score)) throw InvalidArgument("SRN prediction score must be finite");
    if (!best || preds[i].score > preds[*best].score) best = i;
  }
  return best;
}

BinaryMask select_srn_prediction(std::span<const SrnPrediction> preds, int height, int width) {
  const auto best = best_srn_prediction(preds);
  if (!best) return BinaryMask(height, width);
  return preds[*best].mask;
}

BinaryMask object_mask(const BinaryMask& m_fg, const BinaryMask& m_srn) {
  return open(mask_intersect_complement(m_fg, m_srn), SquareKernel::ones(3));
}

ObjectAnnotation annotate_object(const std::string& frame_id, const BinaryMask& m_fg,
                                 std::span<const SrnPrediction> preds) {
  ObjectAnnotation out;
  out.frame_id = frame_id;
  out.srn_prediction = best_srn_prediction(preds);
  out.no_srn_warning = !out.srn_prediction.has_value();
  const BinaryMask srn = select_srn_prediction(preds, m_fg.height(), m_fg.width());
  out.mask = object_mask(m_fg, srn);
  return out;
}

}  // namespace graspseg
