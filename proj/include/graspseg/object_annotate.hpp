#pragma once

#include <optional>
#include <span>
#include <string>

#include "graspseg/core.hpp"

namespace graspseg {

struct SrnPrediction {
  BinaryMask mask;
  double score = 0.0;
};

/// Index of the highest-scoring prediction (first on ties); nullopt if empty.
std::optional<std::size_t> best_srn_prediction(std::span<const SrnPrediction> preds);

/// Mask of the highest-scoring prediction, or an all-zero mask of the given
/// size when there are no predictions.
BinaryMask select_srn_prediction(std::span<const SrnPrediction> preds, int height, int width);

/// open(m_fg AND NOT m_srn, J_3).
BinaryMask object_mask(const BinaryMask& m_fg, const BinaryMask& m_srn);

struct ObjectAnnotation {
  std::string frame_id;
  BinaryMask mask;
  /// Which prediction was subtracted; empty when the SRN found nothing.
  std::optional<std::size_t> srn_prediction;
  /// Set when no manipulator prediction was available, so the mask may still
  /// contain manipulator pixels.
  bool no_srn_warning = false;
};

ObjectAnnotation annotate_object(const std::string& frame_id, const BinaryMask& m_fg,
                                 std::span<const SrnPrediction> preds);

}  // namespace graspseg
