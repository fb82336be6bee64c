#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspseg/core.hpp"

namespace graspseg {

/// |a & b| / |a | b|; two empty masks agree perfectly (1.0).
double iou(const BinaryMask& a, const BinaryMask& b);

using MaskSet = std::map<std::string, BinaryMask>;
using ClassOfImage = std::map<std::string, std::string>;

enum class PrAggregation { ClassMean, ImageMean, PixelPool };

struct ApTable {
  double ap = -1.0;
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_small = -1.0;
  double ap_medium = -1.0;
  double ap_large = -1.0;
};

struct MetricReport {
  std::map<std::string, double> class_miou;
  double overall_miou = 0.0;
  std::map<std::string, double> class_precision;
  std::map<std::string, double> class_recall;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<ApTable> ap;
  std::vector<std::string> warnings;
};

/// Per-image IoU, averaged per class, then averaged over classes without
/// weighting. Images absent from `class_of_image` fall in class "all"; a
/// prediction missing for a ground-truth image counts as an empty mask.
MetricReport miou_report(const MaskSet& preds, const MaskSet& gts, const ClassOfImage& class_of_image);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Pixelwise precision |p&g|/|p| and recall |p&g|/|g| (1.0 when the
/// denominator is empty), aggregated as requested.
PrecisionRecall pixel_precision_recall(const MaskSet& preds, const MaskSet& gts,
                                       const ClassOfImage& class_of_image,
                                       PrAggregation aggregation = PrAggregation::ClassMean,
                                       MetricReport* per_class = nullptr);

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t class_id = 0;
  BinaryMask mask;
  double score = 0.0;
};

struct GroundTruthInstance {
  std::int64_t image_id = 0;
  std::int64_t class_id = 0;
  BinaryMask mask;
};

enum class IouType { Box, Mask };

/// COCO-convention average precision: greedy score-ordered matching per image
/// and class, 101-point interpolated precision, IoU thresholds 0.50:0.05:0.95,
/// area ranges small < 32^2 <= medium < 96^2 <= large, at most 100 detections
/// per image. Undefined entries are -1.
ApTable coco_ap(std::span<const Detection> dets, std::span<const GroundTruthInstance> gts,
                IouType mode, std::vector<std::string>* warnings = nullptr);

/// IoU threshold k of the ten COCO thresholds, as the exact decimal (50+5k)/100.
double coco_iou_threshold(int k);

}  // namespace graspseg
