#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graspseg/core.hpp"

namespace graspseg {

class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// COCO-style uncompressed RLE: column-major run lengths alternating
/// background/foreground, starting with background.
struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;
  bool operator==(const Rle&) const = default;
};

Rle rle_encode(const BinaryMask& m);
BinaryMask rle_decode(const Rle& rle);

struct BoundingBox {
  int x = 0, y = 0, width = 0, height = 0;  // columns, rows
  bool operator==(const BoundingBox&) const = default;
};

/// Tight box around set pixels; all-zero box for an empty mask.
BoundingBox mask_bbox(const BinaryMask& m);

struct ImageEntry {
  std::int64_t id = 0;
  std::string file_name;
  int height = 0;
  int width = 0;
  bool operator==(const ImageEntry&) const = default;
};

struct AnnotationEntry {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Rle segmentation;
  BoundingBox bbox;
  std::int64_t area = 0;
  std::optional<double> score;
  bool operator==(const AnnotationEntry&) const = default;
};

struct Category {
  std::int64_t id = 0;
  std::string name;
  bool operator==(const Category&) const = default;
};

struct AnnotationSet {
  std::vector<ImageEntry> images;
  std::vector<AnnotationEntry> annotations;
  std::vector<Category> categories;
  /// Named subsets of image ids (dataset splits); optional.
  std::map<std::string, std::vector<std::int64_t>> splits;

  /// Appends an annotation built from `mask`, deriving bbox and area.
  AnnotationEntry& add_mask(std::int64_t image_id, std::int64_t category_id, const BinaryMask& mask,
                            std::optional<double> score = std::nullopt);

  /// Throws IntegrityError on dangling ids, duplicate ids or RLE/image size
  /// disagreement.
  void validate() const;

  const ImageEntry* find_image(std::int64_t id) const;

  bool operator==(const AnnotationSet&) const = default;
};

inline constexpr std::int64_t kBackgroundClassId = 0;
inline constexpr std::int64_t kManipulatorClassId = 1;

}  // namespace graspseg
