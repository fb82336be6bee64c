#include "graspseg/annotations.hpp"

#include <algorithm>
#include <set>

namespace graspseg {

Rle rle_encode(const BinaryMask& m) {
  Rle rle{m.height(), m.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int c = 0; c < m.width(); ++c) {
    for (int r = 0; r < m.height(); ++r) {
      const std::uint8_t v = m(r, c) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const Rle& rle) {
  BinaryMask m(rle.height, rle.width);
  const std::size_t total = m.size();
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (std::uint32_t run : rle.counts) {
    if (pos + run > total) throw IntegrityError("RLE counts exceed the stated mask size");
    for (std::uint32_t k = 0; k < run; ++k, ++pos) {
      const int c = static_cast<int>(pos / static_cast<std::size_t>(rle.height));
      const int r = static_cast<int>(pos % static_cast<std::size_t>(rle.height));
      m(r, c) = value;
    }
    value ^= 1;
  }
  if (pos != total) throw IntegrityError("RLE counts do not cover the stated mask size");
  return m;
}

BoundingBox mask_bbox(const BinaryMask& m) {
  int r0 = m.height(), c0 = m.width(), r1 = -1, c1 = -1;
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c)
      if (m(r, c)) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
  if (r1 < 0) return {};
  return {c0, r0, c1 - c0 + 1, r1 - r0 + 1};
}

AnnotationEntry& AnnotationSet::add_mask(std::int64_t image_id, std::int64_t category_id,
                                         const BinaryMask& mask, std::optional<double> score) {
  AnnotationEntry a;
  a.id = annotations.empty() ? 1 : annotations.back().id + 1;
  a.image_id = image_id;
  a.category_id = category_id;
  a.segmentation = rle_encode(mask);
  a.bbox = mask_bbox(mask);
  a.area = static_cast<std::int64_t>(mask_area(mask));
  a.score = score;
  annotations.push_back(std::move(a));
  return annotations.back();
}

const ImageEntry* AnnotationSet::find_image(std::int64_t id) const {
  for (const auto& im : images)
    if (im.id == id) return &im;
  return nullptr;
}

void AnnotationSet::validate() const {
  std::map<std::int64_t, const ImageEntry*> image_ids;
  for (const auto& im : images)
    if (!image_ids.emplace(im.id, &im).second)
      throw IntegrityError("duplicate image id " + std::to_string(im.id));
  std::set<std::int64_t> category_ids;
  for (const auto& c : categories)
    if (!category_ids.insert(c.id).second)
      throw IntegrityError("duplicate category id " + std::to_string(c.id));
  std::set<std::int64_t> ann_ids;
  for (const auto& a : annotations) {
    if (!ann_ids.insert(a.id).second)
      throw IntegrityError("duplicate annotation id " + std::to_string(a.id));
    const auto it = image_ids.find(a.image_id);
    if (it == image_ids.end())
      throw IntegrityError("annotation " + std::to_string(a.id) + " references missing image " +
                           std::to_string(a.image_id));
    if (!category_ids.contains(a.category_id))
      throw IntegrityError("annotation " + std::to_string(a.id) + " references missing category " +
                           std::to_string(a.category_id));
    if (a.segmentation.height != it->second->height || a.segmentation.width != it->second->width)
      throw IntegrityError("annotation " + std::to_string(a.id) + " mask size differs from image");
    std::uint64_t total = 0;
    for (auto c : a.segmentation.counts) total += c;
    if (total != static_cast<std::uint64_t>(a.segmentation.height) *
                     static_cast<std::uint64_t>(a.segmentation.width))
      throw IntegrityError("annotation " + std::to_string(a.id) + " RLE does not match its size");
  }
  for (const auto& [name, ids] : splits)
    for (auto id : ids)
      if (!image_ids.contains(id))
        throw IntegrityError("split " + name + " references missing image " + std::to_string(id));
}

}  // namespace graspseg
