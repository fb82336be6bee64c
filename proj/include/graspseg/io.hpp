#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "graspseg/annotations.hpp"
#include "graspseg/augment.hpp"
#include "graspseg/core.hpp"
#include "graspseg/metrics.hpp"
#include "graspseg/object_annotate.hpp"
#include "graspseg/synth.hpp"

namespace graspseg {

namespace fs = std::filesystem;

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Reads a 16-bit single-channel PNG in millimeters. Readings beyond
/// `max_range_mm` are marked invalid and counted in `clamped`.
DepthImage load_depth_png(const fs::path& path, float max_range_mm = kDefaultMaxRangeMm,
                          std::size_t* clamped = nullptr);
void save_depth_png(const fs::path& path, const DepthImage& depth);

RgbImage load_rgb_png(const fs::path& path);
void save_rgb_png(const fs::path& path, const RgbImage& rgb);

/// Any non-zero value reads as set; masks are written as 0/255.
BinaryMask load_mask_png(const fs::path& path);
void save_mask_png(const fs::path& path, const BinaryMask& mask);

/// 4-channel PNGs keep their alpha; 3-channel ones are read as opaque.
RgbaImage load_rgba_png(const fs::path& path);

/// Gray PNG of the trimap, scaled by 85 so the four levels are visible.
void save_trimap_png(const fs::path& path, const Trimap& trimap);

/// Rounds every floating value to 6 significant digits and pretty-prints with
/// sorted keys, so equal inputs give equal bytes.
std::string dump_json(const nlohmann::json& j);
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

nlohmann::json annotations_to_json(const AnnotationSet& set);
AnnotationSet annotations_from_json(const nlohmann::json& j);
void save_annotations(const fs::path& path, const AnnotationSet& set);
/// Parses and validates; dangling references raise IntegrityError.
AnnotationSet load_annotations(const fs::path& path);

/// Per-frame sidecar. Paths are relative to the sidecar's directory.
struct FrameRecord {
  std::string id;
  std::string rgb;
  std::string depth;
  CameraIntrinsics intrinsics;
  std::vector<LinkPoint> links;
  std::optional<std::string> gt_arm;
  std::optional<std::string> gt_object;
  std::optional<std::string> gt_foreground;
  float max_range_mm = kDefaultMaxRangeMm;
};

inline constexpr const char* kFrameSuffix = ".frame.json";

nlohmann::json frame_to_json(const FrameRecord& f);
FrameRecord frame_from_json(const nlohmann::json& j);
void save_frame(const fs::path& dir, const FrameRecord& f);
/// Loads `<dir>/<id>.frame.json` and checks that every referenced file exists.
FrameRecord load_frame(const fs::path& sidecar);
/// Sidecars in `dir`, sorted by file name.
std::vector<fs::path> list_frames(const fs::path& dir);

nlohmann::json scene_spec_to_json(const SceneSpec& s);
SceneSpec scene_spec_from_json(const nlohmann::json& j);

/// Predictions for one frame: `<dir>/<id>.srn.json` holding
/// {"predictions": [{"mask": file, "score": s}]}, else `<dir>/<id><suffix>`
/// as one prediction with score 1, else none.
std::vector<SrnPrediction> load_srn_predictions(const fs::path& dir, const std::string& id,
                                                const std::string& suffix = ".png");

/// Worker count: hardware concurrency capped by GRASPSEG_THREADS when set.
unsigned worker_count();

/// Runs fn(0..n-1) on a bounded pool. The exception from the lowest failing
/// index is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace graspseg
