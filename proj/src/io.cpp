#include "graspseg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace graspseg {

using nlohmann::json;

namespace {

cv::Mat read_png(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError("file not found: " + path.string());
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) throw FormatError("cannot decode image: " + path.string());
  return m;
}

void write_png(const fs::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imwrite(path.string(), m, params)) throw FormatError("cannot write image: " + path.string());
}

std::string describe(const cv::Mat& m) {
  return std::to_string(m.channels()) + " channel(s), " +
         (m.depth() == CV_8U ? "8-bit" : m.depth() == CV_16U ? "16-bit" : "other depth");
}

double round_sig6(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

void round_floats(json& j) {
  if (j.is_number_float()) {
    j = round_sig6(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& v : j) round_floats(v);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

const char* texture_name(TextureMode t) {
  switch (t) {
    case TextureMode::Flat: return "flat";
    case TextureMode::Checker: return "checker";
    case TextureMode::Noise: return "noise";
  }
  return "flat";
}

TextureMode texture_from(const std::string& s) {
  if (s == "flat") return TextureMode::Flat;
  if (s == "checker") return TextureMode::Checker;
  if (s == "noise") return TextureMode::Noise;
  throw FormatError("unknown texture mode: " + s);
}

json rgb_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }
Rgb rgb_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("colour must be [r, g, b]");
  return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

json point_json(const ImagePoint& p) { return json::array({p.row, p.col}); }
ImagePoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("image point must be [row, col]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

DepthImage load_depth_png(const fs::path& path, float max_range_mm, std::size_t* clamped) {
  const cv::Mat m = read_png(path);
  if (m.type() != CV_16UC1)
    throw FormatError("depth image must be 16-bit single channel, got " + describe(m) + ": " +
                      path.string());
  DepthImage out(m.rows, m.cols);
  std::size_t over = 0;
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint16_t>(r);
    for (int c = 0; c < m.cols; ++c) {
      const float v = row[c];
      if (v > max_range_mm) {
        ++over;
        out(r, c) = kInvalidDepth;
      } else {
        out(r, c) = v;
      }
    }
  }
  if (clamped) *clamped = over;
  return out;
}

void save_depth_png(const fs::path& path, const DepthImage& depth) {
  cv::Mat m(depth.height(), depth.width(), CV_16UC1);
  for (int r = 0; r < depth.height(); ++r) {
    auto* row = m.ptr<std::uint16_t>(r);
    for (int c = 0; c < depth.width(); ++c) {
      const float v = depth(r, c);
      if (!std::isfinite(v) || v < 0.0f || v > 65535.0f)
        throw InvalidArgument("depth value not representable in a 16-bit PNG");
      row[c] = static_cast<std::uint16_t>(std::lround(v));
    }
  }
  write_png(path, m);
}

RgbImage load_rgb_png(const fs::path& path) {
  const cv::Mat m = read_png(path);
  if (m.depth() != CV_8U || (m.channels() != 3 && m.channels() != 4))
    throw FormatError("colour image must be 8-bit with 3 or 4 channels, got " + describe(m) + ": " +
                      path.string());
  RgbImage out(m.rows, m.cols);
  const int ch = m.channels();
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.cols; ++c) out(r, c) = {row[c * ch + 2], row[c * ch + 1], row[c * ch]};
  }
  return out;
}

void save_rgb_png(const fs::path& path, const RgbImage& rgb) {
  cv::Mat m(rgb.height(), rgb.width(), CV_8UC3);
  for (int r = 0; r < rgb.height(); ++r) {
    auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < rgb.width(); ++c) {
      const Rgb& p = rgb(r, c);
      row[c * 3] = p.b;
      row[c * 3 + 1] = p.g;
      row[c * 3 + 2] = p.r;
    }
  }
  write_png(path, m);
}

BinaryMask load_mask_png(const fs::path& path) {
  const cv::Mat m = read_png(path);
  if (m.type() != CV_8UC1)
    throw FormatError("mask must be 8-bit single channel, got " + describe(m) + ": " + path.string());
  BinaryMask out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.cols; ++c) out(r, c) = row[c] ? 1 : 0;
  }
  return out;
}

void save_mask_png(const fs::path& path, const BinaryMask& mask) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int r = 0; r < mask.height(); ++r) {
    auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < mask.width(); ++c) row[c] = mask(r, c) ? 255 : 0;
  }
  write_png(path, m);
}

RgbaImage load_rgba_png(const fs::path& path) {
  const cv::Mat m = read_png(path);
  if (m.depth() != CV_8U || (m.channels() != 3 && m.channels() != 4))
    throw FormatError("object image must be 8-bit with 3 or 4 channels, got " + describe(m) + ": " +
                      path.string());
  RgbaImage out(m.rows, m.cols);
  const int ch = m.channels();
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.cols; ++c)
      out(r, c) = {row[c * ch + 2], row[c * ch + 1], row[c * ch],
                   ch == 4 ? row[c * ch + 3] : std::uint8_t{255}};
  }
  return out;
}

void save_trimap_png(const fs::path& path, const Trimap& trimap) {
  cv::Mat m(trimap.height(), trimap.width(), CV_8UC1);
  for (int r = 0; r < trimap.height(); ++r) {
    auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < trimap.width(); ++c) row[c] = static_cast<std::uint8_t>(trimap(r, c) * 85);
  }
  write_png(path, m);
}

std::string dump_json(const json& j) {
  json copy = j;
  round_floats(copy);
  return copy.dump(2) + "\n";
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path.string());
  f << dump_json(j);
  if (!f) throw FormatError("cannot write " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json annotations_to_json(const AnnotationSet& set) {
  json images = json::array(), anns = json::array(), cats = json::array();
  for (const auto& im : set.images)
    images.push_back({{"id", im.id}, {"file_name", im.file_name}, {"height", im.height}, {"width", im.width}});
  for (const auto& a : set.annotations) {
    json e = {{"id", a.id},
              {"image_id", a.image_id},
              {"category_id", a.category_id},
              {"segmentation", {{"size", {a.segmentation.height, a.segmentation.width}},
                                {"counts", a.segmentation.counts}}},
              {"bbox", {a.bbox.x, a.bbox.y, a.bbox.width, a.bbox.height}},
              {"area", a.area}};
    if (a.score) e["score"] = *a.score;
    anns.push_back(std::move(e));
  }
  for (const auto& c : set.categories) cats.push_back({{"id", c.id}, {"name", c.name}});
  json out = {{"images", images}, {"annotations", anns}, {"categories", cats}};
  if (!set.splits.empty()) out["splits"] = set.splits;
  return out;
}

AnnotationSet annotations_from_json(const json& j) {
  AnnotationSet set;
  try {
    for (const auto& im : j.at("images"))
      set.images.push_back({im.at("id").get<std::int64_t>(), im.at("file_name").get<std::string>(),
                            im.at("height").get<int>(), im.at("width").get<int>()});
    for (const auto& a : j.at("annotations")) {
      AnnotationEntry e;
      e.id = a.at("id").get<std::int64_t>();
      e.image_id = a.at("image_id").get<std::int64_t>();
      e.category_id = a.at("category_id").get<std::int64_t>();
      const auto& seg = a.at("segmentation");
      const auto& size = seg.at("size");
      e.segmentation.height = size.at(0).get<int>();
      e.segmentation.width = size.at(1).get<int>();
      e.segmentation.counts = seg.at("counts").get<std::vector<std::uint32_t>>();
      const auto& bb = a.at("bbox");
      e.bbox = {bb.at(0).get<int>(), bb.at(1).get<int>(), bb.at(2).get<int>(), bb.at(3).get<int>()};
      e.area = a.at("area").get<std::int64_t>();
      if (a.contains("score")) e.score = a.at("score").get<double>();
      set.annotations.push_back(std::move(e));
    }
    for (const auto& c : j.at("categories"))
      set.categories.push_back({c.at("id").get<std::int64_t>(), c.at("name").get<std::string>()});
    if (j.contains("splits"))
      set.splits = j.at("splits").get<std::map<std::string, std::vector<std::int64_t>>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed annotation file: ") + e.what());
  }
  set.validate();
  return set;
}

void save_annotations(const fs::path& path, const AnnotationSet& set) {
  set.validate();
  write_json(path, annotations_to_json(set));
}

AnnotationSet load_annotations(const fs::path& path) { return annotations_from_json(read_json(path)); }

json frame_to_json(const FrameRecord& f) {
  json links = json::array();
  for (const auto& l : f.links) links.push_back({l.x, l.y, l.z});
  json j = {{"id", f.id},
            {"rgb", f.rgb},
            {"depth", f.depth},
            {"intrinsics", {{"fx", f.intrinsics.fx}, {"fy", f.intrinsics.fy}, {"cx", f.intrinsics.cx},
                            {"cy", f.intrinsics.cy}}},
            {"links", links},
            {"max_range_mm", f.max_range_mm}};
  json gt = json::object();
  if (f.gt_arm) gt["arm"] = *f.gt_arm;
  if (f.gt_object) gt["object"] = *f.gt_object;
  if (f.gt_foreground) gt["foreground"] = *f.gt_foreground;
  if (!gt.empty()) j["gt"] = gt;
  return j;
}

FrameRecord frame_from_json(const json& j) {
  FrameRecord f;
  try {
    f.id = j.at("id").get<std::string>();
    f.rgb = j.at("rgb").get<std::string>();
    f.depth = get_or<std::string>(j, "depth", "");
    if (j.contains("intrinsics")) {
      const auto& k = j.at("intrinsics");
      f.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                      k.at("cy").get<double>()};
    }
    if (j.contains("links"))
      for (const auto& l : j.at("links")) {
        if (!l.is_array() || l.size() != 3) throw FormatError("link must be [x, y, z]");
        f.links.push_back({l[0].get<double>(), l[1].get<double>(), l[2].get<double>()});
      }
    f.max_range_mm = get_or<float>(j, "max_range_mm", kDefaultMaxRangeMm);
    if (j.contains("gt")) {
      const auto& gt = j.at("gt");
      if (gt.contains("arm")) f.gt_arm = gt.at("arm").get<std::string>();
      if (gt.contains("object")) f.gt_object = gt.at("object").get<std::string>();
      if (gt.contains("foreground")) f.gt_foreground = gt.at("foreground").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed frame sidecar: ") + e.what());
  }
  return f;
}

void save_frame(const fs::path& dir, const FrameRecord& f) {
  write_json(dir / (f.id + kFrameSuffix), frame_to_json(f));
}

FrameRecord load_frame(const fs::path& sidecar) {
  FrameRecord f = frame_from_json(read_json(sidecar));
  const fs::path dir = sidecar.parent_path();
  auto check = [&](const std::string& rel) {
    if (!rel.empty() && !fs::exists(dir / rel))
      throw FormatError(sidecar.string() + " references missing file " + rel);
  };
  check(f.rgb);
  check(f.depth);
  if (f.gt_arm) check(*f.gt_arm);
  if (f.gt_object) check(*f.gt_object);
  if (f.gt_foreground) check(*f.gt_foreground);
  return f;
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  const std::string suffix = kFrameSuffix;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

json scene_spec_to_json(const SceneSpec& s) {
  json arm = json::array(), links = json::array();
  for (const auto& p : s.arm)
    arm.push_back({{"shape", p.shape == PrimitiveShape::Capsule ? "capsule" : "rectangle"},
                   {"p0", point_json(p.p0)},
                   {"p1", point_json(p.p1)},
                   {"radius", p.radius},
                   {"depth_mm", p.depth_mm},
                   {"color", rgb_json(p.color)}});
  for (const auto& l : s.links) links.push_back({{"primitive", l.primitive}, {"t", l.t}});
  json j = {{"height", s.height},
            {"width", s.width},
            {"intrinsics", {{"fx", s.intrinsics.fx}, {"fy", s.intrinsics.fy}, {"cx", s.intrinsics.cx},
                            {"cy", s.intrinsics.cy}}},
            {"background", {{"depth_mm", s.background_depth_mm},
                            {"texture", texture_name(s.texture)},
                            {"color", rgb_json(s.background_color)},
                            {"color2", rgb_json(s.background_color2)},
                            {"checker_size", s.checker_size},
                            {"texture_amplitude", s.texture_amplitude}}},
            {"arm", arm},
            {"links", links},
            {"depth_noise_sigma", s.depth_noise_sigma},
            {"color_noise_sigma", s.color_noise_sigma},
            {"max_range_mm", s.max_range_mm},
            {"seed", s.seed}};
  if (s.object) {
    const auto& b = *s.object;
    j["object"] = {{"shape", b.shape == BlobShape::Ellipse ? "ellipse" : "rectangle"},
                   {"center", point_json(b.center)},
                   {"radius_row", b.radius_row},
                   {"radius_col", b.radius_col},
                   {"angle_deg", b.angle_deg},
                   {"depth_mm", b.depth_mm},
                   {"color", rgb_json(b.color)}};
  }
  return j;
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec s;
  try {
    s.height = get_or(j, "height", s.height);
    s.width = get_or(j, "width", s.width);
    if (j.contains("intrinsics")) {
      const auto& k = j.at("intrinsics");
      s.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                      k.at("cy").get<double>()};
    }
    if (j.contains("background")) {
      const auto& b = j.at("background");
      s.background_depth_mm = get_or(b, "depth_mm", s.background_depth_mm);
      if (b.contains("texture")) s.texture = texture_from(b.at("texture").get<std::string>());
      if (b.contains("color")) s.background_color = rgb_from(b.at("color"));
      if (b.contains("color2")) s.background_color2 = rgb_from(b.at("color2"));
      s.checker_size = get_or(b, "checker_size", s.checker_size);
      s.texture_amplitude = get_or(b, "texture_amplitude", s.texture_amplitude);
    }
    if (j.contains("arm"))
      for (const auto& p : j.at("arm")) {
        ArmPrimitive a;
        const std::string shape = get_or<std::string>(p, "shape", "capsule");
        if (shape == "capsule") a.shape = PrimitiveShape::Capsule;
        else if (shape == "rectangle") a.shape = PrimitiveShape::Rectangle;
        else throw FormatError("unknown arm primitive shape: " + shape);
        a.p0 = point_from(p.at("p0"));
        a.p1 = point_from(p.at("p1"));
        a.radius = get_or(p, "radius", a.radius);
        a.depth_mm = get_or(p, "depth_mm", a.depth_mm);
        if (p.contains("color")) a.color = rgb_from(p.at("color"));
        s.arm.push_back(a);
      }
    if (j.contains("links"))
      for (const auto& l : j.at("links"))
        s.links.push_back({l.at("primitive").get<int>(), get_or(l, "t", 0.5)});
    if (j.contains("object")) {
      const auto& o = j.at("object");
      ObjectBlob b;
      const std::string shape = get_or<std::string>(o, "shape", "ellipse");
      if (shape == "ellipse") b.shape = BlobShape::Ellipse;
      else if (shape == "rectangle") b.shape = BlobShape::Rectangle;
      else throw FormatError("unknown object shape: " + shape);
      b.center = point_from(o.at("center"));
      b.radius_row = get_or(o, "radius_row", b.radius_row);
      b.radius_col = get_or(o, "radius_col", b.radius_col);
      b.angle_deg = get_or(o, "angle_deg", b.angle_deg);
      b.depth_mm = get_or(o, "depth_mm", b.depth_mm);
      if (o.contains("color")) b.color = rgb_from(o.at("color"));
      s.object = b;
    }
    s.depth_noise_sigma = get_or(j, "depth_noise_sigma", s.depth_noise_sigma);
    s.color_noise_sigma = get_or(j, "color_noise_sigma", s.color_noise_sigma);
    s.max_range_mm = get_or(j, "max_range_mm", s.max_range_mm);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<SrnPrediction> load_srn_predictions(const fs::path& dir, const std::string& id,
                                                const std::string& suffix) {
  std::vector<SrnPrediction> out;
  const fs::path listing = dir / (id + ".srn.json");
  if (fs::exists(listing)) {
    const json j = read_json(listing);
    try {
      for (const auto& p : j.at("predictions"))
        out.push_back({load_mask_png(dir / p.at("mask").get<std::string>()), p.at("score").get<double>()});
    } catch (const json::exception& e) {
      throw FormatError(listing.string() + ": " + e.what());
    }
    return out;
  }
  const fs::path single = dir / (id + suffix);
  if (fs::exists(single)) out.push_back({load_mask_png(single), 1.0});
  return out;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRASPSEG_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= n || failure) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace graspseg
