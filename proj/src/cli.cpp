#include "graspseg/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "graspseg/augment.hpp"
#include "graspseg/browatzki.hpp"
#include "graspseg/fg_pipeline.hpp"
#include "graspseg/io.hpp"
#include "graspseg/kinematics.hpp"
#include "graspseg/metrics.hpp"
#include "graspseg/object_annotate.hpp"
#include "graspseg/synth.hpp"

namespace graspseg {

using nlohmann::json;

namespace {

constexpr std::int64_t kObjectClassId = 2;

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// Options shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
};

json provenance(const CLI::App& sub, const Common& common) {
  json params = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out" || name == "seed") continue;
    const auto& res = opt->results();
    if (res.empty()) {
      params[name] = opt->get_default_str();
    } else if (res.size() == 1) {
      params[name] = res.front();
    } else {
      params[name] = res;
    }
  }
  return {{"tool", "graspseg"}, {"command", sub.get_name()}, {"seed", common.seed}, {"params", params}};
}

void write_provenance_dir(const fs::path& dir, const CLI::App& sub, const Common& common) {
  write_json(dir / "provenance.json", provenance(sub, common));
}

void write_provenance_file(const fs::path& file, const CLI::App& sub, const Common& common) {
  write_json(fs::path(file.string() + ".provenance.json"), provenance(sub, common));
}

void flush_warnings(std::ostream& err, const std::vector<std::vector<std::string>>& per_item) {
  for (const auto& list : per_item)
    for (const auto& w : list) err << "warning: " << w << "\n";
}

struct FrameData {
  FrameRecord record;
  RgbImage rgb;
  DepthImage depth;
};

FrameData load_frame_data(const fs::path& sidecar, bool need_depth, std::vector<std::string>& warnings) {
  FrameData f;
  f.record = load_frame(sidecar);
  const fs::path dir = sidecar.parent_path();
  f.rgb = load_rgb_png(dir / f.record.rgb);
  if (need_depth) {
    if (f.record.depth.empty()) throw FormatError(sidecar.string() + " has no depth image");
    std::size_t clamped = 0;
    f.depth = load_depth_png(dir / f.record.depth, f.record.max_range_mm, &clamped);
    if (clamped > 0)
      warnings.push_back(f.record.id + ": " + std::to_string(clamped) +
                         " depth readings beyond max range marked invalid");
    require_same_shape(f.rgb, f.depth, "frame rgb/depth");
  }
  return f;
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--seed", common.seed, "Random seed recorded in provenance");
}

void add_fg_options(CLI::App* sub, FgPipelineParams& p) {
  sub->add_option("--lambda", p.select.lambda, "Depth allowance past each link, mm");
  sub->add_option("--felz-sigma", p.felz.sigma, "Depth smoothing sigma");
  sub->add_option("--felz-k", p.felz.k, "Over-segmentation scale parameter");
  sub->add_option("--min-size", p.felz.min_size, "Minimum segment size");
  sub->add_option("--open-kernel", p.open_kernel, "Opening kernel size");
  sub->add_option("--erode-kernel", p.erode_kernel, "Erosion kernel size (precision mask)");
  sub->add_option("--dilate-kernel", p.dilate_kernel, "Dilation kernel size (recall mask)");
  sub->add_option("--iterations", p.grabcut.iterations, "GrabCut iterations");
  sub->add_option("--gamma", p.grabcut.gamma, "GrabCut smoothness weight");
  sub->add_option("--components", p.grabcut.n_components, "GMM components per class");
}

FgResult run_pipeline(const FrameData& f, const FgPipelineParams& params, std::uint64_t seed,
                      bool debug, std::vector<std::string>& warnings) {
  FgResult r = foreground_mask(f.rgb, f.depth, f.record.links, f.record.intrinsics, params, seed, debug);
  if (r.degenerate) warnings.push_back(f.record.id + ": trimap without seeds, empty foreground");
  return r;
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
  std::string out;
  int count = 1;
  std::string spec;
  int width = 640, height = 480;
  double depth_noise = 5.0, color_noise = 4.0;
  std::string saturation = "high";
  std::string texture = "random";
  bool no_object = false;
  std::string prefix = "scene";
};

void run_synth(const SynthOpts& o, const Common& common, const CLI::App& sub, Streams) {
  const fs::path out(o.out);
  fs::create_directories(out);
  std::optional<SceneSpec> base;
  if (!o.spec.empty()) base = scene_spec_from_json(read_json(o.spec));

  parallel_for(static_cast<std::size_t>(o.count), [&](std::size_t i) {
    SceneSpec spec;
    if (base) {
      spec = *base;
      spec.seed = common.seed + i;
    } else {
      RandomSceneOptions ro;
      ro.width = o.width;
      ro.height = o.height;
      ro.depth_noise_sigma = o.depth_noise;
      ro.color_noise_sigma = o.color_noise;
      ro.saturation = o.saturation == "low" ? ObjectSaturation::Low : ObjectSaturation::High;
      ro.with_object = !o.no_object;
      if (o.texture == "flat") ro.texture = TextureMode::Flat;
      else if (o.texture == "checker") ro.texture = TextureMode::Checker;
      else if (o.texture == "noise") ro.texture = TextureMode::Noise;
      spec = random_scene_spec(common.seed + i, ro);
    }
    const SceneBundle b = generate_scene(spec);
    char id_buf[64];
    std::snprintf(id_buf, sizeof(id_buf), "%s_%04zu", o.prefix.c_str(), i);
    const std::string id = id_buf;

    FrameRecord rec;
    rec.id = id;
    rec.rgb = id + ".rgb.png";
    rec.depth = id + ".depth.png";
    rec.intrinsics = spec.intrinsics;
    rec.links = b.links;
    rec.gt_arm = id + ".arm.png";
    rec.gt_object = id + ".object.png";
    rec.gt_foreground = id + ".fg.png";
    rec.max_range_mm = static_cast<float>(spec.max_range_mm);
    save_rgb_png(out / rec.rgb, b.rgb);
    save_depth_png(out / rec.depth, b.depth);
    save_mask_png(out / *rec.gt_arm, b.gt_arm);
    save_mask_png(out / *rec.gt_object, b.gt_object);
    save_mask_png(out / *rec.gt_foreground, b.gt_foreground);
    write_json(out / (id + ".scene.json"), scene_spec_to_json(spec));
    save_frame(out, rec);
  });
  write_provenance_dir(out, sub, common);
}

// ---------------------------------------------------------------- fgseg

struct FgsegOpts {
  std::string in, out;
  bool debug = false;
  FgPipelineParams params;
};

void run_fgseg(const FgsegOpts& o, const Common& common, const CLI::App& sub, Streams s) {
  o.params.validate();
  const fs::path out(o.out);
  fs::create_directories(out);
  const auto frames = list_frames(o.in);
  std::vector<std::vector<std::string>> warnings(frames.size());
  std::vector<json> summary(frames.size());

  parallel_for(frames.size(), [&](std::size_t i) {
    const FrameData f = load_frame_data(frames[i], true, warnings[i]);
    const FgResult r = run_pipeline(f, o.params, common.seed, o.debug, warnings[i]);
    const std::string& id = f.record.id;
    save_mask_png(out / (id + ".png"), r.foreground);
    if (r.debug) {
      save_mask_png(out / "debug" / (id + ".m0.png"), r.debug->m0);
      save_mask_png(out / "debug" / (id + ".precision.png"), r.debug->precision_mask);
      save_mask_png(out / "debug" / (id + ".recall.png"), r.debug->recall_mask);
      save_trimap_png(out / "debug" / (id + ".trimap.png"), r.debug->initial_trimap);
      save_trimap_png(out / "debug" / (id + ".refined.png"), r.debug->refined_trimap);
      json links = json::array();
      for (const auto& l : r.debug->links)
        links.push_back({{"row", l.pixel.row}, {"col", l.pixel.col}, {"z", l.expected_depth_z},
                         {"in_bounds", l.in_bounds}});
      write_json(out / "debug" / (id + ".debug.json"),
                 {{"segments", r.debug->segments.segment_count},
                  {"valid_segments", r.debug->segments.valid_segment_count()},
                  {"links", links}});
    }
    summary[i] = {{"id", id}, {"degenerate", r.degenerate}, {"area", mask_area(r.foreground)}};
  });
  flush_warnings(s.err, warnings);
  write_json(out / "summary.json", {{"frames", summary}});
  write_provenance_dir(out, sub, common);
  s.out << "segmented " << frames.size() << " frame(s)\n";
}

// ---------------------------------------------------------------- selfdata

struct SelfdataOpts {
  std::string in, out;
  FgPipelineParams params;
};

void run_selfdata(const SelfdataOpts& o, const Common& common, const CLI::App& sub, Streams s) {
  o.params.validate();
  const fs::path out(o.out);
  fs::create_directories(out);
  const auto frames = list_frames(o.in);
  std::vector<std::vector<std::string>> warnings(frames.size());
  std::vector<BinaryMask> masks(frames.size());
  std::vector<FrameRecord> records(frames.size());

  parallel_for(frames.size(), [&](std::size_t i) {
    const FrameData f = load_frame_data(frames[i], true, warnings[i]);
    masks[i] = run_pipeline(f, o.params, common.seed, false, warnings[i]).foreground;
    records[i] = f.record;
    save_mask_png(out / (f.record.id + ".png"), masks[i]);
  });
  flush_warnings(s.err, warnings);

  AnnotationSet set;
  set.categories = {{kManipulatorClassId, "manipulator"}};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i + 1);
    set.images.push_back({id, records[i].rgb, masks[i].height(), masks[i].width()});
    set.add_mask(id, kManipulatorClassId, masks[i]);
  }
  save_annotations(out / "annotations.json", set);
  write_provenance_dir(out, sub, common);
  s.out << "labeled " << frames.size() << " manipulator frame(s)\n";
}

// ---------------------------------------------------------------- augment

struct AugmentOpts {
  std::string frames, images, backgrounds, objects, out;
  AugmentSpec spec;
  std::vector<std::string> splits{"Orig", "FG", "BG", "FGBG"};
};

void run_augment(AugmentOpts o, const Common& common, const CLI::App& sub, Streams s) {
  o.spec.seed = common.seed;
  o.spec.splits.clear();
  for (const auto& name : o.splits) {
    if (name == "Orig") o.spec.splits.push_back(AugmentSplit::Orig);
    else if (name == "FG") o.spec.splits.push_back(AugmentSplit::FG);
    else if (name == "BG") o.spec.splits.push_back(AugmentSplit::BG);
    else if (name == "FGBG") o.spec.splits.push_back(AugmentSplit::FGBG);
    else throw InvalidArgument("unknown split " + name);
  }

  const AnnotationSet source = load_annotations(o.frames);
  const fs::path image_dir = o.images.empty() ? fs::path(o.frames).parent_path() : fs::path(o.images);
  std::vector<LabeledFrame> frames;
  for (const auto& im : source.images) {
    LabeledFrame f{load_rgb_png(image_dir / im.file_name), BinaryMask(im.height, im.width)};
    require_same_shape(f.rgb, f.manipulator_mask, "augment frame");
    for (const auto& a : source.annotations)
      if (a.image_id == im.id && a.category_id == kManipulatorClassId)
        f.manipulator_mask = mask_union(f.manipulator_mask, rle_decode(a.segmentation));
    frames.push_back(std::move(f));
  }
  std::vector<RgbImage> backgrounds;
  if (!o.backgrounds.empty())
    for (const auto& p : list_pngs(o.backgrounds)) backgrounds.push_back(load_rgb_png(p));
  std::vector<RgbaImage> objects;
  if (!o.objects.empty())
    for (const auto& p : list_pngs(o.objects)) objects.push_back(load_rgba_png(p));

  const auto plan = plan_srn_dataset(frames.size(), backgrounds.size(), objects.size(), o.spec);
  const fs::path out(o.out);
  fs::create_directories(out);
  std::vector<std::string> names(plan.size());
  std::vector<AnnotationEntry> entries(plan.size());
  std::vector<std::pair<int, int>> dims(plan.size());

  parallel_for(plan.size(), [&](std::size_t i) {
    const AugmentItem& item = plan[i];
    const LabeledFrame f = render_item(item, frames, backgrounds, objects);
    char name[64];
    std::snprintf(name, sizeof(name), "%s/%s_%06zu.png", split_name(item.split), split_name(item.split),
                  item.index);
    names[i] = name;
    save_rgb_png(out / names[i], f.rgb);
    AnnotationSet scratch;
    scratch.add_mask(0, kManipulatorClassId, f.manipulator_mask);
    entries[i] = scratch.annotations.front();
    dims[i] = {f.rgb.height(), f.rgb.width()};
  });

  AnnotationSet set;
  set.categories = {{kManipulatorClassId, "manipulator"}};
  auto& all = set.splits["All"];
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i + 1);
    set.images.push_back({id, names[i], dims[i].first, dims[i].second});
    AnnotationEntry e = entries[i];
    e.id = id;
    e.image_id = id;
    set.annotations.push_back(std::move(e));
    set.splits[split_name(plan[i].split)].push_back(id);
    all.push_back(id);
  }
  save_annotations(out / "annotations.json", set);
  write_provenance_dir(out, sub, common);
  for (const auto& [name, ids] : set.splits) s.out << name << " " << ids.size() << "\n";
}

// ---------------------------------------------------------------- annotate

struct AnnotateOpts {
  std::string in, srn_masks, srn_suffix = ".png", fg_masks, out;
  FgPipelineParams params;
};

void run_annotate(const AnnotateOpts& o, const Common& common, const CLI::App& sub, Streams s) {
  o.params.validate();
  const fs::path out(o.out);
  fs::create_directories(out);
  const auto frames = list_frames(o.in);
  std::vector<std::vector<std::string>> warnings(frames.size());
  std::vector<ObjectAnnotation> results(frames.size());
  std::vector<std::string> rgb_names(frames.size());

  parallel_for(frames.size(), [&](std::size_t i) {
    const bool have_fg = !o.fg_masks.empty();
    const FrameData f = load_frame_data(frames[i], !have_fg, warnings[i]);
    const std::string& id = f.record.id;
    BinaryMask fg = have_fg ? load_mask_png(fs::path(o.fg_masks) / (id + ".png"))
                            : run_pipeline(f, o.params, common.seed, false, warnings[i]).foreground;
    require_same_shape(fg, f.rgb, "foreground mask");
    const auto preds = load_srn_predictions(o.srn_masks, id, o.srn_suffix);
    for (const auto& p : preds) require_same_shape(p.mask, f.rgb, "SRN mask");
    results[i] = annotate_object(id, fg, preds);
    if (results[i].no_srn_warning)
      warnings[i].push_back(id + ": no manipulator prediction, object mask may contain manipulator pixels");
    rgb_names[i] = f.record.rgb;
    save_mask_png(out / (id + ".png"), results[i].mask);
  });
  flush_warnings(s.err, warnings);

  AnnotationSet set;
  set.categories = {{kObjectClassId, "object"}};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i + 1);
    set.images.push_back({id, rgb_names[i], results[i].mask.height(), results[i].mask.width()});
    set.add_mask(id, kObjectClassId, results[i].mask);
  }
  save_annotations(out / "annotations.json", set);
  write_provenance_dir(out, sub, common);
  s.out << "annotated " << frames.size() << " frame(s)\n";
}

// ---------------------------------------------------------------- baseline

struct BaselineOpts {
  std::string in, out;
  BrowatzkiParams params;
  bool log_domain = false, diagonal = false;
  std::vector<int> center;
};

void run_baseline(BaselineOpts o, const Common& common, const CLI::App& sub, Streams s) {
  if (o.log_domain) o.params.threshold_domain = ThresholdDomain::LogDensity;
  if (o.diagonal) o.params.covariance = CovarianceType::Diagonal;
  if (!o.center.empty()) o.params.center = PixelCoord{o.center.at(0), o.center.at(1)};
  o.params.validate();
  const fs::path out(o.out);
  fs::create_directories(out);
  const auto frames = list_frames(o.in);
  std::vector<std::vector<std::string>> warnings(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) {
    const FrameData f = load_frame_data(frames[i], false, warnings[i]);
    BrowatzkiParams p = o.params;
    // Without an explicit centre, aim at the gripper: the last link, if it lands in the image.
    if (!p.center && !f.record.links.empty() && f.record.links.back().z > 0) {
      const auto g = project_link(f.record.links.back(), f.record.intrinsics, f.rgb.height(), f.rgb.width());
      if (g.in_bounds) p.center = g.pixel;
    }
    save_mask_png(out / (f.record.id + ".png"), browatzki_segment(f.rgb, p, common.seed));
  });
  flush_warnings(s.err, warnings);
  write_provenance_dir(out, sub, common);
  s.out << "baseline segmented " << frames.size() << " frame(s)\n";
}

// ---------------------------------------------------------------- eval-miou

struct EvalMiouOpts {
  std::string pred, gt, pred_suffix = ".png", gt_suffix = ".png", classes, out;
  PrAggregation aggregation = PrAggregation::ClassMean;
};

MaskSet load_mask_dir(const fs::path& dir, const std::string& suffix) {
  if (!fs::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<BinaryMask> masks(files.size());
  parallel_for(files.size(), [&](std::size_t i) { masks[i] = load_mask_png(files[i]); });
  MaskSet out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string name = files[i].filename().string();
    out.emplace(name.substr(0, name.size() - suffix.size()), std::move(masks[i]));
  }
  return out;
}

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

void run_eval_miou(const EvalMiouOpts& o, const Common& common, const CLI::App& sub, Streams s) {
  const MaskSet gts = load_mask_dir(o.gt, o.gt_suffix);
  const MaskSet preds = load_mask_dir(o.pred, o.pred_suffix);
  ClassOfImage classes;
  if (!o.classes.empty()) classes = read_json(o.classes).get<ClassOfImage>();

  MetricReport report = miou_report(preds, gts, classes);
  const PrecisionRecall pr = pixel_precision_recall(preds, gts, classes, o.aggregation, &report);
  for (const auto& w : report.warnings) s.err << "warning: " << w << "\n";

  for (const auto& [cls, v] : report.class_miou)
    s.out << "class " << cls << " mIoU " << fixed3(v) << " precision " << fixed3(report.class_precision[cls])
          << " recall " << fixed3(report.class_recall[cls]) << "\n";
  s.out << "overall mIoU " << fixed3(report.overall_miou) << "\n";
  s.out << "precision " << fixed3(pr.precision) << "\n";
  s.out << "recall " << fixed3(pr.recall) << "\n";

  if (!o.out.empty()) {
    json j = {{"images", gts.size()},
              {"class_miou", report.class_miou},
              {"overall_miou", report.overall_miou},
              {"class_precision", report.class_precision},
              {"class_recall", report.class_recall},
              {"precision", pr.precision},
              {"recall", pr.recall},
              {"warnings", report.warnings}};
    write_json(o.out, j);
    write_provenance_file(o.out, sub, common);
  }
}

// ---------------------------------------------------------------- eval-ap

struct EvalApOpts {
  std::string pred, gt, out;
  IouType mode = IouType::Mask;
};

void run_eval_ap(const EvalApOpts& o, const Common& common, const CLI::App& sub, Streams s) {
  const AnnotationSet gt = load_annotations(o.gt);
  const AnnotationSet pred = load_annotations(o.pred);
  std::vector<GroundTruthInstance> gts;
  for (const auto& a : gt.annotations) gts.push_back({a.image_id, a.category_id, rle_decode(a.segmentation)});
  std::vector<Detection> dets;
  for (const auto& a : pred.annotations) {
    if (!a.score) throw FormatError("detection " + std::to_string(a.id) + " has no score");
    if (!gt.find_image(a.image_id))
      throw IntegrityError("detection " + std::to_string(a.id) + " refers to image " +
                           std::to_string(a.image_id) + " missing from ground truth");
    dets.push_back({a.image_id, a.category_id, rle_decode(a.segmentation), *a.score});
  }
  std::vector<std::string> warnings;
  const ApTable t = coco_ap(dets, gts, o.mode, &warnings);
  for (const auto& w : warnings) s.err << "warning: " << w << "\n";
  s.out << "AP " << fixed3(t.ap) << "\nAP50 " << fixed3(t.ap50) << "\nAP75 " << fixed3(t.ap75)
        << "\nAPs " << fixed3(t.ap_small) << "\nAPm " << fixed3(t.ap_medium) << "\nAPl "
        << fixed3(t.ap_large) << "\n";
  if (!o.out.empty()) {
    write_json(o.out, {{"AP", t.ap},
                       {"AP50", t.ap50},
                       {"AP75", t.ap75},
                       {"APs", t.ap_small},
                       {"APm", t.ap_medium},
                       {"APl", t.ap_large},
                       {"iou_type", o.mode == IouType::Mask ? "mask" : "box"},
                       {"warnings", warnings}});
    write_provenance_file(o.out, sub, common);
  }
}

// ---------------------------------------------------------------- overlay

struct OverlayOpts {
  std::string in, srn_masks, srn_suffix = ".png", objects, out;
  double alpha = 0.5;
};

void run_overlay(const OverlayOpts& o, const Common& common, const CLI::App& sub, Streams s) {
  if (!(o.alpha >= 0.0 && o.alpha <= 1.0)) throw InvalidArgument("overlay alpha must lie in [0,1]");
  const fs::path out(o.out);
  fs::create_directories(out);
  const auto frames = list_frames(o.in);
  std::vector<std::vector<std::string>> warnings(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) {
    const FrameData f = load_frame_data(frames[i], false, warnings[i]);
    const std::string& id = f.record.id;
    BinaryMask srn(f.rgb.height(), f.rgb.width()), obj(f.rgb.height(), f.rgb.width());
    if (!o.srn_masks.empty()) {
      const auto preds = load_srn_predictions(o.srn_masks, id, o.srn_suffix);
      srn = select_srn_prediction(preds, f.rgb.height(), f.rgb.width());
      if (preds.empty()) warnings[i].push_back(id + ": no manipulator prediction to draw");
    }
    if (!o.objects.empty()) obj = load_mask_png(fs::path(o.objects) / (id + ".png"));
    require_same_shape(srn, f.rgb, "SRN mask");
    require_same_shape(obj, f.rgb, "object mask");
    RgbImage img = f.rgb;
    auto blend = [&](Rgb& p, Rgb tint) {
      auto mix = [&](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround((1.0 - o.alpha) * a + o.alpha * b));
      };
      p = {mix(p.r, tint.r), mix(p.g, tint.g), mix(p.b, tint.b)};
    };
    for (std::size_t k = 0; k < img.size(); ++k) {
      if (srn[k]) blend(img[k], {0, 0, 255});
      if (obj[k]) blend(img[k], {255, 0, 0});
    }
    save_rgb_png(out / (id + ".overlay.png"), img);
  });
  flush_warnings(s.err, warnings);
  write_provenance_dir(out, sub, common);
  s.out << "rendered " << frames.size() << " overlay(s)\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"In-hand object segmentation from robot kinematics and depth", "graspseg"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  // Config sections are named after subcommands ([fgseg], [synth], ...).
  app.set_config("--config", "", "Config file (TOML); command-line flags take precedence");
  app.fallthrough();

  Common common;

  SynthOpts synth;
  auto* s_synth = app.add_subcommand("synth", "Generate synthetic RGB-D scenes with ground truth");
  s_synth->add_option("--out", synth.out, "Output directory")->required();
  s_synth->add_option("--count", synth.count, "Number of scenes")->check(CLI::PositiveNumber);
  s_synth->add_option("--spec", synth.spec, "Scene spec file (JSON); random scenes when omitted")
      ->check(CLI::ExistingFile);
  s_synth->add_option("--width", synth.width, "Image width")->check(CLI::PositiveNumber);
  s_synth->add_option("--height", synth.height, "Image height")->check(CLI::PositiveNumber);
  s_synth->add_option("--depth-noise", synth.depth_noise, "Depth noise sigma, mm");
  s_synth->add_option("--color-noise", synth.color_noise, "Colour noise sigma");
  s_synth->add_option("--saturation", synth.saturation, "Object colour saturation")
      ->check(CLI::IsMember({"low", "high"}));
  s_synth->add_option("--texture", synth.texture, "Background texture")
      ->check(CLI::IsMember({"random", "flat", "checker", "noise"}));
  s_synth->add_flag("--no-object", synth.no_object, "Manipulator-only scenes");
  s_synth->add_option("--prefix", synth.prefix, "Frame id prefix");
  add_common(s_synth, common);

  FgsegOpts fgseg;
  auto* s_fgseg = app.add_subcommand("fgseg", "Foreground segmentation from kinematics and depth");
  s_fgseg->add_option("--in", fgseg.in, "Frame directory")->required()->check(CLI::ExistingDirectory);
  s_fgseg->add_option("--out", fgseg.out, "Output directory")->required();
  s_fgseg->add_flag("--debug", fgseg.debug, "Also write intermediate masks and trimaps");
  add_fg_options(s_fgseg, fgseg.params);
  add_common(s_fgseg, common);

  SelfdataOpts selfdata;
  auto* s_self = app.add_subcommand("selfdata", "Label manipulator-only frames as an annotation set");
  s_self->add_option("--in", selfdata.in, "Frame directory")->required()->check(CLI::ExistingDirectory);
  s_self->add_option("--out", selfdata.out, "Output directory")->required();
  add_fg_options(s_self, selfdata.params);
  add_common(s_self, common);

  AugmentOpts augment;
  auto* s_aug = app.add_subcommand("augment", "Build the augmented manipulator training set");
  s_aug->add_option("--frames", augment.frames, "Manipulator annotation file")->required()
      ->check(CLI::ExistingFile);
  s_aug->add_option("--images", augment.images, "Directory of the annotated images (default: beside --frames)");
  s_aug->add_option("--backgrounds", augment.backgrounds, "Directory of background PNGs");
  s_aug->add_option("--objects", augment.objects, "Directory of RGBA object PNGs");
  s_aug->add_option("--out", augment.out, "Output directory")->required();
  s_aug->add_option("--repeats", augment.spec.repeats, "Repetitions per resource");
  s_aug->add_option("--scale-min", augment.spec.scale_min, "Minimum object scale");
  s_aug->add_option("--scale-max", augment.spec.scale_max, "Maximum object scale");
  s_aug->add_option("--rotation-min", augment.spec.rotation_min_deg, "Minimum rotation, degrees");
  s_aug->add_option("--rotation-max", augment.spec.rotation_max_deg, "Maximum rotation, degrees");
  s_aug->add_option("--splits", augment.splits, "Splits to generate")
      ->check(CLI::IsMember({"Orig", "FG", "BG", "FGBG"}));
  add_common(s_aug, common);

  AnnotateOpts annotate;
  auto* s_ann = app.add_subcommand("annotate", "Object masks from foreground minus manipulator predictions");
  s_ann->add_option("--in", annotate.in, "Frame directory")->required()->check(CLI::ExistingDirectory);
  s_ann->add_option("--srn-masks", annotate.srn_masks, "Manipulator prediction directory")->required()
      ->check(CLI::ExistingDirectory);
  s_ann->add_option("--srn-suffix", annotate.srn_suffix, "Prediction mask file suffix");
  s_ann->add_option("--fg-masks", annotate.fg_masks, "Precomputed foreground masks (skips segmentation)")
      ->check(CLI::ExistingDirectory);
  s_ann->add_option("--out", annotate.out, "Output directory")->required();
  add_fg_options(s_ann, annotate.params);
  add_common(s_ann, common);

  BaselineOpts baseline;
  auto* s_base = app.add_subcommand("baseline", "Colour-model baseline segmentation");
  s_base->add_option("--in", baseline.in, "Frame directory")->required()->check(CLI::ExistingDirectory);
  s_base->add_option("--out", baseline.out, "Output directory")->required();
  s_base->add_option("--inner", baseline.params.inner_box, "Inner box side, px");
  s_base->add_option("--outer", baseline.params.outer_box, "Outer box side, px");
  s_base->add_option("--gaussians", baseline.params.n_gaussians, "Mixture components");
  s_base->add_option("--threshold", baseline.params.density_threshold, "Density threshold");
  s_base->add_flag("--log-domain", baseline.log_domain, "Threshold log-density instead of density");
  s_base->add_flag("--diagonal", baseline.diagonal, "Diagonal covariances");
  s_base->add_option("--center", baseline.center, "Box centre ROW COL (default: projected gripper link, else image centre)")->expected(2);
  add_common(s_base, common);

  EvalMiouOpts miou;
  auto* s_miou = app.add_subcommand("eval-miou", "Per-class mIoU and pixel precision/recall");
  s_miou->add_option("--pred", miou.pred, "Prediction mask directory")->required()
      ->check(CLI::ExistingDirectory);
  s_miou->add_option("--gt", miou.gt, "Ground-truth mask directory")->required()->check(CLI::ExistingDirectory);
  s_miou->add_option("--pred-suffix", miou.pred_suffix, "Prediction file suffix");
  s_miou->add_option("--gt-suffix", miou.gt_suffix, "Ground-truth file suffix");
  s_miou->add_option("--classes", miou.classes, "JSON object mapping image id to class")
      ->check(CLI::ExistingFile);
  const std::map<std::string, PrAggregation> aggregations{
      {"class", PrAggregation::ClassMean}, {"image", PrAggregation::ImageMean}, {"pixel", PrAggregation::PixelPool}};
  s_miou->add_option("--aggregation", miou.aggregation, "Precision/recall aggregation: class, image or pixel")
      ->transform(CLI::CheckedTransformer(aggregations));
  s_miou->add_option("--out", miou.out, "Report file (JSON)");
  add_common(s_miou, common);

  EvalApOpts ap;
  auto* s_ap = app.add_subcommand("eval-ap", "COCO-style average precision");
  s_ap->add_option("--pred", ap.pred, "Detections (annotation file with scores)")->required()
      ->check(CLI::ExistingFile);
  s_ap->add_option("--gt", ap.gt, "Ground-truth annotation file")->required()->check(CLI::ExistingFile);
  const std::map<std::string, IouType> modes{{"mask", IouType::Mask}, {"box", IouType::Box}};
  s_ap->add_option("--iou-type", ap.mode, "mask or box")->transform(CLI::CheckedTransformer(modes));
  s_ap->add_option("--out", ap.out, "Report file (JSON)");
  add_common(s_ap, common);

  OverlayOpts overlay;
  auto* s_ov = app.add_subcommand("overlay", "Composite manipulator (blue) and object (red) masks");
  s_ov->add_option("--in", overlay.in, "Frame directory")->required()->check(CLI::ExistingDirectory);
  s_ov->add_option("--srn-masks", overlay.srn_masks, "Manipulator prediction directory")
      ->check(CLI::ExistingDirectory);
  s_ov->add_option("--srn-suffix", overlay.srn_suffix, "Prediction mask file suffix");
  s_ov->add_option("--objects", overlay.objects, "Object mask directory")->check(CLI::ExistingDirectory);
  s_ov->add_option("--alpha", overlay.alpha, "Tint opacity");
  s_ov->add_option("--out", overlay.out, "Output directory")->required();
  add_common(s_ov, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  const Streams streams{out, err};
  try {
    if (s_synth->parsed()) run_synth(synth, common, *s_synth, streams);
    else if (s_fgseg->parsed()) run_fgseg(fgseg, common, *s_fgseg, streams);
    else if (s_self->parsed()) run_selfdata(selfdata, common, *s_self, streams);
    else if (s_aug->parsed()) run_augment(augment, common, *s_aug, streams);
    else if (s_ann->parsed()) run_annotate(annotate, common, *s_ann, streams);
    else if (s_base->parsed()) run_baseline(baseline, common, *s_base, streams);
    else if (s_miou->parsed()) run_eval_miou(miou, common, *s_miou, streams);
    else if (s_ap->parsed()) run_eval_ap(ap, common, *s_ap, streams);
    else if (s_ov->parsed()) run_overlay(overlay, common, *s_ov, streams);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace graspseg
