#include "graspseg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "graspseg/annotations.hpp"

namespace graspseg {

namespace {

struct Counts {
  std::size_t pred = 0, gt = 0, inter = 0, uni = 0;
};

Counts count_pixels(const BinaryMask& p, const BinaryMask& g) {
  require_same_shape(p, g, "mask metric");
  Counts c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] != 0, b = g[i] != 0;
    c.pred += a;
    c.gt += b;
    c.inter += a && b;
    c.uni += a || b;
  }
  return c;
}

double ratio_or_one(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct ImageStat {
  std::string image, cls;
  Counts counts;
};

std::vector<ImageStat> image_stats(const MaskSet& preds, const MaskSet& gts,
                                   const ClassOfImage& class_of_image,
                                   std::vector<std::string>& warnings) {
  std::vector<ImageStat> out;
  for (const auto& [id, gt] : gts) {
    auto it = preds.find(id);
    ImageStat s;
    s.image = id;
    auto cit = class_of_image.find(id);
    s.cls = cit == class_of_image.end() ? "all" : cit->second;
    if (it == preds.end()) {
      warnings.push_back("no prediction for image " + id + "; scored as empty");
      s.counts = count_pixels(BinaryMask(gt.height(), gt.width()), gt);
    } else {
      s.counts = count_pixels(it->second, gt);
    }
    out.push_back(s);
  }
  for (const auto& [id, p] : preds)
    if (!gts.count(id)) warnings.push_back("prediction for image " + id + " has no ground truth; ignored");

  std::set<std::string> seen;
  for (const auto& s : out) seen.insert(s.cls);
  std::set<std::string> listed;
  for (const auto& [id, cls] : class_of_image)
    if (!seen.count(cls)) listed.insert(cls);
  for (const auto& cls : listed) warnings.push_back("class " + cls + " has no images; excluded");
  return out;
}

template <typename F>
std::map<std::string, double> class_means(const std::vector<ImageStat>& stats, F per_image) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& s : stats) {
    auto& a = acc[s.cls];
    a.first += per_image(s.counts);
    a.second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [cls, a] : acc) out[cls] = a.first / static_cast<double>(a.second);
  return out;
}

double mean_of(const std::map<std::string, double>& m) {
  if (m.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [k, v] : m) s += v;
  return s / static_cast<double>(m.size());
}

}  // namespace

double iou(const BinaryMask& a, const BinaryMask& b) {
  const Counts c = count_pixels(a, b);
  return ratio_or_one(c.inter, c.uni);
}

MetricReport miou_report(const MaskSet& preds, const MaskSet& gts, const ClassOfImage& class_of_image) {
  MetricReport r;
  const auto stats = image_stats(preds, gts, class_of_image, r.warnings);
  r.class_miou = class_means(stats, [](const Counts& c) { return ratio_or_one(c.inter, c.uni); });
  r.overall_miou = mean_of(r.class_miou);
  return r;
}

PrecisionRecall pixel_precision_recall(const MaskSet& preds, const MaskSet& gts,
                                       const ClassOfImage& class_of_image, PrAggregation aggregation,
                                       MetricReport* per_class) {
  std::vector<std::string> warnings;
  const auto stats = image_stats(preds, gts, class_of_image, warnings);
  auto prec = [](const Counts& c) { return ratio_or_one(c.inter, c.pred); };
  auto rec = [](const Counts& c) { return ratio_or_one(c.inter, c.gt); };

  const auto cp = class_means(stats, prec);
  const auto cr = class_means(stats, rec);
  if (per_class) {
    per_class->class_precision = cp;
    per_class->class_recall = cr;
    per_class->warnings.insert(per_class->warnings.end(), warnings.begin(), warnings.end());
  }

  PrecisionRecall out;
  switch (aggregation) {
    case PrAggregation::ClassMean:
      out.precision = mean_of(cp);
      out.recall = mean_of(cr);
      break;
    case PrAggregation::ImageMean: {
      if (stats.empty()) break;
      for (const auto& s : stats) {
        out.precision += prec(s.counts);
        out.recall += rec(s.counts);
      }
      out.precision /= static_cast<double>(stats.size());
      out.recall /= static_cast<double>(stats.size());
      break;
    }
    case PrAggregation::PixelPool: {
      Counts total;
      for (const auto& s : stats) {
        total.pred += s.counts.pred;
        total.gt += s.counts.gt;
        total.inter += s.counts.inter;
      }
      out.precision = prec(total);
      out.recall = rec(total);
      break;
    }
  }
  if (per_class) {
    per_class->precision = out.precision;
    per_class->recall = out.recall;
  }
  return out;
}

double coco_iou_threshold(int k) { return static_cast<double>(50 + 5 * k) / 100.0; }

namespace {

constexpr int kThresholds = 10;
constexpr int kRecallPoints = 101;
constexpr std::size_t kMaxDets = 100;

struct AreaRange {
  double lo, hi;
};
constexpr AreaRange kAreaRanges[4] = {
    {0.0, 1e10}, {0.0, 32.0 * 32.0}, {32.0 * 32.0, 96.0 * 96.0}, {96.0 * 96.0, 1e10}};

struct Instance {
  BinaryMask mask;
  BoundingBox box;
  double area = 0.0;
  double score = 0.0;
};

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = double(a.width) * a.height + double(b.width) * b.height - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double instance_iou(const Instance& d, const Instance& g, IouType mode) {
  if (mode == IouType::Box) return box_iou(d.box, g.box);
  const Counts c = count_pixels(d.mask, g.mask);
  return c.uni == 0 ? 0.0 : static_cast<double>(c.inter) / static_cast<double>(c.uni);
}

// One (image, class) cell evaluated at one area range.
struct CellResult {
  std::vector<double> scores;
  // matched[t][d]: detection d is a true positive at threshold t
  std::vector<std::vector<char>> matched;
  std::vector<std::vector<char>> ignored;
  std::size_t n_gt = 0;
};

CellResult evaluate_cell(const std::vector<Instance>& dets, const std::vector<Instance>& gts,
                         const std::vector<std::vector<double>>& ious, AreaRange range) {
  CellResult out;
  std::vector<std::size_t> gorder(gts.size());
  std::iota(gorder.begin(), gorder.end(), 0);
  std::vector<char> g_ignore(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g)
    g_ignore[g] = gts[g].area < range.lo || gts[g].area > range.hi;
  std::stable_sort(gorder.begin(), gorder.end(),
                   [&](std::size_t a, std::size_t b) { return g_ignore[a] < g_ignore[b]; });
  for (char ig : g_ignore) out.n_gt += !ig;

  const std::size_t nd = dets.size();
  out.scores.resize(nd);
  for (std::size_t d = 0; d < nd; ++d) out.scores[d] = dets[d].score;
  out.matched.assign(kThresholds, std::vector<char>(nd, 0));
  out.ignored.assign(kThresholds, std::vector<char>(nd, 0));

  for (int t = 0; t < kThresholds; ++t) {
    std::vector<char> g_taken(gts.size(), 0);
    for (std::size_t d = 0; d < nd; ++d) {
      double best = std::min(coco_iou_threshold(t), 1.0 - 1e-10);
      long m = -1;
      for (std::size_t gi : gorder) {
        if (g_taken[gi]) continue;
        if (m >= 0 && !g_ignore[m] && g_ignore[gi]) break;
        if (ious[d][gi] < best) continue;
        best = ious[d][gi];
        m = static_cast<long>(gi);
      }
      if (m >= 0) {
        g_taken[m] = 1;
        out.matched[t][d] = 1;
        out.ignored[t][d] = g_ignore[m];
      } else {
        out.ignored[t][d] = dets[d].area < range.lo || dets[d].area > range.hi;
      }
    }
  }
  return out;
}

// Area under the 101-point interpolated precision/recall curve; -1 if there
// are no non-ignored ground truths.
double interpolated_ap(const std::vector<CellResult>& cells, int t) {
  std::size_t n_gt = 0;
  struct Entry {
    double score;
    bool tp;
  };
  std::vector<Entry> entries;
  for (const auto& c : cells) {
    n_gt += c.n_gt;
    for (std::size_t d = 0; d < c.scores.size(); ++d)
      if (!c.ignored[t][d]) entries.push_back({c.scores[d], c.matched[t][d] != 0});
  }
  if (n_gt == 0) return -1.0;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });

  std::vector<double> recall(entries.size()), precision(entries.size());
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    (entries[i].tp ? tp : fp) += 1;
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (int k = 0; k < kRecallPoints; ++k) {
    const double r = static_cast<double>(k) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

double mean_defined(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (x > -1.0) {
      s += x;
      ++n;
    }
  return n == 0 ? -1.0 : s / static_cast<double>(n);
}

}  // namespace

ApTable coco_ap(std::span<const Detection> dets, std::span<const GroundTruthInstance> gts,
                IouType mode, std::vector<std::string>* warnings) {
  using Key = std::pair<std::int64_t, std::int64_t>;  // (class, image)
  std::map<Key, std::vector<Instance>> dmap, gmap;
  std::set<std::int64_t> classes;
  for (const auto& d : dets) {
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw InvalidArgument("detection score must lie in [0,1]");
    Instance in{d.mask, mask_bbox(d.mask), 0.0, d.score};
    in.area = mode == IouType::Box ? double(in.box.width) * in.box.height
                                   : static_cast<double>(mask_area(d.mask));
    dmap[{d.class_id, d.image_id}].push_back(std::move(in));
    classes.insert(d.class_id);
  }
  for (const auto& g : gts) {
    Instance in{g.mask, mask_bbox(g.mask), static_cast<double>(mask_area(g.mask)), 0.0};
    gmap[{g.class_id, g.image_id}].push_back(std::move(in));
    classes.insert(g.class_id);
  }

  std::set<std::int64_t> classes_with_gt;
  for (const auto& [key, v] : gmap) classes_with_gt.insert(key.first);

  // precision per (area range, threshold, class)
  std::vector<std::vector<std::vector<double>>> table(4, std::vector<std::vector<double>>(kThresholds));
  for (std::int64_t cls : classes) {
    if (!classes_with_gt.count(cls)) {
      if (warnings) warnings->push_back("class " + std::to_string(cls) + " has no ground truth; skipped");
      continue;
    }
    std::set<std::int64_t> images;
    for (const auto& [key, v] : dmap)
      if (key.first == cls) images.insert(key.second);
    for (const auto& [key, v] : gmap)
      if (key.first == cls) images.insert(key.second);

    std::vector<std::vector<CellResult>> cells(4);
    static const std::vector<Instance> kNone;
    for (std::int64_t img : images) {
      auto dit = dmap.find({cls, img});
      auto git = gmap.find({cls, img});
      std::vector<Instance> dv = dit == dmap.end() ? kNone : dit->second;
      const std::vector<Instance>& gv = git == gmap.end() ? kNone : git->second;
      std::stable_sort(dv.begin(), dv.end(),
                       [](const Instance& a, const Instance& b) { return a.score > b.score; });
      if (dv.size() > kMaxDets) dv.resize(kMaxDets);
      std::vector<std::vector<double>> ious(dv.size(), std::vector<double>(gv.size()));
      for (std::size_t d = 0; d < dv.size(); ++d)
        for (std::size_t g = 0; g < gv.size(); ++g) ious[d][g] = instance_iou(dv[d], gv[g], mode);
      for (int a = 0; a < 4; ++a) cells[a].push_back(evaluate_cell(dv, gv, ious, kAreaRanges[a]));
    }
    for (int a = 0; a < 4; ++a)
      for (int t = 0; t < kThresholds; ++t) table[a][t].push_back(interpolated_ap(cells[a], t));
  }

  auto over_thresholds = [&](int a) {
    std::vector<double> all;
    for (int t = 0; t < kThresholds; ++t) all.insert(all.end(), table[a][t].begin(), table[a][t].end());
    return mean_defined(all);
  };
  ApTable out;
  out.ap = over_thresholds(0);
  out.ap50 = mean_defined(table[0][0]);
  out.ap75 = mean_defined(table[0][5]);
  out.ap_small = over_thresholds(1);
  out.ap_medium = over_thresholds(2);
  out.ap_large = over_thresholds(3);
  return out;
}

}  // namespace graspseg
