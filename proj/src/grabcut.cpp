#include "graspseg/grabcut.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace graspseg {

namespace {

double color_dist2(const Rgb& a, const Rgb& b) {
  const double dr = double(a.r) - double(b.r);
  const double dg = double(a.g) - double(b.g);
  const double db = double(a.b) - double(b.b);
  return dr * dr + dg * dg + db * db;
}

// Fits a class model from its pixels using the previous component assignment.
GmmModel refit(std::span<const Color3> samples, std::span<const int> comps, int k, double eps) {
  return fit_from_assignment(samples, comps, k, eps, CovarianceType::Full);
}

GmmModel initial_model(std::span<const Color3> samples, int k, std::uint64_t seed, double eps) {
  const int k_eff = std::min<int>(k, static_cast<int>(samples.size()));
  const auto assign = kmeans_assign(samples, k_eff, seed);
  return fit_from_assignment(samples, assign, k, eps, CovarianceType::Full);
}

}  // namespace

void GrabCutParams::validate() const {
  if (iterations < 1) throw InvalidArgument("grabcut iterations must be >= 1");
  if (!(gamma >= 0.0)) throw InvalidArgument("grabcut gamma must be >= 0");
  if (n_components < 1) throw InvalidArgument("grabcut needs at least one GMM component");
  if (beta && !(*beta >= 0.0)) throw InvalidArgument("grabcut beta must be >= 0");
}

double beta_from_image(const RgbImage& rgb) {
  if (rgb.size() < 2) throw InvalidArgument("beta_from_image: need at least two pixels");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (int r = 0; r < rgb.height(); ++r) {
    for (int c = 0; c < rgb.width(); ++c) {
      for (const auto& off : PairwiseWeights::kOffsets) {
        const int rr = r + off[0], cc = c + off[1];
        if (!rgb.contains(rr, cc)) continue;
        sum += color_dist2(rgb(r, c), rgb(rr, cc));
        ++pairs;
      }
    }
  }
  if (pairs == 0 || sum <= 0.0) return 0.0;
  return 1.0 / (2.0 * sum / static_cast<double>(pairs));
}

PairwiseWeights::PairwiseWeights(const RgbImage& rgb, double gamma, double beta)
    : h_(rgb.height()), w_cols_(rgb.width()), w_(rgb.size() * 4, 0.0) {
  for (int r = 0; r < h_; ++r) {
    for (int c = 0; c < w_cols_; ++c) {
      const std::size_t i = rgb.index(r, c);
      for (int d = 0; d < 4; ++d) {
        const int rr = r + kOffsets[d][0], cc = c + kOffsets[d][1];
        if (!rgb.contains(rr, cc)) continue;
        const double dist = (kOffsets[d][0] != 0 && kOffsets[d][1] != 0) ? std::numbers::sqrt2 : 1.0;
        w_[i * 4 + static_cast<std::size_t>(d)] =
            gamma * std::exp(-beta * color_dist2(rgb(r, c), rgb(rr, cc))) / dist;
      }
    }
  }
}

namespace {

double energy_from_unaries(const std::vector<double>& cost_fg, const std::vector<double>& cost_bg,
                           const std::vector<std::uint8_t>& fg, const PairwiseWeights& pw) {
  const int h = pw.height(), w = pw.width();
  double e = 0.0;
  for (std::size_t i = 0; i < fg.size(); ++i) e += fg[i] ? cost_fg[i] : cost_bg[i];
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                            static_cast<std::size_t>(c);
      for (int d = 0; d < 4; ++d) {
        const int rr = r + PairwiseWeights::kOffsets[d][0], cc = c + PairwiseWeights::kOffsets[d][1];
        if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
        const std::size_t j = static_cast<std::size_t>(rr) * static_cast<std::size_t>(w) +
                              static_cast<std::size_t>(cc);
        if (fg[i] != fg[j]) e += pw.weight(i, d);
      }
    }
  }
  return e;
}

}  // namespace

double grabcut_energy(const RgbImage& rgb, const std::vector<std::uint8_t>& foreground,
                      const GmmModel& fg_model, const GmmModel& bg_model,
                      const PairwiseWeights& pairwise) {
  if (foreground.size() != rgb.size())
    throw DimensionMismatch("grabcut_energy: labeling size mismatch");
  std::vector<double> cost_fg(rgb.size()), cost_bg(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    const Color3 z = to_color3(rgb[i]);
    cost_fg[i] = -fg_model.log_pdf(z);
    cost_bg[i] = -bg_model.log_pdf(z);
  }
  return energy_from_unaries(cost_fg, cost_bg, foreground, pairwise);
}

Trimap grabcut_refine(const RgbImage& rgb, const Trimap& trimap, const GrabCutParams& params,
                      std::uint64_t seed, GrabCutTrace* trace) {
  params.validate();
  require_same_shape(rgb, trimap, "grabcut_refine");

  Trimap labels = trimap;
  const std::size_t n = rgb.size();
  std::size_t fg_count = 0;
  for (std::size_t i = 0; i < n; ++i) fg_count += labels.is_foreground(i) ? 1 : 0;
  if (fg_count == 0 || fg_count == n)
    throw DegenerateTrimap("trimap needs both foreground {2,3} and background {0,1} pixels");

  const int h = rgb.height(), w = rgb.width();
  const double beta = params.beta ? *params.beta : beta_from_image(rgb);
  const PairwiseWeights pairwise(rgb, params.gamma, beta);

  std::vector<Color3> colors(n);
  for (std::size_t i = 0; i < n; ++i) colors[i] = to_color3(rgb[i]);

  // Colours repeat heavily, so the models are evaluated once per distinct colour.
  std::vector<std::uint32_t> keys(n);
  for (std::size_t i = 0; i < n; ++i)
    keys[i] = (std::uint32_t(rgb[i].r) << 16) | (std::uint32_t(rgb[i].g) << 8) | rgb[i].b;
  std::vector<std::uint32_t> palette = keys;
  std::sort(palette.begin(), palette.end());
  palette.erase(std::unique(palette.begin(), palette.end()), palette.end());
  std::vector<std::uint32_t> color_id(n);
  for (std::size_t i = 0; i < n; ++i)
    color_id[i] = static_cast<std::uint32_t>(std::lower_bound(palette.begin(), palette.end(), keys[i]) -
                                             palette.begin());
  std::vector<Color3> palette_colors(palette.size());
  for (std::size_t u = 0; u < palette.size(); ++u)
    palette_colors[u] = Color3(double(palette[u] >> 16), double((palette[u] >> 8) & 0xff),
                               double(palette[u] & 0xff));

  std::vector<std::size_t> fg_idx, bg_idx;
  std::vector<Color3> fg_samples, bg_samples;
  auto split = [&]() {
    fg_idx.clear();
    bg_idx.clear();
    fg_samples.clear();
    bg_samples.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const bool f = labels.is_foreground(i);
      (f ? fg_idx : bg_idx).push_back(i);
      (f ? fg_samples : bg_samples).push_back(colors[i]);
    }
  };
  split();
  GmmModel fg_model = initial_model(fg_samples, params.n_components, seed, params.epsilon);
  GmmModel bg_model =
      initial_model(bg_samples, params.n_components, seed ^ 0x9e3779b97f4a7c15ULL, params.epsilon);

  // Map from pixel index to graph node for the soft pixels.
  std::vector<int> node_of(n, -1);
  std::vector<std::size_t> soft;
  for (std::size_t i = 0; i < n; ++i)
    if (!labels.is_hard(i)) {
      node_of[i] = static_cast<int>(soft.size());
      soft.push_back(i);
    }

  std::vector<double> cost_fg(n), cost_bg(n);
  std::vector<std::uint8_t> fg_flags(n);
  std::vector<int> comps;
  std::vector<int> palette_fg_comp(palette.size()), palette_bg_comp(palette.size());
  std::vector<double> palette_cost_fg(palette.size()), palette_cost_bg(palette.size());

  for (int iter = 0; iter < params.iterations; ++iter) {
    // (a) classes from the current labels, (b) component assignment, (c) refit.
    if (iter > 0) split();
    // A class emptied by the previous cut has no colour model to refit.
    if (fg_samples.empty() || bg_samples.empty()) break;
    for (std::size_t u = 0; u < palette.size(); ++u) {
      palette_fg_comp[u] = static_cast<int>(component_loglik_assign(fg_model, palette_colors[u]));
      palette_bg_comp[u] = static_cast<int>(component_loglik_assign(bg_model, palette_colors[u]));
    }
    comps.resize(fg_samples.size());
    for (std::size_t s = 0; s < fg_samples.size(); ++s) comps[s] = palette_fg_comp[color_id[fg_idx[s]]];
    fg_model = refit(fg_samples, comps, params.n_components, params.epsilon);
    comps.resize(bg_samples.size());
    for (std::size_t s = 0; s < bg_samples.size(); ++s) comps[s] = palette_bg_comp[color_id[bg_idx[s]]];
    bg_model = refit(bg_samples, comps, params.n_components, params.epsilon);

    for (std::size_t u = 0; u < palette.size(); ++u) {
      palette_cost_fg[u] = -fg_model.log_pdf(palette_colors[u]);
      palette_cost_bg[u] = -bg_model.log_pdf(palette_colors[u]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      cost_fg[i] = palette_cost_fg[color_id[i]];
      cost_bg[i] = palette_cost_bg[color_id[i]];
      fg_flags[i] = labels.is_foreground(i) ? 1 : 0;
    }
    if (trace) trace->energy_before_cut.push_back(energy_from_unaries(cost_fg, cost_bg, fg_flags, pairwise));

    // (d) graph over soft pixels; source = background, sink = foreground.
    CutGraph graph(static_cast<int>(soft.size()));
    for (std::size_t s = 0; s < soft.size(); ++s) {
      const std::size_t i = soft[s];
      const int r = static_cast<int>(i / static_cast<std::size_t>(w));
      const int c = static_cast<int>(i % static_cast<std::size_t>(w));
      double to_fg = cost_fg[i];  // paid when the pixel lands on the sink side
      double to_bg = cost_bg[i];
      for (int d = 0; d < 4; ++d) {
        const int rr = r + PairwiseWeights::kOffsets[d][0];
        const int cc = c + PairwiseWeights::kOffsets[d][1];
        if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
        const std::size_t j = labels.index(rr, cc);
        const double wt = pairwise.weight(i, d);
        if (node_of[j] >= 0) {
          graph.add_edge(static_cast<int>(s), node_of[j], wt, wt);
        } else if (labels[j] == Trimap::kForeground) {
          to_bg += wt;
        } else {
          to_fg += wt;
        }
      }
      // Backward neighbours that are hard constraints.
      for (int d = 0; d < 4; ++d) {
        const int rr = r - PairwiseWeights::kOffsets[d][0];
        const int cc = c - PairwiseWeights::kOffsets[d][1];
        if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
        const std::size_t j = labels.index(rr, cc);
        if (node_of[j] >= 0) continue;
        const double wt = pairwise.weight(j, d);
        if (labels[j] == Trimap::kForeground) to_bg += wt;
        else to_fg += wt;
      }
      const double shift = std::min(to_fg, to_bg);
      graph.add_terminal_weights(static_cast<int>(s), to_fg - shift, to_bg - shift);
    }

    // (e) cut, (f) relabel.
    const MinCutResult cut = min_cut(graph);
    for (std::size_t s = 0; s < soft.size(); ++s)
      labels[soft[s]] = cut.sides[s] == CutSide::Sink ? Trimap::kProbForeground
                                                      : Trimap::kProbBackground;

    if (trace) {
      for (std::size_t i = 0; i < n; ++i) fg_flags[i] = labels.is_foreground(i) ? 1 : 0;
      trace->energy_after_cut.push_back(energy_from_unaries(cost_fg, cost_bg, fg_flags, pairwise));
    }
  }
  return labels;
}

}  // namespace graspseg
