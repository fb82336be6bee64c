#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "graspseg/core.hpp"
#include "graspseg/gmm.hpp"
#include "graspseg/maxflow.hpp"

namespace graspseg {

class DegenerateTrimap : public Error {
 public:
  using Error::Error;
};

struct GrabCutParams {
  int iterations = 8;
  double gamma = 50.0;
  int n_components = 5;
  /// Contrast term; computed from the image when unset.
  std::optional<double> beta;
  double epsilon = 1e-3;

  void validate() const;
};

/// Energies recorded around every min-cut step.
struct GrabCutTrace {
  std::vector<double> energy_before_cut;
  std::vector<double> energy_after_cut;
};

/// 1 / (2 <|z_m - z_n|^2>) over all 8-neighbour pairs; 0 for a constant image.
double beta_from_image(const RgbImage& rgb);

/// Pairwise smoothness weights gamma * exp(-beta |dz|^2) / dist for each pixel
/// and its four forward neighbours (right, down, down-right, down-left).
class PairwiseWeights {
 public:
  static constexpr int kOffsets[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};

  PairwiseWeights(const RgbImage& rgb, double gamma, double beta);

  /// Weight of the pair (pixel i, its neighbour in direction d); 0 when the
  /// neighbour is outside the image.
  double weight(std::size_t i, int d) const { return w_[i * 4 + static_cast<std::size_t>(d)]; }
  int height() const { return h_; }
  int width() const { return w_cols_; }

 private:
  int h_, w_cols_;
  std::vector<double> w_;
};

/// GrabCut energy of a foreground labeling under fixed colour models:
/// sum of -log p(z | class) plus pairwise weights across label changes.
double grabcut_energy(const RgbImage& rgb, const std::vector<std::uint8_t>& foreground,
                      const GmmModel& fg_model, const GmmModel& bg_model,
                      const PairwiseWeights& pairwise);

/// Iterated graph-cut refinement. Values 0 and 3 are hard constraints; values
/// 1 and 2 are relabeled every iteration. One iteration is a full cycle of
/// component assignment, model refit, graph construction and min-cut.
Trimap grabcut_refine(const RgbImage& rgb, const Trimap& trimap, const GrabCutParams& params,
                      std::uint64_t seed, GrabCutTrace* trace = nullptr);

}  // namespace graspseg
