#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "graspseg/core.hpp"

namespace graspseg {

using Color3 = Eigen::Vector3d;

struct GaussianComponent {
  double weight = 0.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
};

enum class CovarianceType { Full, Diagonal };

/// Weighted mixture of 3D Gaussians. Weights sum to one; covariances must be
/// symmetric positive definite. Inverses and normalizers are cached at
/// construction, so a model is immutable once built.
class GmmModel {
 public:
  GmmModel() = default;
  explicit GmmModel(std::vector<GaussianComponent> components);

  const std::vector<GaussianComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  /// log N(x; mu_k, Sigma_k), without the mixture weight.
  double component_log_density(std::size_t k, const Color3& x) const;
  double log_pdf(const Color3& x) const;
  double pdf(const Color3& x) const;

 private:
  std::vector<GaussianComponent> components_;
  std::vector<Eigen::Matrix3d> inverse_;
  std::vector<double> log_norm_;
};

struct EmOptions {
  int n_components = 1;
  int max_iters = 100;
  /// Stop once the mean per-sample log-likelihood improves by less than this.
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Added to every covariance diagonal, in 0-255 color units.
  double epsilon = 1e-3;
  CovarianceType covariance = CovarianceType::Full;
};

struct EmResult {
  GmmModel model;
  /// Total data log-likelihood of the initial model and after each M-step.
  std::vector<double> log_likelihood;
  int iterations = 0;
};

EmResult fit_em(std::span<const Color3> samples, const EmOptions& options);

double pdf(const GmmModel& model, const Color3& x);

/// Index of the component with the largest weighted density; ties go to the
/// lowest index. Components with zero weight are never chosen.
std::size_t component_loglik_assign(const GmmModel& model, const Color3& x);

double total_log_likelihood(const GmmModel& model, std::span<const Color3> samples);

/// Seeded k-means++ centres followed by Lloyd refinement; returns a component
/// index per sample.
std::vector<int> kmeans_assign(std::span<const Color3> samples, int k, std::uint64_t seed,
                               int lloyd_iters = 10);

/// Maximum-likelihood mixture from a hard assignment. Components with no
/// samples get weight 0.
GmmModel fit_from_assignment(std::span<const Color3> samples, std::span<const int> assignment,
                             int n_components, double epsilon = 1e-3,
                             CovarianceType covariance = CovarianceType::Full);

inline Color3 to_color3(const Rgb& c) { return {double(c.r), double(c.g), double(c.b)}; }

}  // namespace graspseg
