#include "graspseg/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

namespace graspseg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

Eigen::Matrix3d finish_covariance(Eigen::Matrix3d cov, double epsilon, CovarianceType type) {
  cov = 0.5 * (cov + cov.transpose());
  if (type == CovarianceType::Diagonal) cov = Eigen::Matrix3d(cov.diagonal().asDiagonal());
  cov.diagonal().array() += epsilon;
  return cov;
}

// Weighted ML estimate of one component. `weights` may be null for unit weights.
GaussianComponent estimate(std::span<const Color3> samples, const double* weights,
                           std::size_t stride, double epsilon, CovarianceType type,
                           double& mass_out) {
  double mass = 0.0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = weights ? weights[i * stride] : 1.0;
    mass += w;
    sum += w * samples[i];
  }
  GaussianComponent c;
  mass_out = mass;
  if (mass <= 0.0) return c;
  c.mean = sum / mass;
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = weights ? weights[i * stride] : 1.0;
    const Eigen::Vector3d d = samples[i] - c.mean;
    scatter.noalias() += w * d * d.transpose();
  }
  c.covariance = finish_covariance(scatter / mass, epsilon, type);
  return c;
}

}  // namespace

GmmModel::GmmModel(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("GMM needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
      throw InvalidArgument("GMM weights must be finite and non-negative");
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InvalidArgument("GMM weights must sum to 1");

  inverse_.reserve(components_.size());
  log_norm_.reserve(components_.size());
  for (const auto& c : components_) {
    if (!c.covariance.isApprox(c.covariance.transpose(), 1e-12))
      throw InvalidArgument("GMM covariance must be symmetric");
    Eigen::LLT<Eigen::Matrix3d> llt(c.covariance);
    if (llt.info() != Eigen::Success) throw InvalidArgument("GMM covariance must be SPD");
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    inverse_.push_back(llt.solve(Eigen::Matrix3d::Identity()));
    log_norm_.push_back(-0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + log_det));
  }
}

double GmmModel::component_log_density(std::size_t k, const Color3& x) const {
  const Eigen::Vector3d d = x - components_[k].mean;
  return log_norm_[k] - 0.5 * d.dot(inverse_[k] * d);
}

double GmmModel::log_pdf(const Color3& x) const {
  double terms[64];
  std::vector<double> heap;
  double* t = terms;
  if (components_.size() > 64) {
    heap.resize(components_.size());
    t = heap.data();
  }
  for (std::size_t k = 0; k < components_.size(); ++k)
    t[k] = components_[k].weight > 0.0
               ? std::log(components_[k].weight) + component_log_density(k, x)
               : kNegInf;
  return log_sum_exp({t, components_.size()});
}

double GmmModel::pdf(const Color3& x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k)
    if (components_[k].weight > 0.0)
      s += components_[k].weight * std::exp(component_log_density(k, x));
  return s;
}

double pdf(const GmmModel& model, const Color3& x) { return model.pdf(x); }

std::size_t component_loglik_assign(const GmmModel& model, const Color3& x) {
  std::size_t best = 0;
  double best_score = kNegInf;
  bool found = false;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const double w = model.components()[k].weight;
    if (w <= 0.0) continue;
    const double score = std::log(w) + model.component_log_density(k, x);
    if (!found || score > best_score) {
      best = k;
      best_score = score;
      found = true;
    }
  }
  return best;
}

double total_log_likelihood(const GmmModel& model, std::span<const Color3> samples) {
  double s = 0.0;
  for (const auto& x : samples) s += model.log_pdf(x);
  return s;
}

std::vector<int> kmeans_assign(std::span<const Color3> samples, int k, std::uint64_t seed,
                               int lloyd_iters) {
  if (k < 1) throw InvalidArgument("kmeans needs k >= 1");
  if (samples.size() < static_cast<std::size_t>(k))
    throw InvalidArgument("kmeans needs at least k samples");
  const std::size_t n = samples.size();
  std::mt19937_64 rng(seed);

  std::vector<Eigen::Vector3d> centres;
  centres.reserve(static_cast<std::size_t>(k));
  centres.push_back(samples[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centres.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (samples[i] - centres.back()).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick + 1 < n; ++pick) {
        u -= d2[pick];
        if (u < 0.0) break;
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    centres.push_back(samples[pick]);
  }

  std::vector<int> assign(n, -1);
  for (int it = 0; it <= lloyd_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (samples[i] - centres[0]).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (samples[i] - centres[static_cast<std::size_t>(c)]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed = changed || assign[i] != best;
      assign[i] = best;
    }
    if (!changed || it == lloyd_iters) break;
    std::vector<Eigen::Vector3d> sums(static_cast<std::size_t>(k), Eigen::Vector3d::Zero());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(assign[i])] += samples[i];
      ++counts[static_cast<std::size_t>(assign[i])];
    }
    for (std::size_t c = 0; c < centres.size(); ++c)
      if (counts[c] > 0) centres[c] = sums[c] / static_cast<double>(counts[c]);
  }
  return assign;
}

GmmModel fit_from_assignment(std::span<const Color3> samples, std::span<const int> assignment,
                             int n_components, double epsilon, CovarianceType covariance) {
  if (samples.size() != assignment.size())
    throw DimensionMismatch("fit_from_assignment: sample/assignment length mismatch");
  if (samples.empty()) throw InvalidArgument("fit_from_assignment: no samples");
  const auto k = static_cast<std::size_t>(n_components);
  std::vector<double> counts(k, 0.0);
  std::vector<Eigen::Vector3d> sums(k, Eigen::Vector3d::Zero());
  std::vector<Eigen::Matrix3d> prods(k, Eigen::Matrix3d::Zero());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    if (c >= k) throw InvalidArgument("fit_from_assignment: component index out of range");
    counts[c] += 1.0;
    sums[c] += samples[i];
  }
  std::vector<Eigen::Vector3d> means(k, Eigen::Vector3d::Zero());
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > 0.0) means[c] = sums[c] / counts[c];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    const Eigen::Vector3d d = samples[i] - means[c];
    prods[c].noalias() += d * d.transpose();
  }
  std::vector<GaussianComponent> comps(k);
  const double n = static_cast<double>(samples.size());
  for (std::size_t c = 0; c < k; ++c) {
    comps[c].weight = counts[c] / n;
    if (counts[c] > 0.0) {
      comps[c].mean = means[c];
      comps[c].covariance = finish_covariance(prods[c] / counts[c], epsilon, covariance);
    } else {
      comps[c].covariance = Eigen::Matrix3d::Identity();
    }
  }
  return GmmModel(std::move(comps));
}

EmResult fit_em(std::span<const Color3> samples, const EmOptions& options) {
  if (samples.empty()) throw InvalidArgument("fit_em: no samples");
  if (options.n_components < 1) throw InvalidArgument("fit_em: n_components must be >= 1");
  if (samples.size() < static_cast<std::size_t>(options.n_components))
    throw InvalidArgument("fit_em: fewer samples than components");
  if (!(options.epsilon > 0.0)) throw InvalidArgument("fit_em: epsilon must be > 0");

  const std::size_t n = samples.size();
  const auto k = static_cast<std::size_t>(options.n_components);

  const auto init = kmeans_assign(samples, options.n_components, options.seed);
  EmResult result;
  result.model =
      fit_from_assignment(samples, init, options.n_components, options.epsilon, options.covariance);

  // Responsibilities, row-major n x k.
  std::vector<double> resp(n * k);
  std::vector<double> logp(k);
  double prev = kNegInf;
  GmmModel previous;

  for (int iter = 0;; ++iter) {
    // E-step; also yields the log-likelihood of the current model.
    double ll = 0.0;
    std::size_t worst = 0;
    double worst_ll = std::numeric_limits<double>::infinity();
    const auto& comps = result.model.components();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c)
        logp[c] = comps[c].weight > 0.0
                      ? std::log(comps[c].weight) + result.model.component_log_density(c, samples[i])
                      : kNegInf;
      const double lse = log_sum_exp(logp);
      ll += lse;
      if (lse < worst_ll) {
        worst_ll = lse;
        worst = i;
      }
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(logp[c] - lse);
    }
    // The regularized M-step is not an exact maximizer; never accept a step
    // that loses likelihood.
    if (iter > 0 && ll < prev) {
      result.model = std::move(previous);
      result.iterations = iter - 1;
      break;
    }
    result.log_likelihood.push_back(ll);
    if (iter > 0 && (ll - prev) / static_cast<double>(n) < options.tol) break;
    if (iter >= options.max_iters) break;
    prev = ll;

    // M-step.
    std::vector<GaussianComponent> next(k);
    double total_mass = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double mass = 0.0;
      next[c] = estimate(samples, resp.data() + c, k, options.epsilon, options.covariance, mass);
      next[c].weight = mass;
      total_mass += mass;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (next[c].weight > 1e-12 * total_mass) continue;
      // Empty component: restart it on the worst-explained sample.
      double unused = 0.0;
      const GaussianComponent overall =
          estimate(samples, nullptr, 0, options.epsilon, options.covariance, unused);
      next[c].mean = samples[worst];
      next[c].covariance = overall.covariance;
      next[c].weight = total_mass / static_cast<double>(n);
    }
    double wsum = 0.0;
    for (const auto& c : next) wsum += c.weight;
    for (auto& c : next) c.weight /= wsum;
    previous = std::move(result.model);
    result.model = GmmModel(std::move(next));
    result.iterations = iter + 1;
  }
  return result;
}

}  // namespace graspseg
