#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace collapse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Thrown when a configuration or input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fixed Gaussian components shared by every model in a network: B means and
/// one covariance matrix. Immutable after construction.
class ComponentBank {
 public:
  /// Rejects empty or ragged means, duplicate means, and a covariance that is
  /// not symmetric positive definite.
  ComponentBank(std::vector<Vector> means, Matrix covariance);

  std::size_t size() const { return means_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(covariance_.rows()); }
  const Vector& mean(std::size_t b) const { return means_.at(b); }
  const std::vector<Vector>& means() const { return means_; }
  const Matrix& covariance() const { return covariance_; }

  double log_density(const Vector& x, std::size_t b) const;
  double density(const Vector& x, std::size_t b) const;

  /// Draw one point from component b.
  Vector sample(std::size_t b, Rng& rng) const;

  /// Smallest pairwise mean distance divided by sqrt of the covariance's
  /// spectral norm. Infinite when B == 1.
  double separation() const;

 private:
  std::vector<Vector> means_;
  Matrix covariance_;
  Eigen::LLT<Matrix> chol_;
  double log_norm_const_ = 0.0;
};

/// Probability vector over the components of a bank, with the positive floor
/// used by the weight update.
class MixtureWeights {
 public:
  static constexpr double kDefaultFloor = 1e-6;

  MixtureWeights() = default;
  explicit MixtureWeights(std::vector<double> values, double floor = kDefaultFloor);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t b) const { return values_[b]; }
  double& operator[](std::size_t b) { return values_[b]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double floor() const { return floor_; }
  double sum() const;

  friend bool operator==(const MixtureWeights&, const MixtureWeights&) = default;

 private:
  std::vector<double> values_;
  double floor_ = kDefaultFloor;
};

struct GmmModel {
  std::shared_ptr<const ComponentBank> bank;
  MixtureWeights weights;
  int model_id = 1;
};

double component_density(const Vector& x, std::size_t b, const ComponentBank& bank);
double log_component_density(const Vector& x, std::size_t b, const ComponentBank& bank);

double log_mixture_density(const Vector& x, const MixtureWeights& weights,
                           const ComponentBank& bank);
double mixture_density(const Vector& x, const MixtureWeights& weights,
                       const ComponentBank& bank);
inline double mixture_density(const Vector& x, const GmmModel& model) {
  return mixture_density(x, model.weights, *model.bank);
}

/// L independent draws: pick a component by weight, then draw from it.
std::vector<Vector> sample(const GmmModel& model, std::size_t count, Rng& rng);

/// Dirichlet(a, ..., a) draw via normalized Gamma(a, 1) variates.
MixtureWeights dirichlet(std::size_t components, double concentration, Rng& rng,
                         double floor = MixtureWeights::kDefaultFloor);

/// n independent Dirichlet draws, one per model, all from the same stream.
std::vector<MixtureWeights> init_weights(std::size_t models, std::size_t components,
                                         double concentration, Rng& rng,
                                         double floor = MixtureWeights::kDefaultFloor);

/// Scalar means whose adjacent gaps are drawn from [min_gap, 1.5 * min_gap],
/// centred on zero.
std::vector<Vector> well_separated_means(std::size_t count, double min_gap, Rng& rng);

}  // namespace collapse
