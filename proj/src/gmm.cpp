#include "collapse/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace collapse {

ComponentBank::ComponentBank(std::vector<Vector> means, Matrix covariance)
    : means_(std::move(means)), covariance_(std::move(covariance)) {
  if (means_.empty()) throw InvalidArgument("component bank needs at least one mean");
  const auto d = covariance_.rows();
  if (d < 1 || covariance_.cols() != d)
    throw InvalidArgument("covariance must be a non-empty square matrix");
  for (const auto& m : means_) {
    if (m.size() != d) throw InvalidArgument("mean dimension does not match covariance");
    if (!m.allFinite()) throw InvalidArgument("mean has non-finite entries");
  }
  if (!covariance_.isApprox(covariance_.transpose(), 1e-12) || !covariance_.allFinite())
    throw InvalidArgument("covariance is not symmetric");
  chol_.compute(covariance_);
  if (chol_.info() != Eigen::Success)
    throw InvalidArgument("covariance is not positive definite");
  const Matrix l = chol_.matrixL();
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(l(i, i) > 0.0)) throw InvalidArgument("covariance is not positive definite");
  for (std::size_t a = 0; a < means_.size(); ++a)
    for (std::size_t b = a + 1; b < means_.size(); ++b)
      if (means_[a] == means_[b])
        throw InvalidArgument("means " + std::to_string(a) + " and " + std::to_string(b) +
                              " coincide");

  const double log_det = 2.0 * l.diagonal().array().log().sum();
  log_norm_const_ =
      -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
}

double ComponentBank::log_density(const Vector& x, std::size_t b) const {
  const Vector z = chol_.matrixL().solve(x - means_.at(b));
  return log_norm_const_ - 0.5 * z.squaredNorm();
}

double ComponentBank::density(const Vector& x, std::size_t b) const {
  return std::exp(log_density(x, b));
}

Vector ComponentBank::sample(std::size_t b, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return means_.at(b) + chol_.matrixL() * z;
}

double ComponentBank::separation() const {
  if (means_.size() < 2) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_, Eigen::EigenvaluesOnly);
  const double spectral = eig.eigenvalues().maxCoeff();
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < means_.size(); ++a)
    for (std::size_t b = a + 1; b < means_.size(); ++b)
      closest = std::min(closest, (means_[a] - means_[b]).norm());
  return closest / std::sqrt(spectral);
}

MixtureWeights::MixtureWeights(std::vector<double> values, double floor)
    : values_(std::move(values)), floor_(floor) {
  if (values_.empty()) throw InvalidArgument("mixture weights must be non-empty");
  if (!(floor_ >= 0.0 && floor_ <= 1.0)) throw InvalidArgument("weight floor must lie in [0,1]");
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw InvalidArgument("mixture weight outside [0,1]");
}

double MixtureWeights::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double log_component_density(const Vector& x, std::size_t b, const ComponentBank& bank) {
  return bank.log_density(x, b);
}

double component_density(const Vector& x, std::size_t b, const ComponentBank& bank) {
  return bank.density(x, b);
}

double log_mixture_density(const Vector& x, const MixtureWeights& weights,
                           const ComponentBank& bank) {
  if (weights.size() != bank.size())
    throw InvalidArgument("weights length does not match component count");
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(bank.size());
  for (std::size_t b = 0; b < bank.size(); ++b) {
    terms[b] = weights[b] > 0.0 ? std::log(weights[b]) + bank.log_density(x, b)
                                : -std::numeric_limits<double>::infinity();
    top = std::max(top, terms[b]);
  }
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

double mixture_density(const Vector& x, const MixtureWeights& weights, const ComponentBank& bank) {
  if (weights.size() != bank.size())
    throw InvalidArgument("weights length does not match component count");
  double acc = 0.0;
  for (std::size_t b = 0; b < bank.size(); ++b) acc += weights[b] * bank.density(x, b);
  return acc;
}

std::vector<Vector> sample(const GmmModel& model, std::size_t count, Rng& rng) {
  if (count == 0) throw InvalidArgument("sample count must be at least 1");
  const auto w = model.weights.values();
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(model.bank->sample(pick(rng), rng));
  return out;
}

MixtureWeights dirichlet(std::size_t components, double concentration, Rng& rng, double floor) {
  if (!(concentration > 0.0)) throw InvalidArgument("Dirichlet concentration must be positive");
  if (components == 0) throw InvalidArgument("Dirichlet needs at least one component");
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> v(components);
  double total = 0.0;
  // A zero total is only possible through underflow at tiny concentrations.
  do {
    total = 0.0;
    for (auto& x : v) total += (x = gamma(rng));
  } while (!(total > 0.0));
  for (auto& x : v) x /= total;
  return MixtureWeights(std::move(v), floor);
}

std::vector<MixtureWeights> init_weights(std::size_t models, std::size_t components,
                                         double concentration, Rng& rng, double floor) {
  if (!(concentration > 0.0)) throw InvalidArgument("Dirichlet concentration must be positive");
  std::vector<MixtureWeights> out;
  out.reserve(models);
  for (std::size_t i = 0; i < models; ++i)
    out.push_back(dirichlet(components, concentration, rng, floor));
  return out;
}

std::vector<Vector> well_separated_means(std::size_t count, double min_gap, Rng& rng) {
  if (count == 0) throw InvalidArgument("need at least one mean");
  if (!(min_gap > 0.0)) throw InvalidArgument("minimum gap must be positive");
  std::uniform_real_distribution<double> gap(min_gap, 1.5 * min_gap);
  std::vector<double> pos(count, 0.0);
  for (std::size_t b = 1; b < count; ++b) pos[b] = pos[b - 1] + gap(rng);
  const double centre = 0.5 * (pos.front() + pos.back());
  std::vector<Vector> out;
  out.reserve(count);
  for (double p : pos) out.push_back(Vector::Constant(1, p - centre));
  return out;
}

}  // namespace collapse
