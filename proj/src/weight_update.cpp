#include "collapse/weight_update.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace collapse {

void UpdateSchedule::validate(std::size_t components) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
  if (!(bias >= 0.0)) throw InvalidArgument("bias must be non-negative");
  if (!(static_cast<double>(components) * bias < 1.0))
    throw InvalidArgument("B * bias must be below 1");
  if (!(floor >= 0.0 && floor <= 1.0)) throw InvalidArgument("floor must lie in [0,1]");
}

UpdateSchedule schedule_from_k(std::size_t k, std::size_t components, double floor) {
  if (k < 2) throw InvalidArgument("retrieval count below 2 puts alpha outside (0,1)");
  if (components == 0) throw InvalidArgument("component count must be positive");
  const double kd = static_cast<double>(k);
  const double bd = static_cast<double>(components);
  UpdateSchedule s;
  s.alpha = 1.0 / kd;
  s.bias = 1.0 / (kd * bd * bd);
  s.floor = floor;
  return s;
}

std::vector<double> ownership(const MixtureWeights& weights, const Vector& u,
                              const ComponentBank& bank) {
  const std::size_t n = bank.size();
  if (weights.size() != n) throw InvalidArgument("weights length does not match component count");
  std::vector<double> o(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < n; ++b) {
    o[b] = weights[b] > 0.0 ? std::log(weights[b]) + bank.log_density(u, b)
                            : -std::numeric_limits<double>::infinity();
    top = std::max(top, o[b]);
  }
  if (!std::isfinite(top)) {
    // Every weight is zero; fall back to the likelihoods alone.
    for (std::size_t b = 0; b < n; ++b) top = std::max(top, o[b] = bank.log_density(u, b));
  }
  double total = 0.0;
  for (auto& v : o) total += (v = std::exp(v - top));
  for (auto& v : o) v /= total;
  return o;
}

std::vector<double> raw_step(std::span<const double> weights, std::span<const double> own,
                             const UpdateSchedule& schedule) {
  const double scale = schedule.alpha / (1.0 - static_cast<double>(weights.size()) * schedule.bias);
  std::vector<double> out(weights.size());
  for (std::size_t b = 0; b < weights.size(); ++b)
    out[b] = (1.0 - schedule.alpha) * weights[b] + scale * (own[b] - schedule.bias);
  return out;
}

std::size_t apply_floor(std::span<double> w, double floor) {
  std::size_t lifted = 0;
  for (std::size_t b = 0; b < w.size(); ++b) {
    if (w[b] > 0.0) continue;
    const double divisor = 1.0 + floor - w[b];
    for (std::size_t other = 0; other < w.size(); ++other)
      if (other != b) w[other] /= divisor;
    w[b] = floor;
    ++lifted;
  }
  return lifted;
}

MixtureWeights apply_point(const MixtureWeights& weights, const Vector& u,
                           const UpdateSchedule& schedule, const ComponentBank& bank,
                           UpdateStats* stats) {
  const auto own = ownership(weights, u, bank);
  auto next = raw_step(weights.values(), own, schedule);
  const std::size_t lifted = apply_floor(next, schedule.floor);
  if (schedule.exact_renormalize) {
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (auto& v : next) v /= total;
  }
  if (stats) stats->floor_events += lifted;
  MixtureWeights out = weights;
  std::copy(next.begin(), next.end(), out.values().begin());
  return out;
}

MixtureWeights update_weights(const MixtureWeights& weights, std::span<const Vector> points,
                              const UpdateSchedule& schedule, const ComponentBank& bank,
                              UpdateStats* stats) {
  if (points.empty()) throw InvalidArgument("update needs at least one point");
  schedule.validate(bank.size());
  MixtureWeights current = weights;
  for (const auto& u : points) current = apply_point(current, u, schedule, bank, stats);
  return current;
}

}  // namespace collapse
