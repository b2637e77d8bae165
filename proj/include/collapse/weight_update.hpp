#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "collapse/gmm.hpp"

namespace collapse {

/// Step coefficients for one round of recursive weight updates.
///
/// `alpha` is the learning rate, `bias` the constant subtracted from every
/// ownership and `floor` the value a non-positive weight is lifted to. The
/// denominator 1 - B * bias must stay positive, so construction checks it
/// against the component count.
struct UpdateSchedule {
  double alpha = 0.1;
  double bias = 0.0;
  double floor = MixtureWeights::kDefaultFloor;
  /// Divide by the total after the floor step. Off by default; the plain
  /// recursion lets the sum drift above one by at most B * floor * (1 + floor).
  bool exact_renormalize = false;

  void validate(std::size_t components) const;
};

/// alpha = 1/k, bias = 1/(k B^2). Requires k >= 2.
UpdateSchedule schedule_from_k(std::size_t k, std::size_t components,
                               double floor = MixtureWeights::kDefaultFloor);

/// Posterior responsibility of each component for point u, computed with a
/// max-shifted log-sum-exp so points far from every mean stay well defined.
std::vector<double> ownership(const MixtureWeights& weights, const Vector& u,
                              const ComponentBank& bank);

/// Counts how often the positive-floor branch fired.
struct UpdateStats {
  std::size_t floor_events = 0;
};

/// One point of the recursion followed by the floor pass over components in
/// ascending order.
MixtureWeights apply_point(const MixtureWeights& weights, const Vector& u,
                           const UpdateSchedule& schedule, const ComponentBank& bank,
                           UpdateStats* stats = nullptr);

/// Raw recursive step for a known ownership vector, before any flooring.
/// Exposed for invariant tests.
std::vector<double> raw_step(std::span<const double> weights, std::span<const double> ownership,
                             const UpdateSchedule& schedule);

/// Floor pass on a raw vector: each entry <= 0, in index order, rescales the
/// others by 1/(1 + floor - entry) and is then set to floor. Returns the
/// number of entries lifted.
std::size_t apply_floor(std::span<double> weights, double floor);

/// Sequential fold of apply_point over `points` in order. Ownership is
/// recomputed from the in-progress weights at every point.
MixtureWeights update_weights(const MixtureWeights& weights, std::span<const Vector> points,
                              const UpdateSchedule& schedule, const ComponentBank& bank,
                              UpdateStats* stats = nullptr);

}  // namespace collapse
