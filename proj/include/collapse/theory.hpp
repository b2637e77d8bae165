#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "collapse/network_sim.hpp"

namespace collapse {

/// Raised when a config lies outside the regime where the contraction
/// prediction applies.
class PreconditionRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMinSeparation = 6.0;
inline constexpr std::size_t kMinReplicates = 30;

/// (1 - 1/k)^k, the expected contraction of a weight gap over one round of
/// k updates with alpha = 1/k. Returns 1 for k < 2 (no update happens).
double step_factor(std::size_t k);

/// Running products P_0 = 1, P_{t+1} = P_t * step_factor(k_t). The result has
/// one more entry than the schedule.
std::vector<double> predicted_multiplier(std::span<const std::size_t> k_schedule);

/// initial_gap * P_t.
double predicted_gap(double initial_gap, std::span<const std::size_t> k_schedule, std::size_t t);

/// Average weight over all models and all times in `history`, where
/// history[t][i] is model i's weights at time t. Throws when history is
/// empty.
std::vector<double> mean_field_weight(const std::vector<std::vector<MixtureWeights>>& history);

struct ContractionCheckpoint {
  std::size_t t = 0;
  double empirical = 0.0;
  double predicted = 0.0;
  double standard_error = 0.0;
  bool passed = false;
};

struct ContractionReport {
  std::size_t replicates = 0;
  double tolerance = 0.0;
  double separation = 0.0;
  std::vector<std::size_t> k_schedule;
  std::vector<ContractionCheckpoint> checkpoints;
  std::size_t floor_events = 0;
  /// Mean of squared terminal norms and square of the mean terminal norm.
  double mean_squared_norm = 0.0;
  double squared_mean_norm = 0.0;
  bool jensen_holds = false;
  bool passed = false;

  void write_table(std::ostream& out) const;
};

/// Default checkpoints 1, 2, 5, 10, 20.
std::vector<std::size_t> default_checkpoints();

/// Runs `replicates` simulations of `config` (seeds config.seed + r, steps
/// truncated to the last checkpoint) and compares the sign-oriented gap in
/// component 1 between models 1 and 2 with the predicted gap. A checkpoint
/// passes when |empirical - predicted| <= tolerance + 3 SE.
///
/// Throws PreconditionRefused when the bank separation is below
/// kMinSeparation, InvalidArgument when replicates < kMinReplicates.
ContractionReport verify_contraction(const SimConfig& config, std::size_t replicates,
                                     double tolerance,
                                     std::vector<std::size_t> checkpoints = default_checkpoints(),
                                     std::size_t jobs = 1);

}  // namespace collapse
