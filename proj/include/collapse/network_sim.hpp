#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "collapse/gmm.hpp"
#include "collapse/metrics.hpp"
#include "collapse/sample_pool.hpp"
#include "collapse/weight_update.hpp"

namespace collapse {

inline constexpr const char* kReciprocalK = "reciprocal-k";

struct SimConfig {
  std::size_t models = 3;
  std::vector<Vector> means;
  Matrix covariance;
  double concentration = 1.0;
  std::size_t points_per_step = 3;
  double beta = 0.5;
  std::size_t steps = 200;
  double floor = MixtureWeights::kDefaultFloor;
  std::string schedule_rule = kReciprocalK;
  std::uint64_t seed = 0;
  std::vector<Vector> initial_pool;
  bool exact_renormalize = false;

  /// Throws InvalidArgument describing the first violated constraint.
  void validate() const;
  std::size_t components() const { return means.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(covariance.rows()); }
};

/// n = 3, B = 2, means -5 and 5, unit variance, a = 1, beta = 0.5, L = 3,
/// T = 200.
SimConfig reference_config();

struct StepRecord {
  std::size_t t = 0;
  std::vector<MixtureWeights> weights;
  DistanceMatrix distances;
  double frobenius_norm = 0.0;
  std::size_t pool_size = 0;
  /// Empty while the pool itself is empty.
  std::optional<double> synthetic_fraction;
  std::size_t retrieval_count = 0;
  std::size_t floor_events = 0;
};

struct Trajectory {
  SimConfig config;
  std::vector<StepRecord> records;

  std::vector<double> norms() const;
  std::vector<std::size_t> retrieval_counts() const;
};

struct NetworkState {
  std::shared_ptr<const ComponentBank> bank;
  std::vector<GmmModel> models;
  SamplePool pool;
  std::size_t t = 0;
};

/// Independent, reproducible random stream for (seed, model, t). Model 0 is
/// reserved for network-wide draws such as initial weights.
Rng substream(std::uint64_t seed, std::uint64_t model_id, std::uint64_t t);

/// Bank, initial Dirichlet weights and seed pool for a validated config.
NetworkState initial_state(const SimConfig& config);

/// Snapshot of the current weights as a record (no update performed).
StepRecord snapshot(const NetworkState& state, const SimConfig& config);

/// One timestep, in order: record distances from the current weights; every
/// model generates L points from its current mixture; every model draws
/// k = floor(beta |A|) points from the pool as it stood before this step and,
/// when k >= 2, runs the recursive update; then all new points are posted.
StepRecord step(NetworkState& state, const SimConfig& config);

/// T steps plus a terminal record, T + 1 records in total. When final_state
/// is given it receives the state after the last step.
Trajectory run(const SimConfig& config, NetworkState* final_state = nullptr);

/// One run per seed, results in seed order. jobs > 1 runs replicates on a
/// thread pool; output does not depend on jobs. Duplicate seeds produce a
/// warning on stderr.
std::vector<Trajectory> run_replicates(const SimConfig& config,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t jobs = 1);

}  // namespace collapse
