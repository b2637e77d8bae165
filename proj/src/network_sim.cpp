#include "collapse/network_sim.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace collapse {

void SimConfig::validate() const {
  if (models < 2) throw InvalidArgument("need at least two models");
  if (steps < 1) throw InvalidArgument("need at least one step");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in (0,1]");
  if (points_per_step < 1) throw InvalidArgument("points per step must be at least 1");
  if (!(concentration > 0.0)) throw InvalidArgument("Dirichlet concentration must be positive");
  if (!(floor >= 0.0 && floor <= 1.0)) throw InvalidArgument("floor must lie in [0,1]");
  if (schedule_rule != kReciprocalK)
    throw InvalidArgument("unknown schedule rule '" + schedule_rule + "'");
  // Constructing the bank checks means and covariance.
  ComponentBank bank(means, covariance);
  for (const auto& p : initial_pool)
    if (static_cast<std::size_t>(p.size()) != bank.dim())
      throw InvalidArgument("initial pool point has wrong dimension");
}

SimConfig reference_config() {
  SimConfig c;
  c.models = 3;
  c.means = {Vector::Constant(1, -5.0), Vector::Constant(1, 5.0)};
  c.covariance = Matrix::Identity(1, 1);
  c.concentration = 1.0;
  c.points_per_step = 3;
  c.beta = 0.5;
  c.steps = 200;
  return c;
}

std::vector<double> Trajectory::norms() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.frobenius_norm);
  return out;
}

std::vector<std::size_t> Trajectory::retrieval_counts() const {
  std::vector<std::size_t> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.retrieval_count);
  return out;
}

Rng substream(std::uint64_t seed, std::uint64_t model_id, std::uint64_t t) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(model_id), static_cast<std::uint32_t>(model_id >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
  return Rng(seq);
}

namespace {
// Time slot for the network-wide initialization stream.
constexpr std::uint64_t kInitSlot = ~std::uint64_t{0};
}  // namespace

NetworkState initial_state(const SimConfig& config) {
  config.validate();
  NetworkState state;
  state.bank = std::make_shared<const ComponentBank>(config.means, config.covariance);
  Rng rng = substream(config.seed, 0, kInitSlot);
  auto weights = init_weights(config.models, config.components(), config.concentration, rng,
                              config.floor);
  for (std::size_t i = 0; i < config.models; ++i)
    state.models.push_back({state.bank, std::move(weights[i]), static_cast<int>(i + 1)});
  state.pool = SamplePool(config.initial_pool);
  return state;
}

StepRecord snapshot(const NetworkState& state, const SimConfig& config) {
  StepRecord r;
  r.t = state.t;
  for (const auto& m : state.models) r.weights.push_back(m.weights);
  r.distances = distance_matrix(std::span<const MixtureWeights>(r.weights));
  r.frobenius_norm = frobenius_norm(r.distances);
  r.pool_size = state.pool.size();
  if (!state.pool.empty()) r.synthetic_fraction = state.pool.synthetic_fraction();
  r.retrieval_count = retrieval_count(state.pool.size(), config.beta);

  const double top = r.distances.max_entry();
  const double n = static_cast<double>(r.distances.size());
  if (!(r.frobenius_norm >= top * (1.0 - 1e-12) && r.frobenius_norm <= n * top * (1.0 + 1e-12)))
    throw std::logic_error("Frobenius norm outside [max entry, n * max entry]");
  return r;
}

StepRecord step(NetworkState& state, const SimConfig& config) {
  StepRecord record = snapshot(state, config);
  const std::size_t k = record.retrieval_count;
  const std::size_t n = state.models.size();

  std::vector<std::vector<Vector>> generated(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& model = state.models[i];
    Rng rng = substream(config.seed, static_cast<std::uint64_t>(model.model_id), state.t);
    generated[i] = sample(model, config.points_per_step, rng);
    if (k < 2) continue;
    const auto drawn = state.pool.draw(k, rng);
    UpdateSchedule sched = schedule_from_k(k, config.components(), config.floor);
    sched.exact_renormalize = config.exact_renormalize;
    UpdateStats stats;
    model.weights = update_weights(model.weights, drawn, sched, *state.bank, &stats);
    record.floor_events += stats.floor_events;
  }
  for (std::size_t i = 0; i < n; ++i)
    state.pool.post(generated[i], Origin{state.models[i].model_id, static_cast<int>(state.t)});
  ++state.t;
  return record;
}

Trajectory run(const SimConfig& config, NetworkState* final_state) {
  NetworkState state = initial_state(config);
  Trajectory traj;
  traj.config = config;
  traj.records.reserve(config.steps + 1);
  for (std::size_t t = 0; t < config.steps; ++t) traj.records.push_back(step(state, config));
  traj.records.push_back(snapshot(state, config));
  if (final_state) *final_state = std::move(state);
  return traj;
}

std::vector<Trajectory> run_replicates(const SimConfig& config,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t jobs) {
  config.validate();
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    std::cerr << "warning: duplicate seeds in replicate list\n";

  std::vector<Trajectory> out(seeds.size());
  auto run_one = [&](std::size_t i) {
    SimConfig c = config;
    c.seed = seeds[i];
    out[i] = run(c);
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(seeds.size(), 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < seeds.size(); i = next++) {
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace collapse
