#include "collapse/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace collapse {

double step_factor(std::size_t k) {
  if (k < 2) return 1.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log1p(-1.0 / kd));
}

std::vector<double> predicted_multiplier(std::span<const std::size_t> k_schedule) {
  std::vector<double> out;
  out.reserve(k_schedule.size() + 1);
  out.push_back(1.0);
  for (auto k : k_schedule) out.push_back(out.back() * step_factor(k));
  return out;
}

double predicted_gap(double initial_gap, std::span<const std::size_t> k_schedule, std::size_t t) {
  if (t > k_schedule.size()) throw InvalidArgument("t lies beyond the schedule");
  return initial_gap * predicted_multiplier(k_schedule.first(t)).back();
}

std::vector<double> mean_field_weight(const std::vector<std::vector<MixtureWeights>>& history) {
  if (history.empty()) throw InvalidArgument("mean-field weight needs t >= 1");
  std::vector<double> acc;
  std::size_t count = 0;
  for (const auto& slice : history) {
    for (const auto& w : slice) {
      if (acc.empty()) acc.assign(w.size(), 0.0);
      if (w.size() != acc.size()) throw InvalidArgument("inconsistent component counts");
      for (std::size_t b = 0; b < w.size(); ++b) acc[b] += w[b];
      ++count;
    }
  }
  if (count == 0) throw InvalidArgument("mean-field weight needs at least one model");
  for (auto& v : acc) v /= static_cast<double>(count);
  return acc;
}

std::vector<std::size_t> default_checkpoints() { return {1, 2, 5, 10, 20}; }

ContractionReport verify_contraction(const SimConfig& config, std::size_t replicates,
                                     double tolerance, std::vector<std::size_t> checkpoints,
                                     std::size_t jobs) {
  config.validate();
  if (replicates < kMinReplicates)
    throw InvalidArgument("contraction check needs at least " + std::to_string(kMinReplicates) +
                          " replicates");
  if (!(tolerance >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
  if (checkpoints.empty()) throw InvalidArgument("need at least one checkpoint");
  std::sort(checkpoints.begin(), checkpoints.end());

  ContractionReport report;
  report.replicates = replicates;
  report.tolerance = tolerance;
  report.separation = ComponentBank(config.means, config.covariance).separation();
  if (report.separation < kMinSeparation) {
    std::ostringstream msg;
    msg << "component separation " << report.separation << " is below " << kMinSeparation
        << "; the contraction prediction does not apply";
    throw PreconditionRefused(msg.str());
  }

  SimConfig c = config;
  c.steps = std::max<std::size_t>(checkpoints.back(), 1);
  std::vector<std::uint64_t> seeds(replicates);
  for (std::size_t r = 0; r < replicates; ++r) seeds[r] = config.seed + r;
  const auto runs = run_replicates(c, seeds, jobs);

  // The retrieval schedule depends only on pool growth, so it is shared.
  const auto& first = runs.front().records;
  for (std::size_t t = 0; t + 1 < first.size(); ++t)
    report.k_schedule.push_back(first[t].retrieval_count);
  const auto multiplier = predicted_multiplier(report.k_schedule);

  const double rd = static_cast<double>(replicates);
  double norm_sum = 0.0, norm_sq_sum = 0.0;
  for (const auto& traj : runs) {
    for (const auto& rec : traj.records) report.floor_events += rec.floor_events;
    const double final_norm = traj.records.back().frobenius_norm;
    norm_sum += final_norm;
    norm_sq_sum += final_norm * final_norm;
  }
  report.mean_squared_norm = norm_sq_sum / rd;
  report.squared_mean_norm = (norm_sum / rd) * (norm_sum / rd);
  report.jensen_holds = report.mean_squared_norm >= report.squared_mean_norm * (1.0 - 1e-12);

  report.passed = report.jensen_holds;
  for (auto t : checkpoints) {
    if (t >= first.size()) throw InvalidArgument("checkpoint beyond simulated horizon");
    double emp = 0.0, pred = 0.0;
    std::vector<double> residual;
    residual.reserve(replicates);
    for (const auto& traj : runs) {
      const auto gap = [&](std::size_t s) {
        return traj.records[s].weights[0][0] - traj.records[s].weights[1][0];
      };
      const double gap0 = gap(0);
      const double sign = gap0 < 0.0 ? -1.0 : 1.0;
      const double e = sign * gap(t);
      const double p = std::abs(gap0) * multiplier[t];
      emp += e;
      pred += p;
      residual.push_back(e - p);
    }
    ContractionCheckpoint cp;
    cp.t = t;
    cp.empirical = emp / rd;
    cp.predicted = pred / rd;
    const double mean_res = cp.empirical - cp.predicted;
    double var = 0.0;
    for (double r : residual) var += (r - mean_res) * (r - mean_res);
    var /= (rd - 1.0);
    cp.standard_error = std::sqrt(var / rd);
    cp.passed = std::abs(mean_res) <= tolerance + 3.0 * cp.standard_error;
    report.passed = report.passed && cp.passed;
    report.checkpoints.push_back(cp);
  }
  return report;
}

void ContractionReport::write_table(std::ostream& out) const {
  out << "replicates " << replicates << "  tolerance " << tolerance << "  separation "
      << separation << "  floor events " << floor_events << '\n';
  out << std::setw(6) << "t" << std::setw(14) << "empirical" << std::setw(14) << "predicted"
      << std::setw(12) << "SE" << std::setw(8) << "ok" << '\n';
  for (const auto& cp : checkpoints)
    out << std::setw(6) << cp.t << std::setw(14) << std::setprecision(6) << cp.empirical
        << std::setw(14) << cp.predicted << std::setw(12) << cp.standard_error << std::setw(8)
        << (cp.passed ? "pass" : "FAIL") << '\n';
  out << "E[|D|^2] = " << mean_squared_norm << "  (E|D|)^2 = " << squared_mean_norm
      << (jensen_holds ? "  ok" : "  VIOLATED") << '\n';
  out << (passed ? "PASS" : "FAIL") << '\n';
}

}  // namespace collapse
