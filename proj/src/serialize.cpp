#include "collapse/serialize.hpp"

#include <fstream>
#include <ostream>
#include <set>

namespace collapse {

using nlohmann::json;

namespace {

Vector to_vector(const json& j) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json from_vector(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<Vector> to_points(const json& j) {
  std::vector<Vector> out;
  for (const auto& p : j) out.push_back(to_vector(p));
  return out;
}

json from_points(const std::vector<Vector>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(from_vector(p));
  return out;
}

Matrix to_matrix(const json& j) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m.cols())
      throw InvalidArgument("ragged matrix rows");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

json from_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw InvalidArgument(std::string("unknown key '") + key + "' in " + where);
}

}  // namespace

SimConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  reject_unknown(j,
                 {"n", "bank", "a", "L", "beta", "T", "epsilon", "schedule_rule", "seed",
                  "initial_pool", "exact_renormalize"},
                 "config");
  SimConfig c;
  try {
    c.models = j.value("n", c.models);
    c.concentration = j.value("a", c.concentration);
    c.points_per_step = j.value("L", c.points_per_step);
    c.beta = j.value("beta", c.beta);
    c.steps = j.value("T", c.steps);
    c.floor = j.value("epsilon", c.floor);
    c.schedule_rule = j.value("schedule_rule", c.schedule_rule);
    c.seed = j.value("seed", c.seed);
    c.exact_renormalize = j.value("exact_renormalize", c.exact_renormalize);
    if (j.contains("initial_pool")) c.initial_pool = to_points(j.at("initial_pool"));

    if (!j.contains("bank")) throw InvalidArgument("config needs a 'bank' section");
    const auto& bank = j.at("bank");
    reject_unknown(bank, {"means", "covariance", "random_means"}, "bank");
    if (!bank.contains("covariance")) throw InvalidArgument("bank needs a covariance");
    c.covariance = to_matrix(bank.at("covariance"));
    if (bank.contains("means") == bank.contains("random_means"))
      throw InvalidArgument("bank needs exactly one of 'means' or 'random_means'");
    if (bank.contains("means")) {
      c.means = to_points(bank.at("means"));
    } else {
      const auto& r = bank.at("random_means");
      reject_unknown(r, {"count", "min_gap", "seed"}, "random_means");
      Rng rng(r.value("seed", std::uint64_t{0}));
      c.means = well_separated_means(r.at("count").get<std::size_t>(),
                                     r.at("min_gap").get<double>(), rng);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const SimConfig& c) {
  json j = {{"n", c.models},
            {"bank", {{"means", from_points(c.means)}, {"covariance", from_matrix(c.covariance)}}},
            {"a", c.concentration},
            {"L", c.points_per_step},
            {"beta", c.beta},
            {"T", c.steps},
            {"epsilon", c.floor},
            {"schedule_rule", c.schedule_rule},
            {"seed", c.seed},
            {"exact_renormalize", c.exact_renormalize}};
  if (!c.initial_pool.empty()) j["initial_pool"] = from_points(c.initial_pool);
  return j;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json trajectory_to_json(const Trajectory& traj) {
  json records = json::array();
  for (const auto& r : traj.records) {
    json weights = json::array();
    for (const auto& w : r.weights)
      weights.push_back(std::vector<double>(w.values().begin(), w.values().end()));
    records.push_back({{"t", r.t},
                       {"weights", weights},
                       {"distance_matrix", from_matrix(r.distances.matrix())},
                       {"frobenius_norm", r.frobenius_norm},
                       {"pool_size", r.pool_size},
                       {"synthetic_fraction",
                        r.synthetic_fraction ? json(*r.synthetic_fraction) : json(nullptr)},
                       {"k", r.retrieval_count},
                       {"floor_events", r.floor_events}});
  }
  return {{"config", config_to_json(traj.config)}, {"seed", traj.config.seed}, {"records", records}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory traj;
  try {
    traj.config = config_from_json(j.at("config"));
    for (const auto& r : j.at("records")) {
      StepRecord rec;
      rec.t = r.at("t").get<std::size_t>();
      for (const auto& w : r.at("weights"))
        rec.weights.emplace_back(w.get<std::vector<double>>(), traj.config.floor);
      rec.distances = DistanceMatrix(to_matrix(r.at("distance_matrix")));
      rec.frobenius_norm = r.at("frobenius_norm").get<double>();
      rec.pool_size = r.at("pool_size").get<std::size_t>();
      if (!r.at("synthetic_fraction").is_null())
        rec.synthetic_fraction = r.at("synthetic_fraction").get<double>();
      rec.retrieval_count = r.at("k").get<std::size_t>();
      rec.floor_events = r.at("floor_events").get<std::size_t>();
      traj.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("trajectory: ") + e.what());
  }
  return traj;
}

std::string dump_trajectory(const Trajectory& traj) { return trajectory_to_json(traj).dump() + "\n"; }

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto old = out.precision(17);
  out << "t,frobenius_norm,pool_size,synthetic_fraction,k_t\n";
  for (const auto& r : traj.records) {
    out << r.t << ',' << r.frobenius_norm << ',' << r.pool_size << ',';
    if (r.synthetic_fraction) out << *r.synthetic_fraction;
    out << ',' << r.retrieval_count << '\n';
  }
  out.precision(old);
}

json report_to_json(const ContractionReport& report) {
  json cps = json::array();
  for (const auto& cp : report.checkpoints)
    cps.push_back({{"t", cp.t},
                   {"empirical", cp.empirical},
                   {"predicted", cp.predicted},
                   {"standard_error", cp.standard_error},
                   {"passed", cp.passed}});
  return {{"replicates", report.replicates},
          {"tolerance", report.tolerance},
          {"separation", report.separation},
          {"k_schedule", report.k_schedule},
          {"checkpoints", cps},
          {"floor_events", report.floor_events},
          {"mean_squared_norm", report.mean_squared_norm},
          {"squared_mean_norm", report.squared_mean_norm},
          {"jensen_holds", report.jensen_holds},
          {"passed", report.passed}};
}

}  // namespace collapse
