#include "collapse/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "collapse/manifest.hpp"
#include "collapse/serialize.hpp"
#include "collapse/theory.hpp"
#include "collapse/trace.hpp"

namespace fs = std::filesystem;

namespace collapse {
namespace {

/// Usage-level failure: bad flags, unreadable config, clobbering refused.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw UsageError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force)
      throw UsageError(dir.string() + " is not empty; pass --force to overwrite");
    // Drop outputs recorded by an earlier run so stale replicates do not linger.
    const fs::path previous = dir / "manifest.json";
    if (fs::is_regular_file(previous)) {
      std::ifstream in(previous);
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_object() && j.contains("outputs") && j["outputs"].is_array())
        for (const auto& o : j["outputs"])
          if (o.is_object() && o.contains("path") && o["path"].is_string()) {
            const fs::path rel = o["path"].get<std::string>();
            if (rel.is_relative() && rel.filename() == rel) fs::remove(dir / rel);
          }
      fs::remove(previous);
    }
  }
  fs::create_directories(dir);
}

template <typename Fn>
void write_file(RunManifest& manifest, const std::string& name, Fn&& body) {
  const fs::path path = fs::path(manifest.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  out.close();
  manifest.add_output(name);
}

std::vector<std::uint64_t> resolve_seeds(const std::vector<std::uint64_t>& flag,
                                         const SimConfig& config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("COLLAPSE_SIM_SEED")) {
    try {
      return {std::stoull(env)};
    } catch (const std::exception&) {
      throw UsageError(std::string("COLLAPSE_SIM_SEED is not an integer: ") + env);
    }
  }
  return {config.seed};
}

std::string replicate_file(std::size_t index, std::uint64_t seed, const char* ext) {
  std::ostringstream name;
  name << "trajectory_r" << std::setw(3) << std::setfill('0') << index << "_s" << seed << ext;
  return name.str();
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

int cmd_simulate(const std::string& config_path, const std::vector<std::uint64_t>& seed_flag,
                 const std::string& out_dir, std::size_t jobs, bool force, bool pool_snapshot) {
  Timer timer;
  const SimConfig config = load_config(config_path);
  const auto seeds = resolve_seeds(seed_flag, config);
  prepare_out_dir(out_dir, force);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_path = config_path;
  manifest.seeds = seeds;
  manifest.out_dir = out_dir;

  const auto trajectories = run_replicates(config, seeds, jobs);
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    const auto& traj = trajectories[r];
    write_file(manifest, replicate_file(r, seeds[r], ".json"),
               [&](std::ostream& out) { out << dump_trajectory(traj); });
    write_file(manifest, replicate_file(r, seeds[r], ".csv"),
               [&](std::ostream& out) { write_trajectory_csv(out, traj); });
    if (pool_snapshot) {
      SimConfig c = config;
      c.seed = seeds[r];
      NetworkState state;
      run(c, &state);
      write_file(manifest, replicate_file(r, seeds[r], ".pool.csv"),
                 [&](std::ostream& out) { state.pool.write_csv(out); });
    }
    const auto& recs = traj.records;
    std::cout << "seed " << seeds[r] << ": |D(0)|_F = " << recs.front().frobenius_norm
              << ", |D(T)|_F = " << recs.back().frobenius_norm << ", pool " << recs.back().pool_size
              << '\n';
  }
  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(fs::path(out_dir) / "manifest.json");
  return kExitOk;
}

int cmd_analyze(const std::string& trace_path, const std::vector<std::size_t>& t_list,
                const std::string& out_dir, bool force) {
  Timer timer;
  const auto trace = load_trace(trace_path);
  for (auto t : t_list)
    if (t > trace.meta.horizon)
      throw UsageError("t-list entry " + std::to_string(t) + " outside [0, " +
                       std::to_string(trace.meta.horizon) + "]");
  const auto analysis =
      analyze_trace(trace, t_list.empty() ? std::nullopt : std::optional(t_list));
  prepare_out_dir(out_dir, force);

  RunManifest manifest;
  manifest.command = "analyze";
  manifest.config_path = trace_path;
  manifest.out_dir = out_dir;
  write_file(manifest, "norms.csv", [&](std::ostream& out) { write_norms_csv(out, analysis); });
  write_file(manifest, "cmds.csv", [&](std::ostream& out) { write_scatter_csv(out, analysis); });
  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(fs::path(out_dir) / "manifest.json");
  std::cout << "analyzed " << trace.records.size() << " records over "
            << analysis.slices.size() << " timesteps\n";
  return kExitOk;
}

int cmd_verify(const std::string& config_path, std::size_t replicates, double tolerance,
               const std::vector<std::size_t>& checkpoints, const std::string& out_dir,
               std::size_t jobs, bool force) {
  Timer timer;
  const SimConfig config = load_config(config_path);
  if (replicates < kMinReplicates)
    throw UsageError("--replicates must be at least " + std::to_string(kMinReplicates));
  if (!out_dir.empty()) prepare_out_dir(out_dir, force);
  const auto report = verify_contraction(
      config, replicates, tolerance, checkpoints.empty() ? default_checkpoints() : checkpoints,
      jobs);
  report.write_table(std::cout);
  if (!out_dir.empty()) {
    RunManifest manifest;
    manifest.command = "verify";
    manifest.config_path = config_path;
    manifest.out_dir = out_dir;
    write_file(manifest, "contraction_report.json",
               [&](std::ostream& out) { out << report_to_json(report).dump(2) << '\n'; });
    manifest.wall_clock_seconds = timer.seconds();
    manifest.write(fs::path(out_dir) / "manifest.json");
  }
  return report.passed ? kExitOk : kExitVerifyFailed;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cmd_plotdata(const std::string& in_dir, const std::string& out_dir,
                 const std::vector<std::size_t>& t_list, double jitter, std::uint64_t jitter_seed,
                 bool force) {
  Timer timer;
  if (!fs::is_directory(in_dir)) throw UsageError(in_dir + " is not a directory");
  std::vector<fs::path> trajectories;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("trajectory_", 0) == 0 && entry.path().extension() == ".json")
      trajectories.push_back(entry.path());
  }
  std::sort(trajectories.begin(), trajectories.end());
  const fs::path norms_in = fs::path(in_dir) / "norms.csv";
  const fs::path cmds_in = fs::path(in_dir) / "cmds.csv";
  const bool analysis_dir = fs::exists(norms_in) && fs::exists(cmds_in);
  if (trajectories.empty() && !analysis_dir)
    throw UsageError(in_dir + " holds neither trajectory files nor an analysis");
  prepare_out_dir(out_dir, force);

  RunManifest manifest;
  manifest.command = "plotdata";
  manifest.config_path = in_dir;
  manifest.out_dir = out_dir;

  if (!trajectories.empty()) {
    std::vector<Trajectory> runs;
    for (const auto& p : trajectories) {
      std::ifstream in(p);
      runs.push_back(trajectory_from_json(nlohmann::json::parse(in)));
      manifest.seeds.push_back(runs.back().config.seed);
    }
    write_file(manifest, "norms_long.csv", [&](std::ostream& out) {
      out << std::setprecision(17) << "replicate,seed,t,frobenius_norm\n";
      for (std::size_t r = 0; r < runs.size(); ++r)
        for (const auto& rec : runs[r].records)
          out << r << ',' << runs[r].config.seed << ',' << rec.t << ',' << rec.frobenius_norm
              << '\n';
    });
    if (runs.front().config.dim() == 1) {
      write_file(manifest, "densities.csv", [&](std::ostream& out) {
        out << std::setprecision(17) << "replicate,seed,t,model_id,x,density\n";
        for (std::size_t r = 0; r < runs.size(); ++r) {
          const auto& traj = runs[r];
          const ComponentBank bank(traj.config.means, traj.config.covariance);
          const std::size_t horizon = traj.records.size() - 1;
          std::vector<std::size_t> times =
              t_list.empty() ? std::vector<std::size_t>{std::min<std::size_t>(1, horizon), horizon}
                             : t_list;
          std::sort(times.begin(), times.end());
          times.erase(std::unique(times.begin(), times.end()), times.end());
          for (auto t : times) {
            if (t > horizon) throw UsageError("t-list entry outside trajectory");
            const auto& rec = traj.records[t];
            for (std::size_t i = 0; i < rec.weights.size(); ++i)
              for (int g = 0; g <= 400; ++g) {
                const double x = -10.0 + 0.05 * g;
                out << r << ',' << traj.config.seed << ',' << t << ',' << i + 1 << ',' << x << ','
                    << mixture_density(Vector::Constant(1, x), rec.weights[i], bank) << '\n';
              }
          }
        }
      });
    }
  }

  if (analysis_dir) {
    const auto norms = read_csv(norms_in);
    write_file(manifest, "trace_norms_long.csv", [&](std::ostream& out) {
      out << "replicate,t,frobenius_norm\n";
      for (std::size_t i = 1; i < norms.size(); ++i)
        out << "trace," << norms[i].at(0) << ',' << norms[i].at(1) << '\n';
    });
    const auto cmds = read_csv(cmds_in);
    Rng rng(jitter_seed);
    std::uniform_real_distribution<double> noise(-jitter, jitter);
    write_file(manifest, "scatter.csv", [&](std::ostream& out) {
      out << std::setprecision(17) << "t,model_id,repeat_index,x,y,x_plot,y_plot\n";
      for (std::size_t i = 1; i < cmds.size(); ++i) {
        const auto& row = cmds[i];
        const double x = std::stod(row.at(3)), y = std::stod(row.at(4));
        const double dx = jitter > 0.0 ? noise(rng) : 0.0;
        const double dy = jitter > 0.0 ? noise(rng) : 0.0;
        out << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ',' << row[4] << ','
            << x + dx << ',' << y + dy << '\n';
      }
    });
  }
  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(fs::path(out_dir) / "manifest.json");
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Simulate and measure collapse in networks of generative models", "collapse-sim"};
  app.require_subcommand(1);

  std::string config_path, out_dir, trace_path, in_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> t_list, checkpoints;
  std::size_t jobs = 1, replicates = 100;
  double tolerance = 0.02, jitter = 0.0;
  std::uint64_t jitter_seed = 0;
  bool force = false, pool_snapshot = false;

  auto* sim = app.add_subcommand("simulate", "Run replicate simulations of a GMM network");
  sim->add_option("--config", config_path, "Config JSON")->required();
  sim->add_option("--seeds", seeds, "Comma-separated replicate seeds")->delimiter(',');
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--jobs", jobs, "Replicates run in parallel")->check(CLI::PositiveNumber);
  sim->add_flag("--force", force, "Overwrite a non-empty output directory");
  sim->add_flag("--pool-snapshot", pool_snapshot, "Also export the final pool as CSV");

  auto* ana = app.add_subcommand("analyze", "Compute norms and CMDS scatters from a trace");
  ana->add_option("--trace", trace_path, "Trace JSONL")->required();
  ana->add_option("--t-list", t_list, "Timesteps for CMDS scatters")->delimiter(',');
  ana->add_option("--out", out_dir, "Output directory")->required();
  ana->add_flag("--force", force, "Overwrite a non-empty output directory");

  auto* ver = app.add_subcommand("verify", "Check weight-gap contraction against its prediction");
  ver->add_option("--config", config_path, "Config JSON")->required();
  ver->add_option("--replicates", replicates, "Replicate count (>= 30)");
  ver->add_option("--tolerance", tolerance, "Absolute tolerance added to 3 SE");
  ver->add_option("--checkpoints", checkpoints, "Checkpoint timesteps")->delimiter(',');
  ver->add_option("--out", out_dir, "Optional output directory for the JSON report");
  ver->add_option("--jobs", jobs, "Replicates run in parallel")->check(CLI::PositiveNumber);
  ver->add_flag("--force", force, "Overwrite a non-empty output directory");

  auto* plot = app.add_subcommand("plotdata", "Emit tidy CSVs for external plotting");
  plot->add_option("--in", in_dir, "Simulation or analysis output directory")->required();
  plot->add_option("--out", out_dir, "Output directory")->required();
  plot->add_option("--t-list", t_list, "Timesteps for density curves")->delimiter(',');
  plot->add_option("--jitter", jitter, "Half-width of uniform jitter on plotted scatter points");
  plot->add_option("--jitter-seed", jitter_seed, "Seed for scatter jitter");
  plot->add_flag("--force", force, "Overwrite a non-empty output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(config_path, seeds, out_dir, jobs, force, pool_snapshot);
    if (*ana) return cmd_analyze(trace_path, t_list, out_dir, force);
    if (*ver)
      return cmd_verify(config_path, replicates, tolerance, checkpoints, out_dir, jobs, force);
    if (*plot) return cmd_plotdata(in_dir, out_dir, t_list, jitter, jitter_seed, force);
  } catch (const PreconditionRefused& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kExitRefused;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const TraceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace collapse
