#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collapse/metrics.hpp"

namespace collapse {

/// Malformed or inconsistent trace input. `line()` is 1-based, 0 when the
/// problem is not tied to a single line.
class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ResponseRecord {
  std::string model_id;
  std::size_t t = 0;
  std::size_t l = 1;
  Vector embedding;
  std::optional<std::string> text;
};

struct TraceMeta {
  std::string query;
  std::vector<std::string> models;
  std::size_t repeats = 0;  // L
  std::size_t horizon = 0;  // T; timesteps run 0..T
  std::size_t dim = 0;
  std::string embedder;
  std::vector<std::size_t> pool_sizes;
};

/// Recorded responses from a multi-model experiment. After validation every
/// (model, t, l) cell with t in [0, T] and l in [1, L] holds exactly one
/// record.
struct EmbeddingTrace {
  TraceMeta meta;
  std::vector<ResponseRecord> records;

  /// Embeddings of one model at one timestep, ordered by repeat index.
  std::vector<Vector> embeddings(const std::string& model, std::size_t t) const;
};

/// Parse JSON Lines: a {"meta": {...}} header line, then one
/// {"model_id", "t", "l", "embedding"[, "text"]} object per line.
EmbeddingTrace parse_trace(std::istream& in);
EmbeddingTrace load_trace(const std::filesystem::path& path);

void write_trace(std::ostream& out, const EmbeddingTrace& trace);

struct TraceSlice {
  std::size_t t = 0;
  std::vector<Vector> means;  // in meta.models order
  DistanceMatrix distances;
  double frobenius_norm = 0.0;
};

struct ScatterSlice {
  std::size_t t = 0;
  std::vector<std::string> model_ids;
  std::vector<std::size_t> repeats;
  CmdsResult projection;
};

struct TraceAnalysis {
  std::vector<TraceSlice> slices;  // one per t in 0..T
  std::vector<ScatterSlice> scatters;
};

/// Mean embedding per model, distance matrix and norm for every timestep,
/// plus a 2-D CMDS projection of all n*L responses at each t in
/// `scatter_times` (default {1, T}, clamped to T when T == 0).
TraceAnalysis analyze_trace(const EmbeddingTrace& trace,
                            std::optional<std::vector<std::size_t>> scatter_times = std::nullopt);

void write_norms_csv(std::ostream& out, const TraceAnalysis& analysis);
void write_scatter_csv(std::ostream& out, const TraceAnalysis& analysis);

}  // namespace collapse
