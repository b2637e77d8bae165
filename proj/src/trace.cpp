#include "collapse/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

namespace collapse {

using nlohmann::json;

std::vector<Vector> EmbeddingTrace::embeddings(const std::string& model, std::size_t t) const {
  std::vector<const ResponseRecord*> hits;
  for (const auto& r : records)
    if (r.model_id == model && r.t == t) hits.push_back(&r);
  std::sort(hits.begin(), hits.end(), [](auto* a, auto* b) { return a->l < b->l; });
  std::vector<Vector> out;
  out.reserve(hits.size());
  for (auto* r : hits) out.push_back(r->embedding);
  return out;
}

namespace {

std::size_t as_index(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw TraceError(std::string("missing field '") + key + "'", line);
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw TraceError(std::string("field '") + key + "' must be a non-negative integer", line);
  return v.get<std::size_t>();
}

TraceMeta parse_meta(const json& j, std::size_t line) {
  if (!j.is_object() || !j.contains("meta") || !j.at("meta").is_object())
    throw TraceError("first line must be a {\"meta\": {...}} header", line);
  const auto& m = j.at("meta");
  TraceMeta meta;
  try {
    meta.query = m.value("query", std::string{});
    meta.embedder = m.value("embedder", std::string{});
    meta.models = m.at("models").get<std::vector<std::string>>();
    meta.pool_sizes = m.value("pool_sizes", std::vector<std::size_t>{});
  } catch (const json::exception& e) {
    throw TraceError(std::string("bad header: ") + e.what(), line);
  }
  meta.repeats = as_index(m, "L", line);
  meta.horizon = as_index(m, "T", line);
  meta.dim = as_index(m, "dim", line);
  if (meta.models.empty()) throw TraceError("header lists no models", line);
  if (std::set(meta.models.begin(), meta.models.end()).size() != meta.models.size())
    throw TraceError("header lists duplicate models", line);
  if (meta.repeats < 1) throw TraceError("L must be at least 1", line);
  if (meta.dim < 1) throw TraceError("dim must be at least 1", line);
  return meta;
}

ResponseRecord parse_record(const json& j, const TraceMeta& meta, std::size_t line) {
  if (!j.is_object()) throw TraceError("record must be a JSON object", line);
  ResponseRecord r;
  if (!j.contains("model_id") || !j.at("model_id").is_string())
    throw TraceError("missing string field 'model_id'", line);
  r.model_id = j.at("model_id").get<std::string>();
  if (std::find(meta.models.begin(), meta.models.end(), r.model_id) == meta.models.end())
    throw TraceError("model '" + r.model_id + "' not listed in header", line);
  r.t = as_index(j, "t", line);
  r.l = as_index(j, "l", line);
  if (r.t > meta.horizon) throw TraceError("t outside [0, T]", line);
  if (r.l < 1 || r.l > meta.repeats) throw TraceError("l outside [1, L]", line);
  if (!j.contains("embedding") || !j.at("embedding").is_array())
    throw TraceError("missing array field 'embedding'", line);
  const auto& e = j.at("embedding");
  if (e.size() != meta.dim)
    throw TraceError("embedding has " + std::to_string(e.size()) + " entries, expected " +
                         std::to_string(meta.dim),
                     line);
  r.embedding.resize(static_cast<Eigen::Index>(e.size()));
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!e[i].is_number()) throw TraceError("embedding entry is not a number", line);
    const double v = e[i].get<double>();
    if (!std::isfinite(v)) throw TraceError("embedding entry is not finite", line);
    r.embedding[static_cast<Eigen::Index>(i)] = v;
  }
  if (j.contains("text") && j.at("text").is_string()) r.text = j.at("text").get<std::string>();
  return r;
}

}  // namespace

EmbeddingTrace parse_trace(std::istream& in) {
  EmbeddingTrace trace;
  std::string text;
  std::size_t line = 0;
  bool have_meta = false;
  std::set<std::tuple<std::string, std::size_t, std::size_t>> seen;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw TraceError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!have_meta) {
      trace.meta = parse_meta(j, line);
      have_meta = true;
      continue;
    }
    auto r = parse_record(j, trace.meta, line);
    if (!seen.emplace(r.model_id, r.t, r.l).second)
      throw TraceError("duplicate record for (" + r.model_id + ", t=" + std::to_string(r.t) +
                           ", l=" + std::to_string(r.l) + ")",
                       line);
    trace.records.push_back(std::move(r));
  }
  if (!have_meta) throw TraceError("trace is empty", 0);

  for (const auto& m : trace.meta.models)
    for (std::size_t t = 0; t <= trace.meta.horizon; ++t)
      for (std::size_t l = 1; l <= trace.meta.repeats; ++l)
        if (!seen.count({m, t, l}))
          throw TraceError("missing record for (" + m + ", t=" + std::to_string(t) +
                               ", l=" + std::to_string(l) + ")",
                           0);
  return trace;
}

EmbeddingTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open " + path.string(), 0);
  return parse_trace(in);
}

void write_trace(std::ostream& out, const EmbeddingTrace& trace) {
  const auto& m = trace.meta;
  json meta = {{"query", m.query}, {"models", m.models}, {"L", m.repeats},
               {"T", m.horizon},   {"dim", m.dim},       {"embedder", m.embedder}};
  if (!m.pool_sizes.empty()) meta["pool_sizes"] = m.pool_sizes;
  out << json{{"meta", meta}}.dump() << '\n';
  for (const auto& r : trace.records) {
    json j = {{"model_id", r.model_id},
              {"t", r.t},
              {"l", r.l},
              {"embedding", std::vector<double>(r.embedding.data(),
                                                r.embedding.data() + r.embedding.size())}};
    if (r.text) j["text"] = *r.text;
    out << j.dump() << '\n';
  }
}

TraceAnalysis analyze_trace(const EmbeddingTrace& trace,
                            std::optional<std::vector<std::size_t>> scatter_times) {
  const auto& meta = trace.meta;
  if (meta.models.size() < 2) throw InvalidArgument("analysis needs at least two models");
  std::vector<std::size_t> times =
      scatter_times ? *scatter_times
                    : std::vector<std::size_t>{std::min<std::size_t>(1, meta.horizon), meta.horizon};
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  for (auto t : times)
    if (t > meta.horizon)
      throw InvalidArgument("scatter time " + std::to_string(t) + " outside [0, T]");

  // Index by (model, t) once so each slice is a lookup.
  std::map<std::pair<std::string, std::size_t>, std::vector<const ResponseRecord*>> cells;
  for (const auto& r : trace.records) cells[{r.model_id, r.t}].push_back(&r);
  for (auto& [key, v] : cells)
    std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->l < b->l; });

  TraceAnalysis out;
  for (std::size_t t = 0; t <= meta.horizon; ++t) {
    TraceSlice slice;
    slice.t = t;
    for (const auto& m : meta.models) {
      std::vector<Vector> vs;
      for (auto* r : cells[{m, t}]) vs.push_back(r->embedding);
      slice.means.push_back(mean_embedding(vs));
    }
    slice.distances = distance_matrix(slice.means);
    slice.frobenius_norm = frobenius_norm(slice.distances);
    out.slices.push_back(std::move(slice));
  }

  for (auto t : times) {
    ScatterSlice s;
    s.t = t;
    std::vector<Vector> pts;
    for (const auto& m : meta.models)
      for (auto* r : cells[{m, t}]) {
        pts.push_back(r->embedding);
        s.model_ids.push_back(m);
        s.repeats.push_back(r->l);
      }
    s.projection = cmds_project(distance_matrix(pts).matrix(), 2);
    out.scatters.push_back(std::move(s));
  }
  return out;
}

void write_norms_csv(std::ostream& out, const TraceAnalysis& analysis) {
  const auto old = out.precision(17);
  out << "t,frobenius_norm\n";
  for (const auto& s : analysis.slices) out << s.t << ',' << s.frobenius_norm << '\n';
  out.precision(old);
}

void write_scatter_csv(std::ostream& out, const TraceAnalysis& analysis) {
  const auto old = out.precision(17);
  out << "t,model_id,repeat_index,x,y\n";
  for (const auto& s : analysis.scatters)
    for (std::size_t i = 0; i < s.model_ids.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      out << s.t << ',' << s.model_ids[i] << ',' << s.repeats[i] << ','
          << s.projection.coordinates(row, 0) << ',' << s.projection.coordinates(row, 1) << '\n';
    }
  out.precision(old);
}

}  // namespace collapse
