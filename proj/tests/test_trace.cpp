#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "collapse/trace.hpp"
#include "planted.hpp"

using namespace collapse;

namespace {

const std::string kFixture = std::string(COLLAPSE_TEST_DATA) + "/small_trace.jsonl";

std::string fixture_text() {
  std::ifstream in(kFixture);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::size_t error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_trace(in);
  } catch (const TraceError& e) {
    return e.line() == 0 ? static_cast<std::size_t>(-1) : e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("fixture loads") {
  const auto trace = load_trace(kFixture);
  CHECK(trace.meta.models.size() == 3);
  CHECK(trace.meta.repeats == 2);
  CHECK(trace.meta.horizon == 1);
  CHECK(trace.meta.dim == 4);
  CHECK(trace.meta.pool_sizes == std::vector<std::size_t>{0, 6});
  CHECK(trace.records.size() == 12);
  const auto e = trace.embeddings("beta", 1);
  REQUIRE(e.size() == 2);
  CHECK(e[0][2] == 0.5);
  CHECK(e[1][2] == 1.0);
  CHECK(trace.records.front().text.value() == "alpha reply 0.1");
}

TEST_CASE("fixture analysis") {
  const auto a = analyze_trace(load_trace(kFixture));
  REQUIRE(a.slices.size() == 2);
  for (const auto& s : a.slices) {
    CHECK(s.means[1][2] == doctest::Approx(0.75));
    CHECK(s.distances(0, 2) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
    CHECK(s.frobenius_norm == doctest::Approx(std::sqrt(24.0)).epsilon(1e-14));
  }
  REQUIRE(a.scatters.size() == 1);  // {1, T} collapses to a single time when T = 1
  CHECK(a.scatters[0].t == 1);
  CHECK(a.scatters[0].projection.coordinates.rows() == 6);
  CHECK_THROWS_AS(analyze_trace(load_trace(kFixture), std::vector<std::size_t>{2}), InvalidArgument);
}

TEST_CASE("malformed input is rejected with its line number") {
  auto lines = lines_of(fixture_text());

  auto wrong_dim = lines;
  wrong_dim[3] = R"({"model_id": "alpha", "t": 0, "l": 1, "embedding": [1.0, 2.0, 3.0]})";
  CHECK(error_line(join(wrong_dim)) == 4);

  auto broken = lines;
  broken[5] = "{\"model_id\": \"beta\", ";
  CHECK(error_line(join(broken)) == 6);

  auto unknown = lines;
  unknown[2] = R"({"model_id": "delta", "t": 0, "l": 2, "embedding": [0, 0, 0, 0]})";
  CHECK(error_line(join(unknown)) == 3);

  auto late = lines;
  late[2] = R"({"model_id": "alpha", "t": 2, "l": 2, "embedding": [0, 0, 0, 0]})";
  CHECK(error_line(join(late)) == 3);

  auto dup = lines;
  dup[2] = dup[1];
  CHECK(error_line(join(dup)) == 3);

  auto missing = lines;
  missing.pop_back();
  CHECK(error_line(join(missing)) == static_cast<std::size_t>(-1));

  auto nan = lines;
  nan[1] = R"({"model_id": "alpha", "t": 0, "l": 1, "embedding": [1, 0, "x", 0]})";
  CHECK(error_line(join(nan)) == 2);

  CHECK(error_line(join({lines[1]})) == 1);
  CHECK(error_line("") == static_cast<std::size_t>(-1));

  // Blank lines are skipped; line numbers still count them.
  auto blank = lines;
  blank.insert(blank.begin() + 1, "");
  blank[3] = "[]";
  CHECK(error_line(join(blank)) == 4);
}

TEST_CASE("high-dimensional embeddings") {
  planted::Params s;
  s.horizon = 0;
  s.repeats = 2;
  auto p = planted::make(s);
  std::ostringstream out;
  write_trace(out, p.trace);
  auto lines = lines_of(out.str());
  std::string cut = lines[1];
  cut = cut.substr(0, cut.rfind(',')) + "]}";
  lines[1] = cut;
  CHECK(error_line(join(lines)) == 2);
}

TEST_CASE("identical embeddings give a zero norm") {
  auto trace = load_trace(kFixture);
  for (auto& r : trace.records) r.embedding = Vector::Constant(4, 0.25);
  for (const auto& s : analyze_trace(trace).slices) CHECK(s.frobenius_norm == 0.0);
}

TEST_CASE("write_trace round-trips") {
  const auto trace = load_trace(kFixture);
  std::ostringstream out;
  write_trace(out, trace);
  std::istringstream in(out.str());
  const auto back = parse_trace(in);
  REQUIRE(back.records.size() == trace.records.size());
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    CHECK(back.records[i].embedding == trace.records[i].embedding);
    CHECK(back.records[i].text == trace.records[i].text);
  }
  CHECK(back.meta.query == trace.meta.query);
}

TEST_CASE("planted Gaussians recover the expected norm") {
  const planted::Params s;
  const auto p = planted::make(s);
  const auto a = analyze_trace(p.trace);
  std::vector<double> norms;
  for (const auto& slice : a.slices) norms.push_back(slice.frobenius_norm);
  const double n = static_cast<double>(norms.size());
  double mean = 0.0, var = 0.0;
  for (double v : norms) mean += v / n;
  for (double v : norms) var += (v - mean) * (v - mean) / (n - 1.0);
  const double se = std::sqrt(var / n);
  CHECK(std::abs(mean - planted::expected_norm(p, s)) <= 3.0 * se);
}

TEST_CASE("analysis invariances") {
  planted::Params s;
  s.dim = 16;
  s.repeats = 5;
  s.horizon = 3;
  const auto p = planted::make(s);
  const auto base = analyze_trace(p.trace);

  auto permuted = p.trace;
  for (auto& r : permuted.records) r.l = s.repeats + 1 - r.l;
  std::reverse(permuted.records.begin(), permuted.records.end());
  const auto perm = analyze_trace(permuted);

  auto scaled = p.trace;
  for (auto& r : scaled.records) r.embedding *= 3.0;
  const auto sc = analyze_trace(scaled);

  const auto again = analyze_trace(p.trace);
  for (std::size_t t = 0; t <= s.horizon; ++t) {
    CHECK(perm.slices[t].frobenius_norm ==
          doctest::Approx(base.slices[t].frobenius_norm).epsilon(1e-12));
    CHECK(sc.slices[t].frobenius_norm ==
          doctest::Approx(3.0 * base.slices[t].frobenius_norm).epsilon(1e-12));
    CHECK(again.slices[t].frobenius_norm == base.slices[t].frobenius_norm);
  }
  REQUIRE(base.scatters.size() == 2);
  CHECK(base.scatters[0].t == 1);
  CHECK(base.scatters[1].t == 3);
  CHECK(base.scatters[1].projection.coordinates.rows() == 15);
}

TEST_CASE("CSV outputs") {
  const auto a = analyze_trace(load_trace(kFixture));
  std::ostringstream norms, scatter;
  write_norms_csv(norms, a);
  write_scatter_csv(scatter, a);
  const auto nl = lines_of(norms.str());
  REQUIRE(nl.size() == 3);
  CHECK(nl[0] == "t,frobenius_norm");
  CHECK(nl[1].rfind("0,", 0) == 0);
  const auto sl = lines_of(scatter.str());
  CHECK(sl[0] == "t,model_id,repeat_index,x,y");
  CHECK(sl.size() == 7);
  CHECK(sl[1].rfind("1,alpha,1,", 0) == 0);
}
