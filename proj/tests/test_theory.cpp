#include <doctest.h>

#include <cmath>

#include "collapse/theory.hpp"

using namespace collapse;

TEST_CASE("predicted multiplier") {
  const std::vector<std::size_t> one{10};
  const auto p = predicted_multiplier(one);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == doctest::Approx(0.3486784401).epsilon(1e-12));

  CHECK(predicted_multiplier(std::vector<std::size_t>{}) == std::vector<double>{1.0});

  // Steps with k < 2 perform no update.
  const std::vector<std::size_t> early{0, 1, 4};
  const auto q = predicted_multiplier(early);
  CHECK(q[1] == 1.0);
  CHECK(q[2] == 1.0);
  CHECK(q[3] == doctest::Approx(std::pow(0.75, 4)).epsilon(1e-14));

  CHECK(std::abs(step_factor(10000) - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("step factor bounds and monotonicity") {
  double previous = step_factor(2);
  CHECK(previous == 0.25);
  for (std::size_t k = 2; k <= 1000000; k = k < 1000 ? k + 1 : k + 997) {
    const double f = step_factor(k);
    CHECK(f >= 0.25);
    CHECK(f < std::exp(-1.0) * std::exp(1.0 / (2.0 * static_cast<double>(k) - 2.0)));
    CHECK(f <= std::exp(-1.0));
    if (k > 2) CHECK(f >= previous);  // increases toward 1/e from below
    previous = f;
  }
}

TEST_CASE("predicted gap") {
  const std::vector<std::size_t> one{10};
  CHECK(predicted_gap(0.0, one, 1) == 0.0);
  CHECK(predicted_gap(0.4, one, 1) == doctest::Approx(0.13947137604).epsilon(1e-12));
  CHECK(predicted_gap(0.4, one, 0) == 0.4);
  CHECK_THROWS_AS(predicted_gap(0.4, one, 2), InvalidArgument);

  const std::vector<std::size_t> ks{0, 4, 9, 13, 18, 22};
  double last = 1.0;
  for (std::size_t t = 0; t <= ks.size(); ++t) {
    const double g = std::abs(predicted_gap(-1.0, ks, t));
    CHECK(g <= last);
    if (t > 1) CHECK(g < last);
    last = g;
  }
}

TEST_CASE("mean-field weight") {
  CHECK_THROWS_AS(mean_field_weight({}), InvalidArgument);

  const MixtureWeights w({0.3, 0.7});
  const auto same = mean_field_weight({{w, w, w}, {w, w, w}});
  CHECK(same[0] == doctest::Approx(0.3));

  const auto half = mean_field_weight({{MixtureWeights({1.0, 0.0}), MixtureWeights({0.0, 1.0})}});
  CHECK(half[0] == 0.5);
  CHECK(half[1] == 0.5);

  // Six known vectors (n = 3, t = 2); brute-force double sum.
  const std::vector<std::vector<MixtureWeights>> hist{
      {MixtureWeights({0.1, 0.9}), MixtureWeights({0.2, 0.8}), MixtureWeights({0.6, 0.4})},
      {MixtureWeights({0.5, 0.5}), MixtureWeights({0.35, 0.65}), MixtureWeights({0.25, 0.75})}};
  double first = 0.0;
  for (const auto& slice : hist)
    for (const auto& m : slice) first += m[0];
  const auto mf = mean_field_weight(hist);
  CHECK(mf[0] == doctest::Approx(first / 6.0).epsilon(1e-15));
  CHECK(mf[0] + mf[1] == doctest::Approx(1.0));
}

TEST_CASE("verify_contraction gates") {
  auto c = reference_config();
  CHECK_THROWS_AS(verify_contraction(c, 10, 0.02), InvalidArgument);

  auto close = c;
  close.means = {Vector::Constant(1, -0.5), Vector::Constant(1, 0.5)};
  CHECK_THROWS_AS(verify_contraction(close, 100, 0.02), PreconditionRefused);
}

TEST_CASE("verify_contraction agrees with the prediction in the reference regime") {
  auto c = reference_config();
  c.seed = 1000;
  const auto report = verify_contraction(c, 60, 0.02, {1, 2, 5, 10});
  CHECK(report.separation == doctest::Approx(10.0));
  REQUIRE(report.checkpoints.size() == 4);
  // No update before the first posting, so t = 1 matches exactly.
  CHECK(report.checkpoints[0].empirical == report.checkpoints[0].predicted);
  CHECK(report.k_schedule.front() == 0);
  CHECK(report.k_schedule[1] == 4);
  CHECK(report.jensen_holds);
  CHECK(report.passed);
}
