#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "collapse/gmm.hpp"

using namespace collapse;

namespace {

ComponentBank pm5_bank() {
  return ComponentBank({Vector::Constant(1, -5.0), Vector::Constant(1, 5.0)},
                       Matrix::Identity(1, 1));
}

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST_CASE("component density closed forms") {
  const auto bank = pm5_bank();
  const ComponentBank single({scalar(0.0)}, Matrix::Identity(1, 1));
  CHECK(component_density(scalar(0.0), 0, single) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-14));

  // exp(-50)/sqrt(2 pi), extended-precision reference.
  const double far = component_density(scalar(5.0), 0, bank);
  CHECK(far == doctest::Approx(7.694598626706419e-23).epsilon(1e-12));
  CHECK(log_component_density(scalar(5.0), 0, bank) ==
        doctest::Approx(-50.0 - 0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));

  CHECK(component_density(scalar(0.0), 0, bank) == component_density(scalar(0.0), 1, bank));
}

TEST_CASE("multivariate density matches the product of independent marginals") {
  Matrix cov(2, 2);
  cov << 4.0, 0.0, 0.0, 0.25;
  const ComponentBank bank({Vector::Zero(2), Vector::Constant(2, 3.0)}, cov);
  Vector x(2);
  x << 1.0, -0.5;
  const auto n1 = [](double v, double var) {
    return std::exp(-0.5 * v * v / var) / std::sqrt(2.0 * std::numbers::pi * var);
  };
  CHECK(bank.density(x, 0) == doctest::Approx(n1(1.0, 4.0) * n1(-0.5, 0.25)).epsilon(1e-13));
}

TEST_CASE("bank construction rejects bad covariance and coincident means") {
  Matrix not_pd(2, 2);
  not_pd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(ComponentBank({Vector::Zero(2)}, not_pd), InvalidArgument);
  Matrix asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  CHECK_THROWS_AS(ComponentBank({Vector::Zero(2)}, asym), InvalidArgument);
  CHECK_THROWS_AS(ComponentBank({scalar(1.0), scalar(1.0)}, Matrix::Identity(1, 1)),
                  InvalidArgument);
  CHECK_THROWS_AS(ComponentBank({}, Matrix::Identity(1, 1)), InvalidArgument);
  CHECK_THROWS_AS(ComponentBank({Vector::Zero(2)}, Matrix::Identity(1, 1)), InvalidArgument);
  CHECK(pm5_bank().separation() == doctest::Approx(10.0));
}

TEST_CASE("mixture density") {
  const auto bank = pm5_bank();
  const ComponentBank single({scalar(2.0)}, Matrix::Identity(1, 1));
  CHECK(mixture_density(scalar(0.7), MixtureWeights({1.0}), single) ==
        doctest::Approx(component_density(scalar(0.7), 0, single)));

  CHECK(mixture_density(scalar(0.0), MixtureWeights({0.5, 0.5}), bank) ==
        doctest::Approx(component_density(scalar(0.0), 0, bank)).epsilon(1e-14));

  // 0.3 N(5;-5,1) + 0.7 N(5;5,1), each term evaluated separately.
  const double expected = 0.3 * 7.694598626706419e-23 + 0.7 * 0.3989422804014327;
  CHECK(mixture_density(scalar(5.0), MixtureWeights({0.3, 0.7}), bank) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK(expected == doctest::Approx(0.2792595962810029).epsilon(1e-14));
}

TEST_CASE("mixture density integrates to one") {
  const auto bank = pm5_bank();
  const MixtureWeights w({0.3, 0.7});
  // Composite Simpson on [-15, 15].
  const int n = 6000;
  const double a = -15.0, h = 30.0 / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double f = mixture_density(scalar(a + i * h), w, bank);
    acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  CHECK(std::abs(acc * h / 3.0 - 1.0) < 1e-3);
}

TEST_CASE("log density and density agree") {
  const auto bank = pm5_bank();
  const MixtureWeights w({0.25, 0.75});
  for (double x = -30.0; x <= 30.0; x += 0.37) {
    const double p = mixture_density(scalar(x), w, bank);
    const double lp = log_mixture_density(scalar(x), w, bank);
    if (p > 1e-300) CHECK(std::exp(lp) == doctest::Approx(p).epsilon(1e-12));
    CHECK(std::isfinite(lp));
  }
}

TEST_CASE("sampling from degenerate and mixed weights") {
  auto bank = std::make_shared<const ComponentBank>(pm5_bank());
  Rng rng(11);
  const GmmModel left{bank, MixtureWeights({1.0, 0.0}), 1};
  const auto pts = sample(left, 20000, rng);
  double mean = 0.0;
  for (const auto& p : pts) mean += p[0];
  mean /= static_cast<double>(pts.size());
  CHECK(std::abs(mean + 5.0) < 0.05);

  CHECK_THROWS_AS(sample(left, 0, rng), InvalidArgument);

  // Fraction on the positive side: 0.7 +/- 3 sqrt(0.21 / 1e5).
  const GmmModel mixed{bank, MixtureWeights({0.3, 0.7}), 2};
  const std::size_t count = 100000;
  const auto many = sample(mixed, count, rng);
  const auto positive = std::count_if(many.begin(), many.end(), [](auto& p) { return p[0] > 0; });
  const double frac = static_cast<double>(positive) / count;
  CHECK(std::abs(frac - 0.7) <= 3.0 * std::sqrt(0.21 / count));
  // Nearest-mean classification recovers the weights.
  CHECK(std::abs(frac - 0.7) <= 0.01);

  Rng a(5), b(5);
  const auto s1 = sample(mixed, 10, a);
  const auto s2 = sample(mixed, 10, b);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s2[i]);
}

TEST_CASE("Dirichlet initial weights") {
  Rng rng(3);
  CHECK_THROWS_AS(init_weights(3, 2, 0.0, rng), InvalidArgument);
  CHECK_THROWS_AS(init_weights(3, 2, -1.0, rng), InvalidArgument);

  const auto ws = init_weights(50, 7, 0.3, rng);
  for (const auto& w : ws) {
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
    for (double v : w.values()) CHECK((v >= 0.0 && v <= 1.0));
  }

  Rng r1(99), r2(99);
  const auto first = init_weights(3, 2, 1.0, r1);
  const auto second = init_weights(3, 2, 1.0, r2);
  CHECK(first == second);

  // Dir(1,1): first coordinate is Uniform(0,1). One-sample KS at alpha 0.01.
  const std::size_t n = 4000;
  std::vector<double> u;
  Rng ks(2024);
  for (const auto& w : init_weights(n, 2, 1.0, ks)) u.push_back(w[0]);
  std::sort(u.begin(), u.end());
  double stat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    stat = std::max({stat, std::abs(u[i] - lo), std::abs(hi - u[i])});
  }
  CHECK(stat < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("well separated means respect the minimum gap") {
  Rng rng(4);
  const auto means = well_separated_means(11, 8.0, rng);
  REQUIRE(means.size() == 11);
  for (std::size_t b = 1; b < means.size(); ++b) {
    const double gap = means[b][0] - means[b - 1][0];
    CHECK(gap >= 8.0);
    CHECK(gap <= 12.0);
  }
  CHECK(ComponentBank(means, Matrix::Identity(1, 1)).separation() >= 8.0);
}
