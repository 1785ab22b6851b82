#include <doctest.h>

#include <cmath>
#include <numeric>

#include "zrp/errors.hpp"
#include "zrp/measures.hpp"

using namespace zrp;

namespace {

// Direct sums of alpha^k / g(k)! with long double accumulation.
struct Moments {
  long double Z = 0, rho = 0, phi = 0, second = 0;
};

Moments direct(const RateFunction& g, double alpha, int terms = 400) {
  Moments m;
  long double w = 1.0L;
  for (int k = 0; k < terms; ++k) {
    if (k > 0) w *= alpha / g(k);
    m.Z += w;
    m.rho += k * w;
    m.phi += g(k) * w;
    m.second += static_cast<long double>(k) * k * w;
  }
  m.rho /= m.Z;
  m.phi /= m.Z;
  m.second /= m.Z;
  return m;
}

}  // namespace

TEST_CASE("linear rates give Poisson marginals") {
  FugacityTables t(RateFunction::linear());
  for (double rho : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    auto p = t.at_density(rho);
    CHECK(p.alpha == doctest::Approx(rho).epsilon(1e-12));
    CHECK(p.phi == doctest::Approx(rho).epsilon(1e-12));
    CHECK(p.chi == doctest::Approx(rho).epsilon(1e-10));
    CHECK(p.Z == doctest::Approx(std::exp(rho)).epsilon(1e-12));
    CHECK(t.dphi(rho) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("series moments match direct summation for tabulated rates") {
  auto g = RateFunction::table({0, 1, 3, 2, 4, 5});
  FugacityTables t(g);
  for (double alpha : {0.3, 1.0, 2.5, 7.0}) {
    auto p = t.at_fugacity(alpha);
    auto m = direct(g, alpha);
    CHECK(p.Z == doctest::Approx(static_cast<double>(m.Z)).epsilon(1e-11));
    CHECK(p.rho == doctest::Approx(static_cast<double>(m.rho)).epsilon(1e-11));
    CHECK(p.phi == doctest::Approx(alpha).epsilon(1e-11));
    CHECK(p.chi == doctest::Approx(static_cast<double>(m.second - m.rho * m.rho)).epsilon(1e-9));
  }
}

TEST_CASE("density inversion and derivative of phi") {
  FugacityTables t(RateFunction::table({0, 1, 1.5, 2, 2.5, 3, 3.5, 4}));
  for (double rho : {0.2, 1.0, 2.0, 5.0}) {
    double a = t.alpha_of_density(rho);
    CHECK(t.rho(a) == doctest::Approx(rho).epsilon(1e-12));
    const double h = 1e-5;
    double fd = (t.phi(rho + h) - t.phi(rho - h)) / (2 * h);
    CHECK(t.dphi(rho) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK_THROWS_AS(t.alpha_of_density(-1.0), RangeError);
  CHECK_THROWS_AS(t.at_fugacity(1e6), RangeError);
}

TEST_CASE("rate table tail and validation") {
  auto g = RateFunction::table({0, 1, 2, 6});
  CHECK(g(3) == 6);
  CHECK(g(6) == doctest::Approx(12.0));
  CHECK(g.lipschitz_constant() == doctest::Approx(4.0));
  CHECK_THROWS_AS(RateFunction::table({1, 2}), ConfigError);
  CHECK_THROWS_AS(RateFunction::table({0, 0, 1}), ConfigError);
  CHECK_THROWS_AS(RateFunction::table({0, 2, 1}, std::nullopt, true), ConfigError);
  auto back = RateFunction::from_json(g.to_json());
  for (int n = 0; n < 10; ++n) CHECK(back(n) == g(n));
}

TEST_CASE("phi interpolant tracks the exact phi") {
  FugacityTables t(RateFunction::table({0, 1, 1.5, 2, 2.5, 3, 3.5, 4}));
  PhiInterpolant phi(t, 4.0);
  for (double rho : {0.0, 0.013, 0.77, 1.5, 3.99}) {
    CHECK(phi(rho) == doctest::Approx(t.phi(rho)).epsilon(1e-8));
  }
  CHECK(phi.max_derivative(0.5, 2.0) >= t.dphi(1.0));
}

TEST_CASE("equilibrium sampler has the right mean and variance") {
  FugacityTables t(RateFunction::table({0, 1, 1.5, 2, 2.5, 3, 3.5, 4}));
  TorusGrid grid(1, 20000);
  auto eta = sample_equilibrium(t, 1.3, grid, 3);
  double n = static_cast<double>(grid.size());
  double mean = static_cast<double>(eta.total()) / n;
  double ss = 0;
  for (Site x = 0; x < grid.size(); ++x) ss += (eta[x] - mean) * (eta[x] - mean);
  double chi = t.chi(1.3);
  CHECK(std::abs(mean - 1.3) < 4.0 * std::sqrt(chi / n));
  CHECK(ss / n == doctest::Approx(chi).epsilon(0.05));
  CHECK(sample_equilibrium(t, 1.3, grid, 3) == eta);
}

TEST_CASE("canonical expectation agrees with a hand enumeration") {
  // Box of 2 sites with 2 particles: (2,0), (1,1), (0,2) with weights
  // 1/g(2)!, 1, 1/g(2)!.
  auto g = RateFunction::table({0, 1, 3});
  FugacityTables t(g);
  BoxObservable h{1, [&](std::span<const std::int32_t> o) { return g(o[0]); }};
  auto c = canonical_vs_grand(h, 2, 2, t);
  const double w = 1.0 / 3.0;
  CHECK(c.canonical == doctest::Approx((w * 3.0 + 1.0 * 1.0) / (2 * w + 1.0)));
  CHECK(c.grand == doctest::Approx(t.phi(1.0)).epsilon(1e-10));
  CHECK(c.configurations == 3);
}

TEST_CASE("linear rates make the density observable ensemble independent") {
  FugacityTables t(RateFunction::linear());
  BoxObservable h{1, [](std::span<const std::int32_t> o) { return double(o[0]); }};
  for (int K = 2; K <= 5; ++K) CHECK(canonical_vs_grand(h, K, K, t).gap < 1e-12);
}
