#include <doctest.h>

#include <cmath>
#include <numbers>

#include "zrp/errors.hpp"
#include "zrp/pde.hpp"

using namespace zrp;

namespace {

constexpr double pi = std::numbers::pi;

double sup_error(const DensityField& f, const std::function<double(const Point&)>& exact) {
  double e = 0;
  for (Site x = 0; x < f.grid.size(); ++x) {
    e = std::max(e, std::abs(f.final_state()[x] - exact(f.grid.position(x))));
  }
  return e;
}

}  // namespace

TEST_CASE("constant profiles are stationary") {
  FugacityTables t(RateFunction::table({0, 1, 1.5, 2, 2.5}));
  PhiInterpolant phi(t, 3.0);
  auto A = HomogenizedMatrix::isotropic(2, 1.3, 0.5);
  auto f = solve_hydrodynamic([](const Point&) { return 0.8; }, A, phi, 0.05, 1.0 / 16);
  for (double v : f.final_state()) CHECK(v == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("linear case reproduces the heat kernel and conserves mass") {
  FugacityTables t(RateFunction::linear());
  PhiInterpolant phi(t, 2.0);
  const double a = 0.7, T = 0.1;
  auto A = HomogenizedMatrix::isotropic(1, a, 0.7);
  auto rho0 = [](const Point& u) { return 1.0 + 0.5 * std::cos(pi * u[0]); };
  auto exact = [&](const Point& u) {
    return 1.0 + 0.5 * std::exp(-a * pi * pi * T) * std::cos(pi * u[0]);
  };
  std::vector<double> errors;
  for (int cells : {32, 64, 128}) {
    auto f = solve_hydrodynamic(rho0, A, phi, T, 1.0 / cells, {0.0, 50});
    errors.push_back(sup_error(f, exact));
    for (double m : f.mass) CHECK(std::abs(m - f.mass[0]) <= 1e-12 * f.mass[0]);
    for (const auto& s : f.snapshots) {
      for (double v : s) {
        CHECK(v >= 0.5 - 1e-12);
        CHECK(v <= 1.5 + 1e-12);
      }
    }
  }
  CHECK(errors[1] < 0.5 * errors[0]);
  CHECK(errors[2] < 0.5 * errors[1]);
}

TEST_CASE("two-dimensional anisotropic mode decays at xi.A xi") {
  FugacityTables t(RateFunction::linear());
  PhiInterpolant phi(t, 2.0);
  HomogenizedMatrix A = HomogenizedMatrix::isotropic(2, 1.0, 0.5);
  A.A[1] = A.A[3] = 0.3;
  const double T = 0.02;
  auto rho0 = [](const Point& u) { return 1.0 + 0.4 * std::cos(pi * (u[0] + u[1])); };
  auto f = solve_hydrodynamic(rho0, A, phi, T, 1.0 / 64);
  auto exact = [&](const Point& u) {
    return 1.0 + 0.4 * std::exp(-T * pi * pi * 2.6) * std::cos(pi * (u[0] + u[1]));
  };
  CHECK(sup_error(f, exact) < 2e-3);
}

TEST_CASE("time step above the stability bound is refused") {
  FugacityTables t(RateFunction::linear());
  PhiInterpolant phi(t, 2.0);
  auto A = HomogenizedMatrix::isotropic(1, 1.0, 1.0);
  auto rho0 = [](const Point&) { return 1.0; };
  const double bound = cfl_bound(A, 1.0 / 32, 1.0);
  CHECK(bound == doctest::Approx(1.0 / (32.0 * 32.0 * 2.0)));
  CHECK_THROWS_AS(solve_hydrodynamic(rho0, A, phi, 0.01, 1.0 / 32, {2.0 * bound, 1}), ConfigError);
  CHECK_THROWS_AS(solve_hydrodynamic([](const Point&) { return -1.0; }, A, phi, 0.01, 1.0 / 32),
                  ConfigError);
}

TEST_CASE("weak residual discriminates and shrinks under refinement") {
  FugacityTables t(RateFunction::linear());
  PhiInterpolant phi(t, 3.0);
  auto A = HomogenizedMatrix::isotropic(1, 1.0, 1.0);
  auto G = TestFunction::fourier(FourierSeries(1, {FourierMode{{1, 0, 0}, 1.0, 0.0}}));
  auto Gt = time_independent(G);
  auto rho0 = [](const Point& u) { return 1.0 + 0.5 * std::cos(pi * u[0]); };

  auto flat = solve_hydrodynamic([](const Point&) { return 1.0; }, A, phi, 0.05, 1.0 / 32);
  CHECK(weak_residual(flat, Gt, [](const Point&) { return 1.0; }, A, phi) < 1e-12);

  auto f32 = solve_hydrodynamic(rho0, A, phi, 0.05, 1.0 / 32);
  auto f64 = solve_hydrodynamic(rho0, A, phi, 0.05, 1.0 / 64);
  double r32 = weak_residual(f32, Gt, rho0, A, phi);
  double r64 = weak_residual(f64, Gt, rho0, A, phi);
  CHECK(r64 < r32);

  DensityField wrong = f64;
  for (auto& s : wrong.snapshots) {
    for (std::size_t x = 0; x < s.size(); ++x) s[x] += 0.1 * std::cos(pi * wrong.grid.position(x)[0]);
  }
  CHECK(weak_residual(wrong, Gt, rho0, A, phi) > 100 * r64);
}

TEST_CASE("semigroup acts modewise") {
  auto A = HomogenizedMatrix::isotropic(1, 1.0, 1.0);
  FourierSeries G(1, {FourierMode{{1, 0, 0}, 1.0, 0.0}});
  auto S0 = semigroup_apply(G, 0.0, 1.0, A);
  CHECK(S0.modes()[0].cos_coef == 1.0);
  auto S1 = semigroup_apply(G, 1.0, 1.0, A);
  CHECK(S1.value({0.3, 0, 0}) == doctest::Approx(std::exp(-pi * pi) * std::cos(0.3 * pi)));
  auto plain = TestFunction::from_callables(1, [](const Point&) { return 0.0; });
  CHECK_THROWS_AS(semigroup_apply(plain, 1.0, 1.0, A), UsageError);
}
