#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "zrp/errors.hpp"
#include "zrp/resolvent.hpp"
#include "zrp/rng.hpp"

using namespace zrp;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXd dense_solve(const Environment& env, double lambda, const GridFunction& f) {
  const TorusGrid& g = env.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) * lambda;
  Eigen::VectorXd b(n);
  for (Site x = 0; x < g.size(); ++x) {
    b(static_cast<Eigen::Index>(x)) = f[x];
    for (int k = 0; k < g.directions(); ++k) {
      auto i = static_cast<Eigen::Index>(x), j = static_cast<Eigen::Index>(g.neighbor(x, k));
      M(i, i) += env.jump_rate(x, k);
      M(i, j) -= env.jump_rate(x, k);
    }
  }
  return M.partialPivLu().solve(b);
}

}  // namespace

TEST_CASE("resolvent matches a dense LU solve") {
  for (int d = 1; d <= 2; ++d) {
    TorusGrid g(d, d == 1 ? 10 : 5);
    auto env = sample_environment(EnvironmentModel::iid_uniform(0.3), g, 21 + d);
    GridFunction f(g);
    Rng rng(d);
    for (Site x = 0; x < g.size(); ++x) f[x] = rng.uniform() - 0.5;
    for (double lambda : {0.5, 1.0, 2.0}) {
      auto sol = solve_resolvent(env, lambda, f, 1e-12);
      auto ref = dense_solve(env, lambda, f);
      for (Site x = 0; x < g.size(); ++x) {
        CHECK(std::abs(sol.u[x] - ref(static_cast<Eigen::Index>(x))) < 1e-10);
      }
      CHECK(certify(env, sol).holds());
      CHECK(solve_resolvent(env, lambda, f, 1e-12, {0, true}).iterations > 0);
    }
  }
}

TEST_CASE("single Fourier mode in a constant environment") {
  // L_N cos(pi u) = -2 N^2 a (1 - cos(pi/N)) cos(pi u) on the lattice.
  const int N = 32;
  const double a = 1.5, lambda = 1.0;
  TorusGrid g(1, N);
  auto env = sample_environment(EnvironmentModel::constant(a), g, 0);
  auto G = TestFunction::fourier(FourierSeries(1, {FourierMode{{1, 0, 0}, 1.0, 0.0}}));
  auto A = HomogenizedMatrix::isotropic(1, a, env.model().epsilon0());
  auto sol = corrected_test_function(G, lambda, env, A, 1e-12);
  const double mu = 2.0 * N * N * a * (1.0 - std::cos(pi / N));
  const double factor = (lambda + a * pi * pi) / (lambda + mu);
  for (Site x = 0; x < g.size(); ++x) {
    CHECK(sol.u[x] == doctest::Approx(factor * std::cos(pi * g.position(x)[0])).epsilon(1e-10));
  }
  auto Lu = apply_LN(env, sol.u);
  for (Site x = 0; x < g.size(); ++x) {
    CHECK(lambda * sol.u[x] - Lu[x] == doctest::Approx(sol.rhs[x]).epsilon(1e-8));
  }
}

TEST_CASE("constant right-hand side gives a constant solution") {
  TorusGrid g(2, 4);
  auto env = sample_environment(EnvironmentModel::checkerboard(1.0, 3.0), g, 0);
  auto sol = solve_resolvent(env, 2.0, GridFunction(g, 4.0), 1e-13);
  for (Site x = 0; x < g.size(); ++x) CHECK(sol.u[x] == doctest::Approx(2.0));
}

TEST_CASE("resolvent rejects bad input") {
  TorusGrid g(1, 4);
  auto env = sample_environment(EnvironmentModel::constant(1.0), g, 0);
  CHECK_THROWS_AS(solve_resolvent(env, 0.0, GridFunction(g), 1e-10), UsageError);
  CHECK_THROWS_AS(solve_resolvent(env, 1.0, GridFunction(TorusGrid(1, 5)), 1e-10), UsageError);
  auto wave = GridFunction::sample(g, [](const Point& u) { return u[0] * u[0] * u[0]; });
  CHECK_THROWS_AS(solve_resolvent(env, 1.0, wave, 1e-14, {1, false}), ConvergenceError);
  auto plain = TestFunction::from_callables(1, [](const Point&) { return 1.0; });
  CHECK_THROWS_AS(corrected_test_function(plain, 1.0, env, HomogenizedMatrix::isotropic(1, 1, 1), 1e-10),
                  UsageError);
}
