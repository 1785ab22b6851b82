#include "zrp/resolvent.hpp"

#include <algorithm>
#include <cmath>

#include "zrp/errors.hpp"
#include "zrp/linalg.hpp"

namespace zrp {

GridFunction apply_LN(const Environment& env, const GridFunction& u) {
  const TorusGrid& grid = env.grid();
  if (!(u.grid() == grid)) throw UsageError("grid function and environment grids differ");
  GridFunction out(grid);
  for (Site x = 0; x < grid.size(); ++x) {
    double s = 0.0;
    for (int k = 0; k < grid.directions(); ++k) {
      s += env.jump_rate(x, k) * (u[grid.neighbor(x, k)] - u[x]);
    }
    out[x] = s;
  }
  return out;
}

nlohmann::json ResolventSolution::metadata(double tol) const {
  return nlohmann::json{{"lambda", lambda},
                        {"tol", tol},
                        {"iterations", iterations},
                        {"residual_norm0", residual_norm0},
                        {"N", u.grid().scale()},
                        {"d", u.grid().dim()}};
}

ResolventSolution solve_resolvent(const Environment& env, double lambda,
                                  const GridFunction& rhs, double tol,
                                  const ResolventOptions& options) {
  if (!(lambda > 0.0)) throw UsageError("resolvent parameter lambda must be positive");
  if (!(tol > 0.0)) throw UsageError("tolerance must be positive");
  const TorusGrid& grid = env.grid();
  if (!(rhs.grid() == grid)) throw UsageError("rhs and environment grids differ");
  const std::size_t n = grid.size();

  LinearOperator op = [&](std::span<const double> u, std::span<double> out) {
    for (Site x = 0; x < n; ++x) {
      double s = 0.0;
      for (int k = 0; k < grid.directions(); ++k) {
        s += env.jump_rate(x, k) * (u[x] - u[grid.neighbor(x, k)]);
      }
      out[x] = lambda * u[x] + s;
    }
  };
  std::vector<double> inv_diag;
  if (options.jacobi) {
    inv_diag.resize(n);
    for (Site x = 0; x < n; ++x) inv_diag[x] = 1.0 / (lambda + env.exit_rate(x));
  }
  CgOptions opt;
  opt.tol = tol;
  opt.max_iterations = options.max_iterations;
  opt.weight = std::pow(static_cast<double>(grid.scale()), -grid.dim());
  opt.inverse_diagonal = inv_diag;

  std::vector<double> u(n);
  for (Site x = 0; x < n; ++x) u[x] = rhs[x] / lambda;
  auto res = conjugate_gradient(op, rhs.values(), u, opt);
  if (!res.converged) {
    throw ConvergenceError("resolvent solve did not reach tolerance", res.residual, res.iterations);
  }
  return {GridFunction(grid, std::move(u)), lambda, rhs, res.residual, res.iterations};
}

bool ResolventCertificate::holds(double slack) const {
  auto le = [&](double a, double b) { return a <= b * (1.0 + slack) + slack; };
  return le(norm0, norm0_bound) && le(energy, energy_bound) && le(sup, sup_bound) &&
         min_u >= min_rhs_over_lambda - slack * (1.0 + std::abs(min_rhs_over_lambda)) &&
         max_u <= max_rhs_over_lambda + slack * (1.0 + std::abs(max_rhs_over_lambda));
}

ResolventCertificate certify(const Environment& env, const ResolventSolution& sol) {
  const TorusGrid& grid = env.grid();
  const double vol = std::pow(static_cast<double>(grid.scale()), -grid.dim());
  const auto rhs_norm = discrete_norms(sol.rhs).norm0;
  ResolventCertificate c{};
  c.norm0 = discrete_norms(sol.u).norm0;
  c.norm0_bound = rhs_norm / sol.lambda;
  double e = 0.0;
  for (Site x = 0; x < grid.size(); ++x) {
    for (int k = 0; k < grid.directions(); ++k) {
      double diff = sol.u[grid.neighbor(x, k)] - sol.u[x];
      e += env.jump_rate(x, k) * diff * diff;
    }
  }
  c.energy = vol * e;
  c.energy_bound = rhs_norm * rhs_norm / sol.lambda;
  c.sup = sup_norm(sol.u);
  c.sup_bound = sup_norm(sol.rhs) / sol.lambda;
  auto [umin, umax] = std::minmax_element(sol.u.values().begin(), sol.u.values().end());
  auto [fmin, fmax] = std::minmax_element(sol.rhs.values().begin(), sol.rhs.values().end());
  c.min_u = *umin;
  c.max_u = *umax;
  c.min_rhs_over_lambda = *fmin / sol.lambda;
  c.max_rhs_over_lambda = *fmax / sol.lambda;
  return c;
}

GridFunction resolvent_rhs(const TestFunction& G, double lambda, const TorusGrid& grid,
                           const HomogenizedMatrix& A) {
  if (!G.has_derivatives()) throw UsageError("corrected test function needs second derivatives of G");
  if (G.dim() != grid.dim() || A.dim != grid.dim()) throw UsageError("dimension mismatch");
  return GridFunction::sample(grid, [&](const Point& u) {
    return lambda * G.value(u) - G.div_a_grad(A.A, u);
  });
}

ResolventSolution corrected_test_function(const TestFunction& G, double lambda,
                                          const Environment& env,
                                          const HomogenizedMatrix& A, double tol) {
  return solve_resolvent(env, lambda, resolvent_rhs(G, lambda, env.grid(), A), tol);
}

}  // namespace zrp
