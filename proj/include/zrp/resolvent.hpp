#pragma once

// L_N G(x) = sum_y p_N(x,y) [G(y) - G(x)] and the resolvent equation
// lambda u - L_N u = f, whose solution for f = lambda G - div(A grad G) is
// the corrected test function G_N^lambda.

#include <json.hpp>

#include "zrp/environment.hpp"
#include "zrp/homogenization.hpp"
#include "zrp/lattice.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

GridFunction apply_LN(const Environment& env, const GridFunction& u);

struct ResolventOptions {
  int max_iterations = 0;  // 0 -> solver default
  bool jacobi = false;
};

struct ResolventSolution {
  GridFunction u;
  double lambda;
  GridFunction rhs;
  double residual_norm0;
  int iterations;

  nlohmann::json metadata(double tol) const;
};

// Throws ConvergenceError if ||lambda u - L_N u - rhs||_{0,N} > tol at the cap.
ResolventSolution solve_resolvent(const Environment& env, double lambda,
                                  const GridFunction& rhs, double tol,
                                  const ResolventOptions& options = {});

// Post-hoc check of the a priori bounds satisfied by every solution.
struct ResolventCertificate {
  double norm0;           // ||u||_{0,N}
  double norm0_bound;     // ||rhs||_{0,N} / lambda
  double energy;          // N^-d sum_{x,y} p_N(x,y) (u(y)-u(x))^2
  double energy_bound;    // ||rhs||_{0,N}^2 / lambda
  double sup;             // max |u|
  double sup_bound;       // max |rhs| / lambda
  double min_u, max_u;
  double min_rhs_over_lambda, max_rhs_over_lambda;

  bool holds(double slack = 1e-9) const;
};

ResolventCertificate certify(const Environment& env, const ResolventSolution& sol);

// rhs(x) = lambda G(x) - div(A grad G)(x) from the analytic derivatives.
GridFunction resolvent_rhs(const TestFunction& G, double lambda, const TorusGrid& grid,
                           const HomogenizedMatrix& A);

ResolventSolution corrected_test_function(const TestFunction& G, double lambda,
                                          const Environment& env,
                                          const HomogenizedMatrix& A, double tol);

}  // namespace zrp
