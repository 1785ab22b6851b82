#pragma once

#include <functional>
#include <span>

namespace zrp {

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct CgOptions {
  double tol = 1e-12;        // on sqrt(weight * sum r^2)
  int max_iterations = 0;    // 0 -> 10 n + 1000
  double weight = 1.0;
  std::span<const double> inverse_diagonal;  // Jacobi preconditioner if non-empty
  bool project_mean = false; // solve on the mean-zero subspace
};

struct CgResult {
  int iterations;
  double residual;  // recomputed from the final iterate
  bool converged;
};

// Conjugate gradients for a symmetric positive (semi)definite operator;
// x holds the initial guess on entry and the solution on exit.
CgResult conjugate_gradient(const LinearOperator& apply, std::span<const double> b,
                            std::span<double> x, const CgOptions& options);

}  // namespace zrp
