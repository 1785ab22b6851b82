#include "zrp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace zrp {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void remove_mean(std::span<double> v) {
  double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

}  // namespace

CgResult conjugate_gradient(const LinearOperator& apply, std::span<const double> b,
                            std::span<double> x, const CgOptions& opt) {
  const std::size_t n = b.size();
  const int cap = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(10 * n + 1000);
  const bool precondition = !opt.inverse_diagonal.empty();
  std::vector<double> r(n), z(n), p(n), ap(n);

  auto residual = [&] {
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    if (opt.project_mean) remove_mean(r);
    return std::sqrt(opt.weight * dot(r, r));
  };

  if (opt.project_mean) remove_mean(x);
  double rnorm = residual();
  auto precond = [&] {
    for (std::size_t i = 0; i < n; ++i) z[i] = precondition ? opt.inverse_diagonal[i] * r[i] : r[i];
    if (opt.project_mean && precondition) remove_mean(z);
  };
  int it = 0;
  // Restart from the true residual if the recursive one undershoots.
  while (rnorm > opt.tol && it < cap) {
    precond();
    std::copy(z.begin(), z.end(), p.begin());
    double rz = dot(r, z);
    while (rnorm > opt.tol && it < cap) {
      apply(p, ap);
      double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      double a = rz / pap;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += a * p[i];
        r[i] -= a * ap[i];
      }
      if (opt.project_mean) remove_mean(r);
      ++it;
      rnorm = std::sqrt(opt.weight * dot(r, r));
      precond();
      double rz_new = dot(r, z);
      double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    double true_norm = residual();
    if (true_norm <= opt.tol || rnorm > opt.tol) {
      rnorm = true_norm;
      break;
    }
    rnorm = true_norm;
  }
  if (opt.project_mean) remove_mean(x);
  double final_residual = residual();
  return {it, final_residual, final_residual <= opt.tol};
}

}  // namespace zrp
