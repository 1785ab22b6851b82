#include "zrp/homogenization.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "text.hpp"
#include "zrp/errors.hpp"
#include "zrp/linalg.hpp"
#include "zrp/rng.hpp"

namespace zrp {

using nlohmann::json;

HomogenizedMatrix HomogenizedMatrix::isotropic(int dim, double a, double epsilon0) {
  HomogenizedMatrix m;
  m.dim = dim;
  for (int i = 0; i < dim; ++i) m.A[3 * i + i] = a;
  m.epsilon0 = epsilon0;
  m.provenance.method = "isotropic";
  return m;
}

double HomogenizedMatrix::quadratic_form(const Point& xi) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) s += xi[i] * A[3 * i + j] * xi[j];
  }
  return s;
}

double HomogenizedMatrix::max_eigenvalue() const {
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = 0.5 * (A[3 * i + j] + A[3 * j + i]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool HomogenizedMatrix::is_symmetric(double tol) const {
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < i; ++j) {
      if (std::abs(A[3 * i + j] - A[3 * j + i]) > tol) return false;
    }
  }
  return true;
}

bool HomogenizedMatrix::is_coercive(int random_vectors, std::uint64_t seed) const {
  auto check = [&](const Point& xi) {
    double n2 = 0.0;
    for (int i = 0; i < dim; ++i) n2 += xi[i] * xi[i];
    double q = quadratic_form(xi);
    const double slack = 1e-12 * n2;
    return q >= epsilon0 * n2 - slack && q <= n2 / epsilon0 + slack;
  };
  for (int i = 0; i < dim; ++i) {
    Point e{0.0, 0.0, 0.0};
    e[i] = 1.0;
    if (!check(e)) return false;
  }
  Rng rng(seed);
  for (int r = 0; r < random_vectors; ++r) {
    Point xi{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) xi[i] = 2.0 * rng.uniform() - 1.0;
    if (!check(xi)) return false;
  }
  return true;
}

json HomogenizedMatrix::to_json() const {
  json rows = json::array();
  for (int i = 0; i < dim; ++i) {
    json row = json::array();
    for (int j = 0; j < dim; ++j) row.push_back(A[3 * i + j]);
    rows.push_back(row);
  }
  return json{{"A", rows},
              {"epsilon0", epsilon0},
              {"method", provenance.method},
              {"N", provenance.N},
              {"seeds", provenance.seeds}};
}

HomogenizedMatrix HomogenizedMatrix::from_json(const json& j) {
  try {
    HomogenizedMatrix m;
    const auto& rows = j.at("A");
    m.dim = static_cast<int>(rows.size());
    if (m.dim < 1 || m.dim > 3) throw ConfigError("homogenized matrix must be 1x1 to 3x3");
    for (int i = 0; i < m.dim; ++i) {
      if (rows[i].size() != static_cast<std::size_t>(m.dim)) {
        throw ConfigError("homogenized matrix is not square");
      }
      for (int k = 0; k < m.dim; ++k) m.A[3 * i + k] = rows[i][k].get<double>();
    }
    m.epsilon0 = j.at("epsilon0").get<double>();
    m.provenance.method = j.value("method", "periodic-corrector");
    m.provenance.N = j.value("N", 0);
    m.provenance.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("homogenized matrix: ") + e.what());
  }
}

HomogenizedMatrix effective_matrix(const Environment& env, double tol) {
  const TorusGrid& grid = env.grid();
  const int d = grid.dim();
  const std::size_t n = grid.size();

  // -L u(x) = sum_y a_xy (u(x) - u(y)) on the unit lattice.
  LinearOperator neg_laplacian = [&](std::span<const double> u, std::span<double> out) {
    for (Site x = 0; x < n; ++x) {
      double s = 0.0;
      for (int k = 0; k < grid.directions(); ++k) {
        s += env.bond(x, k) * (u[x] - u[grid.neighbor(x, k)]);
      }
      out[x] = s;
    }
  };

  std::vector<std::vector<double>> chi(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
  int iterations = 0;
  for (int i = 0; i < d; ++i) {
    // Flux balance of a (e_i + grad chi_i): -L chi_i = a(x, x+e_i) - a(x-e_i, x).
    std::vector<double> b(n);
    double scale = 0.0;
    for (Site x = 0; x < n; ++x) {
      b[x] = env.conductance(x, i) - env.conductance(grid.neighbor(x, 2 * i + 1), i);
      scale += b[x] * b[x];
    }
    if (scale == 0.0) continue;
    CgOptions opt;
    opt.tol = tol * std::sqrt(scale);
    opt.project_mean = true;
    auto res = conjugate_gradient(neg_laplacian, b, chi[static_cast<std::size_t>(i)], opt);
    iterations += res.iterations;
    if (!res.converged) {
      throw ConvergenceError("corrector solve did not converge", res.residual, res.iterations);
    }
  }

  HomogenizedMatrix out;
  out.dim = d;
  out.epsilon0 = env.model().epsilon0();
  out.provenance.N = grid.scale();
  out.provenance.seeds = {env.seed()};
  out.provenance.iterations = iterations;
  for (int i = 0; i < d; ++i) {
    for (int k = i; k < d; ++k) {
      double s = 0.0;
      for (Site x = 0; x < n; ++x) {
        for (int j = 0; j < d; ++j) {
          Site y = grid.neighbor(x, 2 * j);
          const auto& ci = chi[static_cast<std::size_t>(i)];
          const auto& ck = chi[static_cast<std::size_t>(k)];
          double gi = (i == j ? 1.0 : 0.0) + ci[y] - ci[x];
          double gk = (k == j ? 1.0 : 0.0) + ck[y] - ck[x];
          s += env.conductance(x, j) * gi * gk;
        }
      }
      out.A[3 * i + k] = out.A[3 * k + i] = s / static_cast<double>(n);
    }
  }
  return out;
}

HomogenizedMatrix effective_matrix(const EnvironmentModel& model, const TorusGrid& grid,
                                   const std::vector<std::uint64_t>& seeds, double tol) {
  if (seeds.empty()) throw UsageError("need at least one environment seed");
  HomogenizedMatrix avg;
  avg.dim = grid.dim();
  avg.epsilon0 = model.epsilon0();
  avg.provenance.N = grid.scale();
  avg.provenance.seeds = seeds;
  for (auto s : seeds) {
    HomogenizedMatrix m = effective_matrix(sample_environment(model, grid, s), tol);
    for (std::size_t k = 0; k < avg.A.size(); ++k) avg.A[k] += m.A[k];
    avg.provenance.iterations += m.provenance.iterations;
  }
  for (double& v : avg.A) v /= static_cast<double>(seeds.size());
  return avg;
}

double harmonic_mean_oracle_1d(const Environment& env) {
  if (env.grid().dim() != 1) throw UsageError("harmonic mean oracle is one-dimensional");
  double s = 0.0;
  for (double a : env.conductances()) s += 1.0 / a;
  return static_cast<double>(env.conductances().size()) / s;
}

}  // namespace zrp
