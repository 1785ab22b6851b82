#pragma once

// Effective diffusion matrix of a periodic conductance field from the
// discrete corrector (cell) problem.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "zrp/environment.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

struct HomogenizationProvenance {
  std::string method = "periodic-corrector";
  int N = 0;
  std::vector<std::uint64_t> seeds;
  int iterations = 0;
};

struct HomogenizedMatrix {
  int dim = 1;
  Matrix3 A{};
  double epsilon0 = 1.0;
  HomogenizationProvenance provenance;

  static HomogenizedMatrix isotropic(int dim, double a, double epsilon0);

  double operator()(int i, int j) const { return A[3 * i + j]; }
  double quadratic_form(const Point& xi) const;
  double max_eigenvalue() const;
  bool is_symmetric(double tol = 0.0) const;
  // epsilon0 |xi|^2 <= xi.A xi <= |xi|^2 / epsilon0 on canonical vectors
  // and `random_vectors` pseudo-random ones.
  bool is_coercive(int random_vectors = 64, std::uint64_t seed = 1) const;

  // {"A": [[...]], "epsilon0": ..., "method": ..., "N": ..., "seeds": [...]}
  nlohmann::json to_json() const;
  static HomogenizedMatrix from_json(const nlohmann::json& j);
};

// For each axis i solve the periodic corrector chi_i of the affine-plus-
// periodic field x_i + chi_i on the unit lattice, then
// A_ik = (2N)^-d sum_bonds a_b (e_i + grad chi_i)_b (e_k + grad chi_k)_b.
HomogenizedMatrix effective_matrix(const Environment& env, double tol = 1e-11);

// Average of effective_matrix over environments sampled with `seeds`.
HomogenizedMatrix effective_matrix(const EnvironmentModel& model, const TorusGrid& grid,
                                   const std::vector<std::uint64_t>& seeds, double tol = 1e-11);

// ((2N)^-1 sum_b 1/a_b)^-1, the effective conductance of the ring (d = 1).
double harmonic_mean_oracle_1d(const Environment& env);

}  // namespace zrp
