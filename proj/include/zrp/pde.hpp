#pragma once

// d_t rho = div(A grad phi(rho)) on the periodic box [-1,1]^d, the linear
// semigroup exp(t c div(A grad)) on band-limited functions, and the weak
// formulation defect.

#include <functional>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "zrp/homogenization.hpp"
#include "zrp/lattice.hpp"
#include "zrp/measures.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

// Cell centres follow the torus convention -1 + (j+1) dx with dx = 1/M, so a
// PDE grid of resolution M is a TorusGrid of scale M.
struct DensityField {
  TorusGrid grid;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;
  std::vector<double> mass;  // dx^d sum rho per snapshot

  double dx() const { return 1.0 / grid.scale(); }
  GridFunction at(std::size_t k) const { return GridFunction(grid, snapshots.at(k)); }
  const std::vector<double>& final_state() const { return snapshots.back(); }
};

struct HydroOptions {
  double dt = 0.0;        // 0 -> half the CFL bound
  int record_every = 1;   // snapshot every this many steps; the final time is always kept
};

// Explicit conservative finite volumes: face flux A grad phi(rho) from
// centred differences of phi. Throws ConfigError if dt exceeds
// dx^2 / (2 d lambda_max(A) max phi') on [min rho0, max rho0].
DensityField solve_hydrodynamic(const std::function<double(const Point&)>& rho0,
                                const HomogenizedMatrix& A, const PhiInterpolant& phi,
                                double T, double dx, const HydroOptions& options = {});

double cfl_bound(const HomogenizedMatrix& A, double dx, double max_dphi);

// |int int {rho d_s G + phi(rho) div(A grad G)} + int rho0 G(0) - int rho(T) G(T)|
// by midpoint sums in space and the trapezoid rule over snapshots.
double weak_residual(const DensityField& rho, const SpaceTimeTestFunction& G,
                     const std::function<double(const Point&)>& rho0,
                     const HomogenizedMatrix& A, const PhiInterpolant& phi);

SpaceTimeTestFunction time_independent(const TestFunction& G);

// Mode k scaled by exp(-t c (pi k).A(pi k)). Throws UsageError if G carries
// no Fourier expansion.
TestFunction semigroup_apply(const TestFunction& G, double t, double c,
                             const HomogenizedMatrix& A);
FourierSeries semigroup_apply(const FourierSeries& G, double t, double c,
                              const HomogenizedMatrix& A);

// Rows (t, x1..xd, value) for every snapshot.
void write_csv(const DensityField& rho, std::ostream& out);
nlohmann::json metadata(const DensityField& rho);

}  // namespace zrp
