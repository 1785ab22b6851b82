#include "zrp/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "text.hpp"
#include "zrp/errors.hpp"

namespace zrp {

double cfl_bound(const HomogenizedMatrix& A, double dx, double max_dphi) {
  double denom = 2.0 * A.dim * A.max_eigenvalue() * max_dphi;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return dx * dx / denom;
}

DensityField solve_hydrodynamic(const std::function<double(const Point&)>& rho0,
                                const HomogenizedMatrix& A, const PhiInterpolant& phi,
                                double T, double dx, const HydroOptions& options) {
  if (!(T >= 0.0)) throw ConfigError("final time must be nonnegative");
  if (!(dx > 0.0)) throw ConfigError("dx must be positive");
  const double cells = 1.0 / dx;
  const int M = static_cast<int>(std::lround(cells));
  if (M < 2 || std::abs(cells - M) > 1e-9 * cells) {
    throw ConfigError("dx must be 1/M for an integer M >= 2");
  }
  if (options.record_every < 1) throw ConfigError("record_every must be positive");
  DensityField out{TorusGrid(A.dim, M), 0.0, {}, {}, {}};
  const TorusGrid& grid = out.grid;
  const std::size_t n = grid.size();
  const int d = grid.dim();
  const double h = 1.0 / M;
  const double cell_volume = std::pow(h, d);

  std::vector<double> rho(n);
  for (Site x = 0; x < n; ++x) rho[x] = rho0(grid.position(x));
  auto [lo_it, hi_it] = std::minmax_element(rho.begin(), rho.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0) {
    throw ConfigError("initial profile must be finite and nonnegative");
  }
  if (hi > phi.rho_hi()) throw ConfigError("initial profile exceeds the tabulated density range");

  const double bound = cfl_bound(A, h, phi.max_derivative(lo, hi));
  double dt = options.dt > 0.0 ? options.dt : 0.5 * bound;
  if (dt > bound) {
    throw ConfigError("time step " + text::num(dt) + " violates the CFL bound " + text::num(bound));
  }
  long steps = 0;
  if (T > 0.0) {
    steps = static_cast<long>(std::ceil(T / dt - 1e-12));
    dt = T / static_cast<double>(steps);
  }
  out.dt = dt;

  auto record = [&](double t) {
    double m = 0.0;
    for (double v : rho) m += v;
    out.times.push_back(t);
    out.snapshots.push_back(rho);
    out.mass.push_back(m * cell_volume);
  };
  record(0.0);

  std::vector<double> p(n), flux(n * static_cast<std::size_t>(d));
  for (long s = 1; s <= steps; ++s) {
    for (Site x = 0; x < n; ++x) p[x] = phi(rho[x]);
    // flux[x*d+i]: A grad phi on the face between x and x + e_i.
    for (Site x = 0; x < n; ++x) {
      for (int i = 0; i < d; ++i) {
        Site xi = grid.neighbor(x, 2 * i);
        double f = A(i, i) * (p[xi] - p[x]) / h;
        for (int j = 0; j < d; ++j) {
          if (j == i || A(i, j) == 0.0) continue;
          double cx = p[grid.neighbor(x, 2 * j)] - p[grid.neighbor(x, 2 * j + 1)];
          double cy = p[grid.neighbor(xi, 2 * j)] - p[grid.neighbor(xi, 2 * j + 1)];
          f += A(i, j) * (cx + cy) / (4.0 * h);
        }
        flux[x * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = f;
      }
    }
    for (Site x = 0; x < n; ++x) {
      double div = 0.0;
      for (int i = 0; i < d; ++i) {
        Site xm = grid.neighbor(x, 2 * i + 1);
        div += flux[x * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] -
               flux[xm * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
      }
      rho[x] += dt * div / h;
    }
    if (s % options.record_every == 0 || s == steps) record(static_cast<double>(s) * dt);
  }
  return out;
}

double weak_residual(const DensityField& rho, const SpaceTimeTestFunction& G,
                     const std::function<double(const Point&)>& rho0,
                     const HomogenizedMatrix& A, const PhiInterpolant& phi) {
  const TorusGrid& grid = rho.grid;
  const std::size_t n = grid.size();
  const int d = grid.dim();
  const double vol = std::pow(rho.dx(), d);
  std::vector<Point> pos(n);
  for (Site x = 0; x < n; ++x) pos[x] = grid.position(x);

  auto integrand = [&](std::size_t k) {
    const double s = rho.times[k];
    const auto& r = rho.snapshots[k];
    double acc = 0.0;
    for (Site x = 0; x < n; ++x) {
      Matrix3 H = G.hessian(s, pos[x]);
      double lap = 0.0;
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) lap += A(i, j) * H[3 * i + j];
      }
      acc += r[x] * G.time_derivative(s, pos[x]) + phi(r[x]) * lap;
    }
    return acc * vol;
  };

  double lhs = 0.0;
  double prev = integrand(0);
  for (std::size_t k = 1; k < rho.times.size(); ++k) {
    double cur = integrand(k);
    lhs += 0.5 * (prev + cur) * (rho.times[k] - rho.times[k - 1]);
    prev = cur;
  }
  const double T = rho.times.back();
  const auto& last = rho.snapshots.back();
  double initial = 0.0, final = 0.0;
  for (Site x = 0; x < n; ++x) {
    initial += rho0(pos[x]) * G.value(0.0, pos[x]);
    final += last[x] * G.value(T, pos[x]);
  }
  return std::abs(lhs + initial * vol - final * vol);
}

SpaceTimeTestFunction time_independent(const TestFunction& G) {
  if (!G.has_derivatives()) throw UsageError("test function needs analytic derivatives");
  return {[G](double, const Point& u) { return G.value(u); },
          [](double, const Point&) { return 0.0; },
          [G](double, const Point& u) { return G.hessian(u); }};
}

FourierSeries semigroup_apply(const FourierSeries& G, double t, double c,
                              const HomogenizedMatrix& A) {
  if (G.dim() != A.dim) throw UsageError("dimension mismatch");
  std::vector<FourierMode> modes = G.modes();
  for (auto& m : modes) {
    Point xi{0.0, 0.0, 0.0};
    for (int i = 0; i < G.dim(); ++i) xi[i] = std::numbers::pi * m.k[i];
    double f = std::exp(-t * c * A.quadratic_form(xi));
    m.cos_coef *= f;
    m.sin_coef *= f;
  }
  return FourierSeries(G.dim(), std::move(modes));
}

TestFunction semigroup_apply(const TestFunction& G, double t, double c,
                             const HomogenizedMatrix& A) {
  if (!G.series()) throw UsageError("semigroup_apply needs a band-limited test function");
  return TestFunction::fourier(semigroup_apply(*G.series(), t, c, A));
}

void write_csv(const DensityField& rho, std::ostream& out) {
  const TorusGrid& grid = rho.grid;
  out << "t";
  for (int i = 0; i < grid.dim(); ++i) out << ",x" << (i + 1);
  out << ",value\n";
  for (std::size_t k = 0; k < rho.times.size(); ++k) {
    for (Site x = 0; x < grid.size(); ++x) {
      out << text::num(rho.times[k]);
      Point p = grid.position(x);
      for (int i = 0; i < grid.dim(); ++i) out << ',' << text::num(p[i]);
      out << ',' << text::num(rho.snapshots[k][x]) << '\n';
    }
  }
}

nlohmann::json metadata(const DensityField& rho) {
  return nlohmann::json{{"d", rho.grid.dim()},
                        {"dx", rho.dx()},
                        {"dt", rho.dt},
                        {"snapshots", rho.times.size()},
                        {"T", rho.times.empty() ? 0.0 : rho.times.back()},
                        {"mass", rho.mass}};
}

}  // namespace zrp
