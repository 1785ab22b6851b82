#pragma once

// Functionals of trajectories: empirical measures and fluctuation fields
// (plain and corrected), the Dynkin martingale of the corrected field with
// its quadratic variation, the Boltzmann-Gibbs statistic, the replacement
// statistic and additive functionals. All time integrals are exact over the
// piecewise-constant path.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zrp/dynamics.hpp"
#include "zrp/environment.hpp"
#include "zrp/homogenization.hpp"
#include "zrp/lattice.hpp"
#include "zrp/measures.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

struct FieldValues {
  double empirical = 0.0;              // N^-d sum eta G
  double corrected_empirical = 0.0;    // N^-d sum eta G_N^lambda
  double fluctuation = 0.0;            // N^-d/2 sum G (eta - rho)
  double corrected_fluctuation = 0.0;  // N^-d/2 sum G_N^lambda (eta - rho)
};

// Gl may be null, in which case the corrected entries are left at zero.
FieldValues evaluate_fields(const Configuration& eta, const GridFunction& G,
                            const GridFunction* Gl, double rho);

enum class FieldKind { empirical, corrected_empirical, fluctuation, corrected_fluctuation };
const char* to_string(FieldKind kind);

struct FieldSample {
  FieldKind kind;
  std::string test_function;
  std::vector<double> times;
  std::vector<double> values;
};

// All four kinds (two if Gl is null) at the given times in [0, horizon].
std::vector<FieldSample> sample_fields(const TrajectoryRecord& traj, const GridFunction& G,
                                       const GridFunction* Gl, double rho,
                                       std::span<const double> times,
                                       const std::string& test_function = "G");

enum class Normalization { density, fluctuation };

struct MartingaleTrack {
  Normalization normalization;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> M;
  std::vector<double> qv;
  std::vector<double> field_term;     // X_t - X_0
  std::vector<double> integral_term;  // int_0^t c sum g(eta) L_N G_N^lambda ds
};

// c = N^-d (density) or N^-d/2 (fluctuation);
// M_t = X_t - X_0 - int c sum_x g(eta_s(x)) L_N Gl(x) ds with X = c sum eta Gl,
// <M>_t = int c^2 sum_{x,y} g(eta_s(x)) p_N(x,y) (Gl(y) - Gl(x))^2 ds.
// Empty `times` samples only the horizon.
MartingaleTrack martingale_track(const TrajectoryRecord& traj, const GridFunction& Gl,
                                 const Environment& env, const RateFunction& g,
                                 Normalization normalization, double lambda,
                                 std::span<const double> times = {});

// Solves for G_N^lambda first.
MartingaleTrack martingale_track(const TrajectoryRecord& traj, const TestFunction& G,
                                 double lambda, const Environment& env,
                                 const HomogenizedMatrix& A, const RateFunction& g,
                                 Normalization normalization, double tol = 1e-10,
                                 std::span<const double> times = {});

// f(x, eta) depending on eta at x + support[k] and on the environment.
struct LocalObservable {
  std::string name;
  std::vector<Coords> support{{0, 0, 0}};
  double lipschitz = 1.0;
  std::function<double(const Environment&, Site, std::span<const std::int32_t>)> eval;

  // Known site-independent centering and density slope at the observable's
  // density, used instead of summation and finite differences.
  struct Projection {
    double centering;
    double slope;
  };
  std::optional<Projection> closed_form;

  int support_radius() const;
};

// eta(x) - rho.
LocalObservable density_deviation(double rho);
// g(eta(x)).
LocalObservable g_of_eta(const RateFunction& g);
// a_1(x) g(eta(x)), with a_1 the conductance of the bond from x along axis 0.
LocalObservable conductance_times_g(const RateFunction& g);

struct Centering {
  std::vector<double> per_site;  // E_{nu_rho}[f(x, .)]
  double slope;                  // d/drho of the site average
};

// Exact truncated product-measure sums; central difference with step h for
// the slope. Throws UsageError if the support radius exceeds N.
Centering centering(const LocalObservable& f, const Environment& env,
                    const FugacityTables& tables, double rho, double h = 1e-3);

struct AdditiveFunctional {
  double functional;  // int_0^t N^-d/2 sum G(x) (f(x, eta_s) - E f(x, .)) ds
  double comparator;  // slope * int_0^t Y_s(G) ds
  double slope;
  double difference() const { return functional - comparator; }
};

AdditiveFunctional additive_functional(const TrajectoryRecord& traj, const GridFunction& G,
                                       const LocalObservable& f, const Environment& env,
                                       double rho, const FugacityTables& tables);

// int_0^t N^-d/2 sum G(x) V_f(x, eta_s) ds, computed as additive_functional's
// difference.
double bg_statistic(const TrajectoryRecord& traj, const GridFunction& G,
                    const LocalObservable& f, const Environment& env, double rho,
                    const FugacityTables& tables);

// int_0^T N^-d sum_x |(2l+1)^-d sum_{|y|<=l} g(eta(x+y)) - phi(eta^l(x))| ds
// with l = floor(eps N). Throws UsageError if l = 0 or the box wraps.
double replacement_statistic(const TrajectoryRecord& traj, double eps, const RateFunction& g,
                             const PhiInterpolant& phi);

// CSV (trial_seed, kind, test_function, time, value).
void write_csv(const std::vector<FieldSample>& samples, std::uint64_t trial_seed,
               std::ostream& out, bool header = true);
// CSV (trial_seed, time, M, qv, field_term, integral_term).
void write_csv(const MartingaleTrack& track, std::ostream& out, bool header = true);

}  // namespace zrp
