#pragma once

// Rate function g, the grand-canonical fugacity series Z, rho, phi, chi,
// samplers for nu_rho and for local-equilibrium product measures, and the
// canonical vs grand-canonical comparison.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "zrp/configuration.hpp"
#include "zrp/lattice.hpp"

namespace zrp {

class RateFunction {
 public:
  // g(n) = slope * n.
  static RateFunction linear(double slope = 1.0);
  // g(n) = values[n] for n <= K = values.size()-1, then g(K) * n / K.
  // c0 defaults to the smallest constant satisfying linear growth on the
  // table; an explicit c0 is validated.
  static RateFunction table(std::vector<double> values,
                            std::optional<double> c0 = std::nullopt,
                            bool require_non_decreasing = false);
  // {"kind": "table"|"linear", "values": [...], "c0": ..., "non_decreasing": bool}
  static RateFunction from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double operator()(std::int64_t n) const {
    if (n < static_cast<std::int64_t>(values_.size())) {
      return values_[static_cast<std::size_t>(n)];
    }
    return tail_slope_ * static_cast<double>(n);
  }

  double c0() const { return c0_; }
  bool non_decreasing() const { return non_decreasing_; }
  double lipschitz_constant() const { return lipschitz_; }
  bool is_linear() const { return linear_; }

 private:
  RateFunction() = default;
  void finish(std::optional<double> c0);

  std::vector<double> values_;
  double tail_slope_ = 1.0;
  double c0_ = 1.0;
  double lipschitz_ = 1.0;
  bool non_decreasing_ = true;
  bool linear_ = false;
};

struct FugacityPoint {
  double alpha;
  double Z;
  double rho;
  double phi;  // E[g(eta(0))]
  double chi;  // Var(eta(0))
  int terms;   // series terms kept
};

class FugacityTables {
 public:
  FugacityTables(RateFunction g, double tol = 1e-13, double alpha_max = 64.0);

  const RateFunction& rate() const { return g_; }
  double tol() const { return tol_; }
  double alpha_max() const { return alpha_max_; }
  double rho_max() const { return rho_max_; }
  int cap() const { return cap_; }

  // Throws RangeError for alpha outside [0, alpha_max].
  FugacityPoint at_fugacity(double alpha) const;
  // Monotone bisection; throws RangeError outside [0, rho_max].
  double alpha_of_density(double rho) const;
  FugacityPoint at_density(double rho) const { return at_fugacity(alpha_of_density(rho)); }

  double Z(double alpha) const { return at_fugacity(alpha).Z; }
  double rho(double alpha) const { return at_fugacity(alpha).rho; }
  double phi(double rho) const { return at_density(rho).phi; }
  double chi(double rho) const { return at_density(rho).chi; }
  // phi'(rho) = alpha / chi, with the limit g(1) at rho = 0.
  double dphi(double rho) const;

  // Truncated marginal pmf P(k) = alpha^k / (g(k)! Z), renormalized.
  std::vector<double> pmf(double alpha) const;

 private:
  RateFunction g_;
  double tol_;
  double alpha_max_;
  double rho_max_;
  int cap_;
};

FugacityTables build_fugacity_tables(const RateFunction& g, double tol,
                                     double alpha_max = 64.0);

// phi on [0, rho_hi] by monotone cubic Hermite interpolation of exact
// nodes; cheap enough for inner loops.
class PhiInterpolant {
 public:
  PhiInterpolant(const FugacityTables& tables, double rho_hi, int nodes = 2048);

  double operator()(double rho) const;
  double derivative(double rho) const;
  double rho_hi() const { return rho_hi_; }
  // Upper bound of phi' on [lo, hi].
  double max_derivative(double lo, double hi) const;

 private:
  const FugacityTables* tables_;
  double rho_hi_;
  double h_;
  std::vector<double> y_;
  std::vector<double> m_;
};

// Inverse-CDF sampler for one truncated marginal.
class MarginalSampler {
 public:
  MarginalSampler(const FugacityTables& tables, double rho);
  std::int32_t operator()(double u) const;

 private:
  std::vector<double> cdf_;
};

Configuration sample_equilibrium(const FugacityTables& tables, double rho,
                                 const TorusGrid& grid, std::uint64_t seed);

// Independent sites with E[eta(x)] = rho0(x).
Configuration sample_profile(const FugacityTables& tables,
                             const std::function<double(const Point&)>& rho0,
                             const TorusGrid& grid, std::uint64_t seed);

// A function of the occupancies of the first `support` sites of a box
// (row-major order).
struct BoxObservable {
  int support = 1;
  std::function<double(std::span<const std::int32_t>)> eval;
};

struct EnsembleComparison {
  double canonical;
  double grand;
  double gap;
  std::size_t configurations;
};

// Canonical expectation by exhaustive enumeration of {sum eta = n} on a box
// of side K in dimension `dim`, weights prod 1/g(eta(x))!; grand-canonical
// expectation at density n/K^dim from the truncated product measure.
EnsembleComparison canonical_vs_grand(const BoxObservable& h, int box_size,
                                      std::int64_t n_particles,
                                      const FugacityTables& tables, int dim = 1,
                                      std::size_t enumeration_cap = 20'000'000);

}  // namespace zrp
