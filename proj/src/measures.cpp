#include "zrp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "text.hpp"
#include "zrp/environment.hpp"
#include "zrp/errors.hpp"
#include "zrp/rng.hpp"

namespace zrp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// RateFunction

RateFunction RateFunction::linear(double slope) {
  if (!(slope > 0.0)) throw ConfigError("linear rate slope must be positive");
  RateFunction g;
  g.values_ = {0.0, slope};
  g.tail_slope_ = slope;
  g.linear_ = true;
  g.finish(std::max(slope, 1.0 / slope));
  return g;
}

RateFunction RateFunction::table(std::vector<double> values, std::optional<double> c0,
                                 bool require_non_decreasing) {
  if (values.size() < 2) throw ConfigError("rate table needs g(0) and g(1) at least");
  if (values.front() != 0.0) throw ConfigError("rate table must have g(0) = 0");
  for (std::size_t n = 1; n < values.size(); ++n) {
    if (!(values[n] > 0.0) || !std::isfinite(values[n])) {
      throw ConfigError("rate table entries must be positive for n >= 1");
    }
  }
  RateFunction g;
  g.tail_slope_ = values.back() / static_cast<double>(values.size() - 1);
  g.values_ = std::move(values);
  g.finish(c0);
  if (require_non_decreasing && !g.non_decreasing_) {
    throw ConfigError("rate table declared non-decreasing but decreases");
  }
  return g;
}

void RateFunction::finish(std::optional<double> c0) {
  double need = 1.0;
  non_decreasing_ = true;
  lipschitz_ = tail_slope_;
  for (std::size_t n = 1; n < values_.size(); ++n) {
    double ratio = values_[n] / static_cast<double>(n);
    need = std::max({need, ratio, 1.0 / ratio});
    double step = values_[n] - values_[n - 1];
    if (step < 0.0) non_decreasing_ = false;
    lipschitz_ = std::max(lipschitz_, std::abs(step));
  }
  // The proportional tail keeps g(n)/n = tail_slope_ beyond the table.
  need = std::max({need, tail_slope_, 1.0 / tail_slope_});
  if (c0) {
    if (*c0 < need * (1.0 - 1e-12)) {
      throw ConfigError("declared c0 = " + text::num(*c0) +
                        " violates linear growth (needs >= " + text::num(need) + ")");
    }
    c0_ = *c0;
  } else {
    c0_ = need;
  }
}

RateFunction RateFunction::from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    std::optional<double> c0;
    if (j.contains("c0")) c0 = j.at("c0").get<double>();
    bool nd = j.value("non_decreasing", false);
    if (kind == "linear") {
      RateFunction g = linear(j.value("slope", 1.0));
      if (c0) g.finish(c0);
      return g;
    }
    if (kind == "table") {
      return table(j.at("values").get<std::vector<double>>(), c0, nd);
    }
    throw ConfigError("unknown rate function kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("rate function: ") + e.what());
  }
}

json RateFunction::to_json() const {
  if (linear_) {
    return json{{"kind", "linear"}, {"slope", tail_slope_}, {"c0", c0_},
                {"non_decreasing", true}};
  }
  return json{{"kind", "table"}, {"values", values_}, {"c0", c0_},
              {"non_decreasing", non_decreasing_}};
}

// ---------------------------------------------------------------------------
// FugacityTables

namespace {

constexpr int kMaxTerms = 200000;

}  // namespace

FugacityTables::FugacityTables(RateFunction g, double tol, double alpha_max)
    : g_(std::move(g)), tol_(tol), alpha_max_(alpha_max), rho_max_(0.0), cap_(0) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(alpha_max > 0.0)) throw ConfigError("alpha_max must be positive");
  while (true) {
    try {
      FugacityPoint top = at_fugacity(alpha_max_);
      rho_max_ = top.rho;
      cap_ = top.terms;
      break;
    } catch (const RangeError&) {
      alpha_max_ *= 0.5;
      if (alpha_max_ < 1e-6) throw;
    }
  }
}

FugacityPoint FugacityTables::at_fugacity(double alpha) const {
  if (!(alpha >= 0.0) || alpha > alpha_max_) {
    throw RangeError("fugacity " + text::num(alpha) + " outside [0, " +
                     text::num(alpha_max_) + "]");
  }
  FugacityPoint p{alpha, 1.0, 0.0, 0.0, 0.0, 1};
  if (alpha == 0.0) return p;
  const double c0 = g_.c0();
  double w = 1.0;
  double Z = 1.0, m1 = 0.0, m2 = 0.0, mg = 0.0;
  int k = 0;
  while (true) {
    ++k;
    if (k > kMaxTerms) throw RangeError("fugacity series did not truncate");
    double gk = g_(k);
    w *= alpha / gk;
    double kd = k;
    Z += w;
    m1 += kd * w;
    m2 += kd * kd * w;
    mg += gk * w;
    if (!std::isfinite(Z) || !std::isfinite(m2)) {
      throw RangeError("fugacity series overflows at alpha = " + text::num(alpha));
    }
    // For j > k, w_j <= w_k r^{j-k} with r = alpha c0 / (k+1) by linear growth;
    // bound the tail of the second moment.
    double r = alpha * c0 / (kd + 1.0);
    if (r < 0.5) {
      double tail = w * (kd + 1.0) * (kd + 1.0) * r * (1.0 + r) / std::pow(1.0 - r, 3);
      if (tail < tol_ * Z) break;
    }
  }
  p.Z = Z;
  p.rho = m1 / Z;
  p.phi = mg / Z;
  p.chi = std::max(0.0, m2 / Z - p.rho * p.rho);
  p.terms = k + 1;
  return p;
}

double FugacityTables::alpha_of_density(double rho) const {
  if (!(rho >= 0.0) || rho > rho_max_) {
    throw RangeError("density " + text::num(rho) + " outside [0, " + text::num(rho_max_) + "]");
  }
  if (rho == 0.0) return 0.0;
  double lo = 0.0, hi = alpha_max_;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (at_fugacity(mid).rho < rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double FugacityTables::dphi(double rho) const {
  if (rho == 0.0) return g_(1);
  FugacityPoint p = at_density(rho);
  return p.alpha / p.chi;
}

std::vector<double> FugacityTables::pmf(double alpha) const {
  FugacityPoint p = at_fugacity(alpha);
  std::vector<double> out(static_cast<std::size_t>(p.terms));
  double w = 1.0;
  out[0] = 1.0;
  double s = 1.0;
  for (int k = 1; k < p.terms; ++k) {
    w *= alpha / g_(k);
    out[static_cast<std::size_t>(k)] = w;
    s += w;
  }
  for (double& v : out) v /= s;
  return out;
}

FugacityTables build_fugacity_tables(const RateFunction& g, double tol, double alpha_max) {
  return FugacityTables(g, tol, alpha_max);
}

// ---------------------------------------------------------------------------
// PhiInterpolant

PhiInterpolant::PhiInterpolant(const FugacityTables& tables, double rho_hi, int nodes)
    : tables_(&tables), rho_hi_(rho_hi) {
  if (!(rho_hi > 0.0) || rho_hi > tables.rho_max()) {
    throw RangeError("interpolation range exceeds the fugacity tables");
  }
  if (nodes < 2) throw UsageError("need at least two interpolation nodes");
  h_ = rho_hi / (nodes - 1);
  y_.resize(static_cast<std::size_t>(nodes));
  m_.resize(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    double rho = i == nodes - 1 ? rho_hi : i * h_;
    FugacityPoint p = tables.at_density(rho);
    y_[static_cast<std::size_t>(i)] = p.phi;
    m_[static_cast<std::size_t>(i)] = rho == 0.0 ? tables.rate()(1) : p.alpha / p.chi;
  }
}

double PhiInterpolant::operator()(double rho) const {
  if (rho > rho_hi_ || rho < 0.0) return tables_->phi(rho);
  double s = rho / h_;
  auto i = std::min(static_cast<std::size_t>(s), y_.size() - 2);
  double t = s - static_cast<double>(i);
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h_ * m_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h_ * m_[i + 1];
}

double PhiInterpolant::derivative(double rho) const {
  if (rho > rho_hi_ || rho < 0.0) return tables_->dphi(rho);
  double s = rho / h_;
  auto i = std::min(static_cast<std::size_t>(s), y_.size() - 2);
  double t = s - static_cast<double>(i);
  double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (-6 * t2 + 6 * t) * y_[i + 1]) / h_ +
         (3 * t2 - 4 * t + 1) * m_[i] + (3 * t2 - 2 * t) * m_[i + 1];
}

double PhiInterpolant::max_derivative(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::max(hi, lo);
  double best = 0.0;
  const int samples = 8 * static_cast<int>(std::ceil((hi - lo) / h_) + 1);
  for (int i = 0; i <= samples; ++i) {
    best = std::max(best, derivative(lo + (hi - lo) * i / samples));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Samplers

MarginalSampler::MarginalSampler(const FugacityTables& tables, double rho) {
  auto p = tables.pmf(tables.alpha_of_density(rho));
  cdf_.resize(p.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    cdf_[k] = acc;
  }
}

std::int32_t MarginalSampler::operator()(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u * cdf_.back());
  if (it == cdf_.end()) --it;
  return static_cast<std::int32_t>(it - cdf_.begin());
}

Configuration sample_equilibrium(const FugacityTables& tables, double rho,
                                 const TorusGrid& grid, std::uint64_t seed) {
  MarginalSampler draw(tables, rho);
  Rng rng(derive_seed({seed, 0x65716cULL}));
  std::vector<std::int32_t> occ(grid.size());
  for (auto& n : occ) n = draw(rng.uniform());
  return Configuration(grid, std::move(occ));
}

Configuration sample_profile(const FugacityTables& tables,
                             const std::function<double(const Point&)>& rho0,
                             const TorusGrid& grid, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x70726fULL}));
  std::map<double, MarginalSampler> cache;
  std::vector<std::int32_t> occ(grid.size());
  for (Site x = 0; x < grid.size(); ++x) {
    double rho = rho0(grid.position(x));
    if (!std::isfinite(rho) || rho < 0.0 || rho > tables.rho_max()) {
      throw ConfigError("profile value " + text::num(rho) + " outside the table range");
    }
    auto it = cache.find(rho);
    if (it == cache.end()) it = cache.emplace(rho, MarginalSampler(tables, rho)).first;
    occ[x] = it->second(rng.uniform());
  }
  return Configuration(grid, std::move(occ));
}

// ---------------------------------------------------------------------------
// Equivalence of ensembles

namespace {

double binomial(double n, double k) {
  return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
}

}  // namespace

EnsembleComparison canonical_vs_grand(const BoxObservable& h, int box_size,
                                      std::int64_t n_particles,
                                      const FugacityTables& tables, int dim,
                                      std::size_t enumeration_cap) {
  if (box_size < 1 || dim < 1 || dim > 3 || n_particles < 0) {
    throw UsageError("invalid box for ensemble comparison");
  }
  std::size_t sites = 1;
  for (int i = 0; i < dim; ++i) sites *= static_cast<std::size_t>(box_size);
  if (h.support < 1 || static_cast<std::size_t>(h.support) > sites) {
    throw UsageError("observable support exceeds the box");
  }
  const double count = binomial(static_cast<double>(n_particles + static_cast<std::int64_t>(sites) - 1),
                                static_cast<double>(sites - 1));
  if (count > static_cast<double>(enumeration_cap)) {
    throw ResourceError("canonical enumeration needs ~" + text::num(count) +
                        " configurations, cap is " + std::to_string(enumeration_cap));
  }
  const RateFunction& g = tables.rate();
  std::vector<double> inv_fact(static_cast<std::size_t>(n_particles) + 1, 1.0);
  for (std::int64_t k = 1; k <= n_particles; ++k) {
    inv_fact[static_cast<std::size_t>(k)] = inv_fact[static_cast<std::size_t>(k - 1)] / g(k);
  }

  std::vector<std::int32_t> eta(sites, 0);
  double sum_w = 0.0, sum_wh = 0.0;
  std::size_t visited = 0;
  auto support = std::span<const std::int32_t>(eta.data(), static_cast<std::size_t>(h.support));
  // Fill sites left to right; the last site takes the remainder.
  auto recurse = [&](auto&& self, std::size_t i, std::int64_t left, double w) -> void {
    if (i + 1 == sites) {
      eta[i] = static_cast<std::int32_t>(left);
      double wt = w * inv_fact[static_cast<std::size_t>(left)];
      sum_w += wt;
      sum_wh += wt * h.eval(support);
      ++visited;
      return;
    }
    for (std::int64_t k = 0; k <= left; ++k) {
      eta[i] = static_cast<std::int32_t>(k);
      self(self, i + 1, left - k, w * inv_fact[static_cast<std::size_t>(k)]);
    }
  };
  recurse(recurse, 0, n_particles, 1.0);
  const double canonical = sum_wh / sum_w;

  const double rho = static_cast<double>(n_particles) / static_cast<double>(sites);
  auto p = tables.pmf(tables.alpha_of_density(rho));
  const double tuples = std::pow(static_cast<double>(p.size()), h.support);
  if (tuples > static_cast<double>(enumeration_cap)) {
    throw ResourceError("grand-canonical enumeration exceeds the cap");
  }
  std::vector<std::int32_t> local(static_cast<std::size_t>(h.support), 0);
  double grand = 0.0;
  auto product = [&](auto&& self, std::size_t i, double w) -> void {
    if (i == local.size()) {
      grand += w * h.eval(local);
      return;
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      local[i] = static_cast<std::int32_t>(k);
      self(self, i + 1, w * p[k]);
    }
  };
  product(product, 0, 1.0);
  return {canonical, grand, std::abs(canonical - grand), visited};
}

}  // namespace zrp
