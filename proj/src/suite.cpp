// Module invariant audits run by `zrp suite`.

#include <Eigen/Dense>

#include <algorithm>
#include <numbers>

#include "experiments.hpp"
#include "text.hpp"
#include "zrp/dynamics.hpp"
#include "zrp/errors.hpp"
#include "zrp/fields.hpp"
#include "zrp/homogenization.hpp"
#include "zrp/pde.hpp"
#include "zrp/resolvent.hpp"
#include "zrp/rng.hpp"

namespace zrp {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

struct NamedRate {
  std::string name;
  RateFunction g;
};

std::vector<NamedRate> suite_rates(const json& raw) {
  std::vector<NamedRate> out;
  if (raw.contains("rates")) {
    for (const auto& [name, spec] : raw.at("rates").items()) {
      out.push_back({name, RateFunction::from_json(spec)});
    }
    return out;
  }
  out.push_back({"linear", RateFunction::linear()});
  out.push_back({"concave", RateFunction::table({0, 1, 1.5, 2, 2.5, 3, 3.5, 4})});
  out.push_back({"non_monotone", RateFunction::table({0, 1, 3, 2, 4, 5})});
  return out;
}

std::vector<std::pair<std::string, EnvironmentModel>> suite_environments() {
  return {{"constant", EnvironmentModel::constant(1.0)},
          {"iid_uniform", EnvironmentModel::iid_uniform(0.25)},
          {"iid_two_point", EnvironmentModel::iid_two_point(1.0, 2.0, 0.5)},
          {"checkerboard", EnvironmentModel::checkerboard(1.0, 2.0)}};
}

bool wanted(const json& raw, const std::string& id) {
  if (!raw.contains("criteria")) return true;
  for (const auto& c : raw.at("criteria")) {
    if (c.get<std::string>() == id) return true;
  }
  return false;
}

std::uint64_t stream(const ExperimentConfig& c, std::uint64_t criterion, std::uint64_t k) {
  return derive_seed({c.seed, criterion, k});
}

void fugacity_identity(const RunContext& ctx, ExperimentReport& report) {
  for (const auto& [name, g] : suite_rates(ctx.config.raw)) {
    FugacityTables tables(g);
    double worst = 0.0;
    for (double rho : {0.2, 0.5, 1.0, 2.0}) {
      FugacityPoint p = tables.at_density(rho);
      worst = std::max(worst, std::abs(p.phi - p.alpha));
      report.rows.push_back({0, 0, -1, "phi_minus_alpha_" + name + "_rho" + text::num(rho),
                             p.phi - p.alpha});
    }
    report.add("1", "fugacity_identity_" + name, worst, 0.0, 1e-8, Comparison::abs_le);
  }
}

void detailed_balance(const RunContext& ctx, ExperimentReport& report) {
  const int instances = ctx.config.raw.value("balance_instances", 1000);
  const auto rates = suite_rates(ctx.config.raw);
  const auto envs = suite_environments();
  for (std::size_t r = 0; r < rates.size(); ++r) {
    FugacityTables tables(rates[r].g);
    for (std::size_t e = 0; e < envs.size(); ++e) {
      const std::uint64_t s = stream(ctx.config, 2, r * envs.size() + e);
      TorusGrid grid(2, 4);
      Environment env = sample_environment(envs[e].second, grid, s);
      Rng rng(s);
      double worst = 0.0;
      for (int i = 0; i < instances; ++i) {
        Configuration eta(grid);
        for (Site x = 0; x < grid.size(); ++x) {
          eta.set(x, static_cast<std::int32_t>(rng.bits() % 9));
        }
        Site x = rng.bits() % grid.size();
        int dir = static_cast<int>(rng.bits() % static_cast<std::uint64_t>(grid.directions()));
        if (eta[x] == 0) eta.set(x, 1);
        const double rho = std::array{0.5, 1.0, 2.0}[rng.bits() % 3];
        worst = std::max(worst, std::abs(reversibility_residual(eta, x, dir, tables, env, rho)));
      }
      report.add("2", "detailed_balance_" + rates[r].name + "_" + envs[e].first, worst, 0.0,
                 1e-12, Comparison::abs_le);
    }
  }
}

GridFunction dense_resolvent(const Environment& env, double lambda, const GridFunction& rhs) {
  const TorusGrid& grid = env.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (Site x = 0; x < grid.size(); ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    M(i, i) += lambda;
    b(i) = rhs[x];
    for (int k = 0; k < grid.directions(); ++k) {
      const double p = env.jump_rate(x, k);
      M(i, i) += p;
      M(i, static_cast<Eigen::Index>(grid.neighbor(x, k))) -= p;
    }
  }
  Eigen::VectorXd u = M.ldlt().solve(b);
  GridFunction out(grid);
  for (Site x = 0; x < grid.size(); ++x) out[x] = u(static_cast<Eigen::Index>(x));
  return out;
}

void resolvent_certificates(const RunContext& ctx, ExperimentReport& report) {
  const int instances = ctx.config.raw.value("resolvent_instances", 100);
  const auto envs = suite_environments();
  struct Outcome {
    double l2, energy, sup, max_principle, dense;
  };
  std::function<Outcome(std::size_t)> run = [&](std::size_t k) {
    const std::uint64_t s = stream(ctx.config, 3, k);
    Rng rng(s);
    const int d = 1 + static_cast<int>(k % 2);
    const int N = d == 1 ? std::array{4, 8, 16, 32}[rng.bits() % 4]
                         : std::array{3, 4, 6, 8}[rng.bits() % 4];
    const double lambda = std::array{0.5, 1.0, 2.0}[k % 3];
    TorusGrid grid(d, N);
    Environment env = sample_environment(envs[(k / 2) % envs.size()].second, grid, s);
    GridFunction rhs(grid);
    for (Site x = 0; x < grid.size(); ++x) rhs[x] = 2.0 * rng.uniform() - 1.0;
    ResolventSolution sol = solve_resolvent(env, lambda, rhs, 1e-12);
    ResolventCertificate c = certify(env, sol);
    GridFunction ref = dense_resolvent(env, lambda, rhs);
    double diff = 0.0;
    for (Site x = 0; x < grid.size(); ++x) diff = std::max(diff, std::abs(sol.u[x] - ref[x]));
    double violation = std::max({0.0, c.min_rhs_over_lambda - c.min_u,
                                 c.max_u - c.max_rhs_over_lambda});
    return Outcome{c.norm0 / c.norm0_bound, c.energy / c.energy_bound, c.sup / c.sup_bound,
                   violation, diff};
  };
  auto out = parallel_map(static_cast<std::size_t>(instances), ctx.workers, run);
  Outcome worst{0, 0, 0, 0, 0};
  for (std::size_t k = 0; k < out.size(); ++k) {
    worst.l2 = std::max(worst.l2, out[k].l2);
    worst.energy = std::max(worst.energy, out[k].energy);
    worst.sup = std::max(worst.sup, out[k].sup);
    worst.max_principle = std::max(worst.max_principle, out[k].max_principle);
    worst.dense = std::max(worst.dense, out[k].dense);
    report.rows.push_back({0, stream(ctx.config, 3, k), static_cast<long>(k), "dense_sup_diff",
                           out[k].dense});
  }
  report.add("3", "l2_bound_ratio", worst.l2, 1.0, 1e-9, Comparison::le);
  report.add("3", "energy_bound_ratio", worst.energy, 1.0, 1e-9, Comparison::le);
  report.add("3", "sup_bound_ratio", worst.sup, 1.0, 1e-9, Comparison::le);
  report.add("3", "maximum_principle_violation", worst.max_principle, 0.0, 1e-9, Comparison::le);
  report.add("3", "dense_solve_sup_diff", worst.dense, 0.0, 1e-10, Comparison::abs_le);
}

void corrected_convergence(const RunContext& ctx, ExperimentReport& report) {
  const json& raw = ctx.config.raw;
  const auto Ns = raw.value("corrected_N", std::vector<int>{16, 32, 64, 128});
  const int seeds = raw.value("corrected_seeds", 5);
  const double lambda = ctx.config.lambda;
  const TestFunction G = TestFunction::fourier(FourierSeries(
      1, {FourierMode{{0, 0, 0}, 1.0, 0.0}, FourierMode{{1, 0, 0}, 0.5, 0.0}}));
  const EnvironmentModel model = environment_from(raw, EnvironmentModel::iid_two_point(1.0, 2.0, 0.5));
  const std::size_t S = static_cast<std::size_t>(seeds);
  std::function<double(std::size_t)> run = [&](std::size_t k) {
    const int N = Ns[k / S];
    TorusGrid grid(1, N);
    Environment env = sample_environment(model, grid, stream(ctx.config, 5, k));
    HomogenizedMatrix A = effective_matrix(env);
    GridFunction u = corrected_test_function(G, lambda, env, A, 1e-10).u;
    GridFunction Gg = G.on_grid(grid);
    for (Site x = 0; x < grid.size(); ++x) u[x] -= Gg[x];
    return discrete_norms(u).norm0;
  };
  auto errs = parallel_map(Ns.size() * S, ctx.workers, run);
  std::vector<double> mean(Ns.size(), 0.0);
  for (std::size_t k = 0; k < errs.size(); ++k) {
    mean[k / S] += errs[k] / seeds;
    report.rows.push_back({Ns[k / S], stream(ctx.config, 5, k), static_cast<long>(k % S),
                           "corrected_error", errs[k]});
  }
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    report.rows.push_back({Ns[i], 0, -1, "corrected_error_mean", mean[i]});
    if (i > 0) {
      report.add("5", tag("corrected_error_decreasing", Ns[i]), mean[i], mean[i - 1], 0.0,
                 Comparison::lt);
    }
  }
}

void pde_checks(const RunContext&, ExperimentReport& report) {
  const double a = 1.0, T = 0.1;
  const HomogenizedMatrix A = HomogenizedMatrix::isotropic(1, a, 1.0);
  FugacityTables tables(RateFunction::linear());
  PhiInterpolant phi(tables, 2.0);
  const auto rho0 = [](const Point& u) { return 1.0 + 0.5 * std::cos(pi * u[0]); };
  const auto exact = [&](double t, const Point& u) {
    return 1.0 + 0.5 * std::exp(-a * pi * pi * t) * std::cos(pi * u[0]);
  };

  DensityField field = solve_hydrodynamic(rho0, A, phi, T, 1.0 / 256, {0.0, 100});
  double err = 0.0, drift = 0.0;
  for (Site x = 0; x < field.grid.size(); ++x) {
    err = std::max(err, std::abs(field.final_state()[x] - exact(T, field.grid.position(x))));
  }
  for (double m : field.mass) drift = std::max(drift, std::abs(m - field.mass[0]) / field.mass[0]);
  report.add("6", "heat_sup_error", err, 1e-3, 0.0, Comparison::lt);
  report.add("6", "mass_drift", drift, 1e-10, 0.0, Comparison::lt);

  const TestFunction G = TestFunction::fourier(FourierSeries(1, {FourierMode{{1, 0, 0}, 1.0, 0.0}}));
  const SpaceTimeTestFunction Gt = time_independent(G);
  std::vector<double> residuals;
  for (int cells : {32, 64, 128}) {
    DensityField f = solve_hydrodynamic(rho0, A, phi, T, 1.0 / cells);
    residuals.push_back(weak_residual(f, Gt, rho0, A, phi));
    report.rows.push_back({cells, 0, -1, "weak_residual", residuals.back()});
  }
  report.add("6", "weak_residual_refine_64", residuals[1], residuals[0], 0.0, Comparison::lt);
  report.add("6", "weak_residual_refine_128", residuals[2], residuals[1], 0.0, Comparison::lt);

  const double t = 0.002;
  DensityField short_run = solve_hydrodynamic(rho0, A, phi, t, 1.0 / 256);
  const TestFunction R0 = TestFunction::fourier(FourierSeries(
      1, {FourierMode{{0, 0, 0}, 1.0, 0.0}, FourierMode{{1, 0, 0}, 0.5, 0.0}}));
  const TestFunction St = semigroup_apply(R0, t, tables.dphi(1.0), A);
  double cross = 0.0;
  for (Site x = 0; x < short_run.grid.size(); ++x) {
    cross = std::max(cross, std::abs(short_run.final_state()[x] - St.value(short_run.grid.position(x))));
  }
  report.add("6", "semigroup_cross_check", cross, 1e-6, 0.0, Comparison::lt);
  report.statistics["pde"] = {{"heat_sup_error", err}, {"mass_drift", drift},
                              {"weak_residuals", residuals}, {"semigroup_diff", cross},
                              {"dt", field.dt}};
}

void coupling(const RunContext& ctx, ExperimentReport& report) {
  const json& raw = ctx.config.raw;
  const int runs = raw.value("coupling_runs", 100);
  const int N = 32;
  const double T = 0.05;
  const RateFunction g = RateFunction::table({0, 1, 1.5, 2, 2.5, 3, 3.5, 4}, std::nullopt, true);
  FugacityTables tables(g);
  TorusGrid grid(1, N);
  Environment env = sample_environment(EnvironmentModel::iid_two_point(1.0, 2.0, 0.5), grid,
                                       stream(ctx.config, 10, 0));
  const GridFunction G = GridFunction::sample(grid, [](const Point& u) {
    return 1.0 + 0.5 * std::cos(pi * u[0]);
  });
  struct Outcome {
    std::uint64_t audited, violations;
    double diff;
  };
  std::function<Outcome(std::size_t)> run = [&](std::size_t k) {
    const std::uint64_t s = stream(ctx.config, 10, k + 1);
    Configuration lower = sample_equilibrium(tables, 1.0, grid, derive_seed({s, 1}));
    Configuration extra = sample_equilibrium(tables, 0.5, grid, derive_seed({s, 2}));
    Configuration upper(grid);
    for (Site x = 0; x < grid.size(); ++x) upper.set(x, lower[x] + extra[x]);
    CoupledTrajectory ct = coupled_simulate(lower, upper, env, g, T, derive_seed({s, 3}));
    auto h = [&](const TrajectoryRecord& tr) {
      return evaluate_fields(final_configuration(tr), G, nullptr, 0.0).empirical;
    };
    return Outcome{ct.audited_events, ct.order_violations, h(ct.lower) - h(ct.upper)};
  };
  auto out = parallel_map(static_cast<std::size_t>(runs), ctx.workers, run);
  std::uint64_t audited = 0, violations = 0;
  std::vector<double> diffs;
  for (std::size_t k = 0; k < out.size(); ++k) {
    audited += out[k].audited;
    violations += out[k].violations;
    diffs.push_back(out[k].diff);
    report.rows.push_back({N, stream(ctx.config, 10, k + 1), static_cast<long>(k),
                           "h_lower_minus_upper", out[k].diff});
  }
  MeanSe ms = mean_se(diffs);
  report.add("10", "order_violations", static_cast<double>(violations), 0.0, 0.0,
             Comparison::abs_le);
  report.add("10", "expectation_order", ms.mean, 0.0, 3.0 * ms.se, Comparison::le);
  report.statistics["coupling"] = {{"audited_events", audited}, {"violations", violations},
                                   {"mean_difference", ms.mean}, {"se", ms.se}};
}

void ensembles(const RunContext& ctx, ExperimentReport& report) {
  for (const auto& [name, g] : suite_rates(ctx.config.raw)) {
    FugacityTables tables(g);
    BoxObservable h{1, [&g = g](std::span<const std::int32_t> o) { return g(o[0]); }};
    double first = 0.0, worst = 0.0;
    for (int K = 2; K <= 6; ++K) {
      EnsembleComparison c = canonical_vs_grand(h, K, K, tables);
      const double scaled = K * c.gap;
      if (K == 2) first = scaled;
      worst = std::max(worst, scaled);
      report.rows.push_back({K, 0, -1, "scaled_gap_" + name, scaled});
    }
    report.add("11", "bounded_scaled_gap_" + name, worst, 2.0 * first, 1e-10, Comparison::le);
  }
}

}  // namespace

void run_property_suite(const RunContext& ctx, ExperimentReport& report) {
  const json& raw = ctx.config.raw;
  if (wanted(raw, "1")) fugacity_identity(ctx, report);
  if (wanted(raw, "2")) detailed_balance(ctx, report);
  if (wanted(raw, "3")) resolvent_certificates(ctx, report);
  if (wanted(raw, "5")) corrected_convergence(ctx, report);
  if (wanted(raw, "6")) pde_checks(ctx, report);
  if (wanted(raw, "10")) coupling(ctx, report);
  if (wanted(raw, "11")) ensembles(ctx, report);
}

json default_suite_config() {
  return json{{"kind", "property_suite"}, {"seed", 20240601}};
}

}  // namespace zrp
