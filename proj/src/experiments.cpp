#include "experiments.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

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

MeanSe mean_se(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

RateFunction rate_from(const json& raw, const char* key, const RateFunction& fallback) {
  return raw.contains(key) ? RateFunction::from_json(raw.at(key)) : fallback;
}

EnvironmentModel environment_from(const json& raw, const EnvironmentModel& fallback) {
  return raw.contains("environment") ? EnvironmentModel::from_json(raw.at("environment"))
                                     : fallback;
}

TestFunction test_function_from(int dim, const json& raw, const char* key, const json& fallback) {
  return TestFunction::fourier(FourierSeries::from_json(dim, raw.value(key, fallback)));
}

namespace {

json single_mode(int dim, double constant, const char* coef, double value) {
  std::vector<int> k(static_cast<std::size_t>(dim), 0);
  k[0] = 1;
  return json{{"constant", constant}, {"modes", json::array({json{{"k", k}, {coef, value}}})}};
}

std::uint64_t sub_seed(std::uint64_t trial, std::uint64_t stream) {
  return derive_seed({trial, stream});
}

// (2l+1)^-d sum over the sup-norm box of half-width l.
GridFunction box_average(const GridFunction& f, int l) {
  const TorusGrid& grid = f.grid();
  const int d = grid.dim();
  std::vector<Coords> offsets;
  for (int a = -l; a <= l; ++a) {
    for (int b = (d > 1 ? -l : 0); b <= (d > 1 ? l : 0); ++b) {
      for (int c = (d > 2 ? -l : 0); c <= (d > 2 ? l : 0); ++c) offsets.push_back({a, b, c});
    }
  }
  GridFunction out(grid);
  for (Site x = 0; x < grid.size(); ++x) {
    double s = 0.0;
    for (const auto& o : offsets) s += f[grid.translate(x, o)];
    out[x] = s / static_cast<double>(offsets.size());
  }
  return out;
}

// int_U grad G . A grad G by the periodic midpoint rule, exact for the
// band-limited functions used here.
double dirichlet_form(const TestFunction& G, const HomogenizedMatrix& A) {
  const int d = G.dim();
  const int Q = d == 1 ? 512 : (d == 2 ? 96 : 32);
  TorusGrid q(d, Q);
  double s = 0.0;
  for (Site x = 0; x < q.size(); ++x) {
    Point g = G.gradient(q.position(x));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) s += g[i] * A(i, j) * g[j];
    }
  }
  return s * std::pow(1.0 / Q, d);
}

void add_rows(ExperimentReport& report, int N, std::uint64_t seed, long trial,
              std::initializer_list<std::pair<const char*, double>> values) {
  for (const auto& [name, v] : values) report.rows.push_back({N, seed, trial, name, v});
}

}  // namespace

void run_hydro(const RunContext& ctx, ExperimentReport& report) {
  const ExperimentConfig& c = ctx.config;
  const json& raw = c.raw;
  const RateFunction g = rate_from(raw, "g", RateFunction::linear());
  const EnvironmentModel model =
      environment_from(raw, EnvironmentModel::iid_two_point(1.0, 2.0, 0.5));
  const FourierSeries rho0_series =
      FourierSeries::from_json(c.dim, raw.value("rho0", single_mode(c.dim, 1.0, "sin", 0.5)));
  const auto rho0 = [&](const Point& u) { return rho0_series.value(u); };
  const double eps = raw.value("epsilon", 0.05);
  const int cells = raw.value("pde_cells", 256);
  const double max_final = raw.value("max_final_l2", 0.05);
  const std::string id = raw.value("criterion", std::string("7"));
  if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");

  FugacityTables tables(g);
  TorusGrid pde_grid(c.dim, cells);
  double hi = 0.0;
  for (Site x = 0; x < pde_grid.size(); ++x) hi = std::max(hi, rho0(pde_grid.position(x)));
  PhiInterpolant phi(tables, std::min(tables.rho_max(), 2.0 * hi + 1.0));

  std::vector<double> l2s;
  for (int N : c.N) {
    TorusGrid grid(c.dim, N);
    Environment env = sample_environment(model, grid, environment_seed(c.seed, N));
    HomogenizedMatrix A = effective_matrix(env);
    DensityField field = solve_hydrodynamic(rho0, A, phi, c.T, 1.0 / cells,
                                            {0.0, std::numeric_limits<int>::max()});

    std::function<std::vector<std::int32_t>(std::size_t)> trial = [&](std::size_t m) {
      std::uint64_t s = trial_seed(c.seed, N, static_cast<long>(m));
      Configuration eta = sample_profile(tables, rho0, grid, sub_seed(s, 1));
      Configuration last = final_configuration(simulate(eta, env, g, c.T, sub_seed(s, 2)));
      return std::vector<std::int32_t>(last.occupancy().begin(), last.occupancy().end());
    };
    auto finals = parallel_map(static_cast<std::size_t>(c.trials), ctx.workers, trial);

    const int l = std::max(1, static_cast<int>(std::floor(eps * N)));
    const double M = static_cast<double>(c.trials);
    GridFunction mean(grid), second(grid);
    for (std::size_t m = 0; m < finals.size(); ++m) {
      GridFunction occ(grid);
      double total = 0.0;
      for (Site x = 0; x < grid.size(); ++x) {
        occ[x] = finals[m][x];
        total += finals[m][x];
      }
      GridFunction box = box_average(occ, l);
      for (Site x = 0; x < grid.size(); ++x) {
        mean[x] += box[x] / M;
        second[x] += box[x] * box[x] / M;
      }
      report.rows.push_back({N, trial_seed(c.seed, N, static_cast<long>(m)),
                             static_cast<long>(m), "mass", total * std::pow(1.0 / N, c.dim)});
    }
    double var = 0.0;
    for (Site x = 0; x < grid.size(); ++x) {
      var += std::max(0.0, second[x] - mean[x] * mean[x]) * M / std::max(1.0, M - 1.0);
    }
    const double noise = std::sqrt(var / static_cast<double>(grid.size()) / M);

    Interpolant empirical(mean, 0);
    const auto& pde = field.final_state();
    double ss = 0.0, sup = 0.0;
    std::ostringstream profile;
    profile << "site";
    for (int i = 0; i < c.dim; ++i) profile << ",u" << (i + 1);
    profile << ",empirical,pde\n";
    for (Site x = 0; x < pde_grid.size(); ++x) {
      Point u = pde_grid.position(x);
      double e = empirical(u);
      double diff = e - pde[x];
      ss += diff * diff;
      sup = std::max(sup, std::abs(diff));
      profile << x;
      for (int i = 0; i < c.dim; ++i) profile << ',' << text::num(u[i]);
      profile << ',' << text::num(e) << ',' << text::num(pde[x]) << '\n';
    }
    const double l2 = std::sqrt(ss / static_cast<double>(pde_grid.size()));
    l2s.push_back(l2);
    report.artifacts[tag("profile", N) + ".csv"] = profile.str();
    add_rows(report, N, environment_seed(c.seed, N), -1,
             {{"l2_error", l2}, {"sup_error", sup}, {"noise_se", noise},
              {"box_half_width", static_cast<double>(l)}, {"A_00", A(0, 0)}});
    report.statistics[tag("N", N)] = json{{"l2_error", l2}, {"sup_error", sup},
                                          {"noise_se", noise}, {"box_half_width", l},
                                          {"A", A.to_json()}, {"pde", metadata(field)}};
  }
  if (raw.value("check_decreasing", true)) {
    for (std::size_t i = 1; i < l2s.size(); ++i) {
      report.add(id, tag("l2_decreasing", c.N[i]), l2s[i], l2s[i - 1], 0.0, Comparison::lt);
    }
  }
  report.add(id, tag("final_l2", c.N.back()), l2s.back(), max_final, 0.0, Comparison::lt);
}

void run_fluctuation(const RunContext& ctx, ExperimentReport& report) {
  const ExperimentConfig& c = ctx.config;
  const json& raw = c.raw;
  const RateFunction g = rate_from(raw, "g", RateFunction::linear());
  const EnvironmentModel model =
      environment_from(raw, EnvironmentModel::iid_two_point(1.0, 2.0, 0.5));
  const std::string id = raw.value("criterion", std::string("8"));
  const double qv_rel_tol = raw.value("qv_rel_tol", 0.1);
  const double cg_tol = raw.value("resolvent_tol", 1e-10);
  const TestFunction G = test_function_from(c.dim, raw, "G", single_mode(c.dim, 0.0, "cos", 1.0));

  std::vector<std::pair<TestFunction, TestFunction>> pairs;
  if (raw.contains("pairs")) {
    for (const auto& p : raw.at("pairs")) {
      pairs.emplace_back(TestFunction::fourier(FourierSeries::from_json(c.dim, p.at(0))),
                         TestFunction::fourier(FourierSeries::from_json(c.dim, p.at(1))));
    }
  } else {
    pairs.emplace_back(G, G);
  }

  FugacityTables tables(g);
  const FugacityPoint eq = tables.at_density(c.rho);
  const double dphi = tables.dphi(c.rho);
  const double three = 3.0;

  for (int N : c.N) {
    TorusGrid grid(c.dim, N);
    Environment env = sample_environment(model, grid, environment_seed(c.seed, N));
    HomogenizedMatrix A = effective_matrix(env);
    const GridFunction Gg = G.on_grid(grid);
    const GridFunction Gl = corrected_test_function(G, c.lambda, env, A, cg_tol).u;
    std::vector<std::pair<GridFunction, GridFunction>> pg;
    for (const auto& [a, b] : pairs) pg.emplace_back(a.on_grid(grid), b.on_grid(grid));

    struct Trial {
      std::vector<double> products;
      double M, qv, y0, yT;
    };
    std::function<Trial(std::size_t)> run = [&](std::size_t m) {
      std::uint64_t s = trial_seed(c.seed, N, static_cast<long>(m));
      Configuration eta = sample_equilibrium(tables, c.rho, grid, sub_seed(s, 1));
      TrajectoryRecord traj = simulate(eta, env, g, c.T, sub_seed(s, 2));
      Trial t{};
      for (const auto& [a, b] : pg) {
        t.products.push_back(evaluate_fields(eta, a, nullptr, c.rho).fluctuation *
                             evaluate_fields(eta, b, nullptr, c.rho).fluctuation);
      }
      MartingaleTrack track =
          martingale_track(traj, Gl, env, g, Normalization::fluctuation, c.lambda);
      t.M = track.M.back();
      t.qv = track.qv.back();
      t.y0 = evaluate_fields(eta, Gg, nullptr, c.rho).fluctuation;
      t.yT = evaluate_fields(final_configuration(traj), Gg, nullptr, c.rho).fluctuation;
      return t;
    };
    auto trials = parallel_map(static_cast<std::size_t>(c.trials), ctx.workers, run);

    std::vector<double> Ms, sq_minus_qv, qv_rate, lag;
    std::vector<std::vector<double>> prod(pg.size());
    for (std::size_t m = 0; m < trials.size(); ++m) {
      const Trial& t = trials[m];
      Ms.push_back(t.M);
      sq_minus_qv.push_back(t.M * t.M - t.qv);
      qv_rate.push_back(t.qv / c.T);
      lag.push_back(t.yT * t.y0);
      for (std::size_t k = 0; k < pg.size(); ++k) prod[k].push_back(t.products[k]);
      add_rows(report, N, trial_seed(c.seed, N, static_cast<long>(m)), static_cast<long>(m),
               {{"M_T", t.M}, {"qv_T", t.qv}, {"Y0_G", t.y0}, {"YT_G", t.yT}});
    }

    json stats;
    for (std::size_t k = 0; k < pg.size(); ++k) {
      MeanSe ms = mean_se(prod[k]);
      double ref = eq.chi * inner_product(pg[k].first, pg[k].second);
      report.add(id, tag("static_cov_" + std::to_string(k + 1), N), ms.mean, ref,
                 three * ms.se, Comparison::abs_le);
      stats["static_cov_" + std::to_string(k + 1)] = {{"mean", ms.mean}, {"se", ms.se},
                                                      {"reference", ref}};
    }
    MeanSe mm = mean_se(Ms), mq = mean_se(sq_minus_qv);
    report.add(id, tag("martingale_mean", N), mm.mean, 0.0, three * mm.se, Comparison::abs_le);
    report.add(id, tag("martingale_square_minus_qv", N), mq.mean, 0.0, three * mq.se,
               Comparison::abs_le);

    MeanSe rate = mean_se(qv_rate);
    const double qv_ref = eq.phi * dirichlet_form(G, A);
    if (N == c.N.back()) {
      report.add(id, tag("qv_limit", N), rate.mean, qv_ref, qv_rel_tol * qv_ref + three * rate.se,
                 Comparison::abs_le);
    }

    GridFunction StG = semigroup_apply(G, c.T, dphi, A).on_grid(grid);
    const double lag_ref = eq.chi * inner_product(StG, Gg);
    MeanSe ml = mean_se(lag);
    report.add(id, tag("lag_covariance", N), ml.mean, lag_ref, three * ml.se, Comparison::abs_le);

    add_rows(report, N, environment_seed(c.seed, N), -1,
             {{"qv_rate_mean", rate.mean}, {"qv_rate_se", rate.se}, {"qv_reference", qv_ref},
              {"lag_mean", ml.mean}, {"lag_se", ml.se}, {"lag_reference", lag_ref},
              {"A_00", A(0, 0)}});
    stats["martingale_mean"] = {{"mean", mm.mean}, {"se", mm.se}};
    stats["martingale_square_minus_qv"] = {{"mean", mq.mean}, {"se", mq.se}};
    stats["qv_rate"] = {{"mean", rate.mean}, {"se", rate.se}, {"reference", qv_ref},
                        {"ratio", rate.mean / qv_ref}};
    stats["lag_covariance"] = {{"mean", ml.mean}, {"se", ml.se}, {"reference", lag_ref},
                               {"t", c.T}};
    stats["chi"] = eq.chi;
    stats["phi"] = eq.phi;
    stats["dphi"] = dphi;
    stats["A"] = A.to_json();
    report.statistics[tag("N", N)] = stats;
  }
}

void run_boltzmann_gibbs(const RunContext& ctx, ExperimentReport& report) {
  const ExperimentConfig& c = ctx.config;
  const json& raw = c.raw;
  const RateFunction g =
      rate_from(raw, "g", RateFunction::table({0, 1, 1.5, 2, 2.5, 3, 3.5, 4}));
  const EnvironmentModel model =
      environment_from(raw, EnvironmentModel::iid_two_point(1.0, 2.0, 0.5));
  const std::string id = raw.value("criterion", std::string("9"));
  const double ratio = raw.value("decay_ratio", 0.5);
  const TestFunction G = test_function_from(c.dim, raw, "G", single_mode(c.dim, 0.0, "cos", 1.0));
  const auto names = raw.value(
      "observables",
      std::vector<std::string>{"g_of_eta", "conductance_times_g", "density_deviation"});
  const auto exact_zero =
      raw.value("exact_zero", std::vector<std::string>{"density_deviation"});

  std::vector<LocalObservable> obs;
  for (const auto& n : names) {
    if (n == "g_of_eta") {
      obs.push_back(g_of_eta(g));
    } else if (n == "conductance_times_g") {
      obs.push_back(conductance_times_g(g));
    } else if (n == "density_deviation") {
      obs.push_back(density_deviation(c.rho));
    } else {
      throw ConfigError("unknown observable '" + n + "'");
    }
  }
  auto is_zero = [&](const std::string& n) {
    return std::find(exact_zero.begin(), exact_zero.end(), n) != exact_zero.end();
  };

  FugacityTables tables(g);
  std::vector<std::vector<double>> second(obs.size());
  std::vector<double> max_abs(obs.size(), 0.0);
  for (int N : c.N) {
    TorusGrid grid(c.dim, N);
    Environment env = sample_environment(model, grid, environment_seed(c.seed, N));
    const GridFunction Gg = G.on_grid(grid);
    std::function<std::vector<double>(std::size_t)> run = [&](std::size_t m) {
      std::uint64_t s = trial_seed(c.seed, N, static_cast<long>(m));
      Configuration eta = sample_equilibrium(tables, c.rho, grid, sub_seed(s, 1));
      TrajectoryRecord traj = simulate(eta, env, g, c.T, sub_seed(s, 2));
      std::vector<double> v;
      for (const auto& f : obs) v.push_back(bg_statistic(traj, Gg, f, env, c.rho, tables));
      return v;
    };
    auto trials = parallel_map(static_cast<std::size_t>(c.trials), ctx.workers, run);
    json stats;
    for (std::size_t k = 0; k < obs.size(); ++k) {
      std::vector<double> sq;
      for (std::size_t m = 0; m < trials.size(); ++m) {
        double v = trials[m][k];
        sq.push_back(v * v);
        max_abs[k] = std::max(max_abs[k], std::abs(v));
        report.rows.push_back({N, trial_seed(c.seed, N, static_cast<long>(m)),
                               static_cast<long>(m), "bg_" + obs[k].name, v});
      }
      MeanSe ms = mean_se(sq);
      second[k].push_back(ms.mean);
      report.rows.push_back({N, environment_seed(c.seed, N), -1, "second_moment_" + obs[k].name,
                             ms.mean});
      report.rows.push_back({N, environment_seed(c.seed, N), -1,
                             "second_moment_se_" + obs[k].name, ms.se});
      stats[obs[k].name] = {{"second_moment", ms.mean}, {"se", ms.se}};
    }
    report.statistics[tag("N", N)] = stats;
  }
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (is_zero(names[k])) {
      report.add(id, "exact_zero_" + obs[k].name, max_abs[k], 0.0, 0.0, Comparison::abs_le);
    } else if (c.N.size() > 1) {
      report.add(id, "decay_" + obs[k].name, second[k].back(), ratio * second[k].front(), 0.0,
                 Comparison::lt);
    }
  }
}

void run_homogenize(const RunContext& ctx, ExperimentReport& report) {
  const ExperimentConfig& c = ctx.config;
  const json& raw = c.raw;
  const std::string id = raw.value("criterion", std::string("4"));
  const double tol = raw.value("corrector_tol", 1e-11);
  json cases = raw.value("cases", json::array());
  if (cases.empty()) {
    if (c.N.empty()) throw ConfigError("homogenize needs 'cases' or an N list");
    json one{{"name", "default"}, {"environment", raw.value("environment", json{
        {"kind", "iid_two_point"}, {"low", 1.0}, {"high", 2.0}, {"p", 0.5}})}};
    one["N"] = c.N.back();
    one["d"] = c.dim;
    cases.push_back(one);
  }
  for (const auto& cs : cases) {
    const std::string name = cs.at("name").get<std::string>();
    const EnvironmentModel model = EnvironmentModel::from_json(cs.at("environment"));
    const int d = cs.value("d", c.dim);
    const int N = cs.at("N").get<int>();
    const int seeds = cs.value("seeds", 1);
    if (d < 1 || d > 3 || N < 1 || seeds < 1) throw ConfigError("invalid homogenization case");
    TorusGrid grid(d, N);
    std::function<std::pair<HomogenizedMatrix, double>(std::size_t)> solve =
        [&](std::size_t k) {
          Environment env = sample_environment(model, grid, trial_seed(c.seed, N, static_cast<long>(k)));
          HomogenizedMatrix A = effective_matrix(env, tol);
          double oracle = d == 1 ? harmonic_mean_oracle_1d(env) : 0.0;
          return std::make_pair(A, oracle);
        };
    auto results = parallel_map(static_cast<std::size_t>(seeds), ctx.workers, solve);

    const json check = cs.value("check", json::object());
    double worst = 0.0;
    json per_seed = json::array();
    HomogenizedMatrix mean = results.front().first;
    mean.A.fill(0.0);
    mean.provenance.seeds.clear();
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& [A, oracle] = results[k];
      const std::uint64_t s = trial_seed(c.seed, N, static_cast<long>(k));
      for (int i = 0; i < 9; ++i) mean.A[i] += A.A[i] / seeds;
      mean.provenance.seeds.push_back(s);
      for (int i = 0; i < d; ++i) {
        report.rows.push_back({N, s, static_cast<long>(k),
                               name + "_A_" + std::to_string(i) + std::to_string(i), A(i, i)});
      }
      if (check.contains("harmonic_mean")) {
        if (d != 1) throw ConfigError("the harmonic-mean check is one-dimensional");
        worst = std::max(worst, std::abs(A(0, 0) - oracle) / oracle);
        report.rows.push_back({N, s, static_cast<long>(k), name + "_harmonic_mean", oracle});
      } else if (check.contains("value")) {
        const double v = check.at("value").get<double>();
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) worst = std::max(worst, std::abs(A(i, j) - (i == j ? v : 0.0)));
        }
      }
      per_seed.push_back(A.to_json());
    }
    double spread = 0.0;
    for (const auto& r : results) spread = std::max(spread, std::abs(r.first(0, 0) - mean(0, 0)));
    if (check.contains("harmonic_mean")) {
      report.add(id, name + "_harmonic_mean_rel", worst, 0.0,
                 check.at("harmonic_mean").get<double>(), Comparison::abs_le);
    } else if (check.contains("value")) {
      report.add(id, name + "_value", worst, 0.0, check.value("abs_tol", 1e-8), Comparison::abs_le);
    }
    report.artifacts["A_" + name + ".json"] = mean.to_json().dump(2) + "\n";
    report.statistics[name] = {{"A", mean.to_json()}, {"per_seed", per_seed},
                               {"seed_spread_A00", spread}, {"model", model.to_json()}};
  }
}

}  // namespace zrp
