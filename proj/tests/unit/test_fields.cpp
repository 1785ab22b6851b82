#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "zrp/errors.hpp"
#include "zrp/fields.hpp"
#include "zrp/resolvent.hpp"
#include "zrp/rng.hpp"

using namespace zrp;

namespace {

constexpr double pi = std::numbers::pi;

GridFunction cosine(const TorusGrid& g) {
  return GridFunction::sample(g, [](const Point& u) { return std::cos(pi * u[0]); });
}

// Recomputes every sum from scratch on each constant stretch.
template <class F>
double brute_integral(const TrajectoryRecord& traj, F&& sum) {
  Replay r(traj);
  double acc = 0.0, t = 0.0;
  while (true) {
    double tn = r.next_time();
    acc += sum(r.state()) * (tn - t);
    t = tn;
    if (r.done()) break;
    r.advance();
  }
  return acc;
}

}  // namespace

TEST_CASE("fields of the empty configuration and of constant test functions") {
  TorusGrid g(1, 8);
  auto G = cosine(g);
  G[3] += 0.25;
  Configuration empty(g);
  auto v = evaluate_fields(empty, G, nullptr, 1.5);
  double sum = 0;
  for (Site x = 0; x < g.size(); ++x) sum += G[x];
  CHECK(v.empirical == 0.0);
  CHECK(v.fluctuation == doctest::Approx(-1.5 * sum / std::sqrt(8.0)));

  Configuration eta(g, {1, 0, 2, 0, 0, 3, 1, 0, 0, 1, 0, 0, 4, 0, 0, 1});
  GridFunction one(g, 1.0);
  auto w = evaluate_fields(eta, one, &one, 1.0);
  CHECK(w.empirical == doctest::Approx(13.0 / 8.0));
  CHECK(w.fluctuation == doctest::Approx((13.0 - 16.0) / std::sqrt(8.0)));
  CHECK(w.corrected_fluctuation == w.fluctuation);
}

TEST_CASE("static covariance of the fluctuation field") {
  FugacityTables t(RateFunction::table({0, 1, 1.5, 2, 2.5, 3}));
  TorusGrid g(1, 16);
  auto G = cosine(g);
  auto H = GridFunction::sample(g, [](const Point& u) { return std::cos(pi * u[0]) + u[0]; });
  const int M = 4000;
  const double rho = 1.2;
  double s = 0, s2 = 0, m = 0;
  for (int k = 0; k < M; ++k) {
    auto eta = sample_equilibrium(t, rho, g, 1000 + k);
    double p = evaluate_fields(eta, G, nullptr, rho).fluctuation *
               evaluate_fields(eta, H, nullptr, rho).fluctuation;
    m += evaluate_fields(eta, G, nullptr, rho).fluctuation;
    s += p;
    s2 += p * p;
  }
  double mean = s / M, se = std::sqrt((s2 / M - mean * mean) / M);
  CHECK(std::abs(mean - t.chi(rho) * inner_product(G, H)) < 4 * se);
  CHECK(std::abs(m / M) < 4 * std::sqrt(t.chi(rho) * inner_product(G, G) / M));
}

TEST_CASE("martingale of a trajectory without events is zero") {
  TorusGrid g(1, 4);
  auto env = sample_environment(EnvironmentModel::constant(1.0), g, 0);
  auto traj = simulate(Configuration(g), env, RateFunction::linear(), 0.5, 1);
  CHECK(traj.events.empty());
  std::vector<double> times{0.0, 0.25, 0.5};
  auto tr = martingale_track(traj, cosine(g), env, RateFunction::linear(),
                             Normalization::density, 1.0, times);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tr.M[i] == 0.0);
    CHECK(tr.qv[i] == 0.0);
  }
}

TEST_CASE("martingale components match brute-force integrals") {
  TorusGrid g(1, 6);
  auto env = sample_environment(EnvironmentModel::iid_two_point(1.0, 2.0, 0.5), g, 3);
  auto rate = RateFunction::table({0, 1, 1.5, 2, 2.5});
  FugacityTables t(rate);
  auto A = effective_matrix(env);
  auto G = TestFunction::fourier(FourierSeries(1, {FourierMode{{1, 0, 0}, 1.0, 0.0}}));
  auto Gl = corrected_test_function(G, 1.0, env, A, 1e-12).u;
  auto traj = simulate(sample_equilibrium(t, 1.0, g, 4), env, rate, 0.3, 5);
  REQUIRE(traj.events.size() > 200);
  std::vector<double> times{0.0, 0.1, 0.2, 0.3};
  auto tr = martingale_track(traj, Gl, env, rate, Normalization::fluctuation, 1.0, times);
  const double c = 1.0 / std::sqrt(6.0);
  auto LG = apply_LN(env, Gl);
  double integral = brute_integral(traj, [&](const Configuration& s) {
    double acc = 0;
    for (Site x = 0; x < g.size(); ++x) acc += rate(s[x]) * LG[x];
    return acc;
  });
  double qv = brute_integral(traj, [&](const Configuration& s) {
    double acc = 0;
    for (Site x = 0; x < g.size(); ++x) {
      for (int k = 0; k < 2; ++k) {
        double d = Gl[g.neighbor(x, k)] - Gl[x];
        acc += rate(s[x]) * env.jump_rate(x, k) * d * d;
      }
    }
    return acc;
  });
  CHECK(tr.integral_term.back() == doctest::Approx(c * integral).epsilon(1e-10));
  CHECK(tr.qv.back() == doctest::Approx(c * c * qv).epsilon(1e-10));
  auto f0 = evaluate_fields(traj.initial, Gl, nullptr, 0.0).empirical;
  auto fT = evaluate_fields(final_configuration(traj), Gl, nullptr, 0.0).empirical;
  CHECK(tr.field_term.back() == doctest::Approx(std::sqrt(6.0) * (fT - f0)).epsilon(1e-10));
  CHECK(tr.M[0] == 0.0);
  for (std::size_t i = 1; i < tr.qv.size(); ++i) CHECK(tr.qv[i] >= tr.qv[i - 1]);
}

TEST_CASE("martingale moment identities hold in Monte Carlo") {
  TorusGrid g(1, 8);
  auto env = sample_environment(EnvironmentModel::iid_two_point(1.0, 2.0, 0.5), g, 6);
  FugacityTables t(RateFunction::linear());
  auto A = effective_matrix(env);
  auto G = TestFunction::fourier(FourierSeries(1, {FourierMode{{1, 0, 0}, 1.0, 0.0}}));
  auto Gl = corrected_test_function(G, 1.0, env, A, 1e-12).u;
  const int M = 1500;
  double m1 = 0, m1sq = 0, d = 0, dsq = 0;
  for (int k = 0; k < M; ++k) {
    auto traj = simulate(sample_equilibrium(t, 1.0, g, 2 * k), env, RateFunction::linear(), 0.05,
                         2 * k + 1);
    auto tr = martingale_track(traj, Gl, env, RateFunction::linear(), Normalization::fluctuation, 1.0);
    double Mt = tr.M.back();
    m1 += Mt;
    m1sq += Mt * Mt;
    double diff = Mt * Mt - tr.qv.back();
    d += diff;
    dsq += diff * diff;
  }
  double mean = m1 / M, se = std::sqrt((m1sq / M - mean * mean) / M);
  CHECK(std::abs(mean) < 4 * se);
  double dm = d / M, dse = std::sqrt((dsq / M - dm * dm) / M);
  CHECK(std::abs(dm) < 4 * dse);
}

TEST_CASE("corrected and plain fields differ by chi times the squared norm") {
  TorusGrid g(1, 8);
  auto env = sample_environment(EnvironmentModel::iid_uniform(0.4), g, 1);
  FugacityTables t(RateFunction::linear());
  auto G = TestFunction::fourier(FourierSeries(1, {FourierMode{{1, 0, 0}, 1.0, 0.0}}));
  auto Gg = G.on_grid(g);
  auto Gl = corrected_test_function(G, 1.0, env, effective_matrix(env), 1e-12).u;
  GridFunction diff(g);
  for (Site x = 0; x < g.size(); ++x) diff[x] = Gl[x] - Gg[x];
  const double want = t.chi(2.0) * std::pow(discrete_norms(diff).norm0, 2);
  const int M = 6000;
  double s = 0, s2 = 0;
  for (int k = 0; k < M; ++k) {
    auto v = evaluate_fields(sample_equilibrium(t, 2.0, g, k), Gg, &Gl, 2.0);
    double q = std::pow(v.fluctuation - v.corrected_fluctuation, 2);
    s += q;
    s2 += q * q;
  }
  double mean = s / M, se = std::sqrt((s2 / M - mean * mean) / M);
  CHECK(std::abs(mean - want) < 4 * se);
}

TEST_CASE("sampled fields agree with direct evaluation at the ends") {
  TorusGrid g(1, 6);
  auto env = sample_environment(EnvironmentModel::constant(1.0), g, 0);
  FugacityTables t(RateFunction::linear());
  auto traj = simulate(sample_equilibrium(t, 1.0, g, 1), env, RateFunction::linear(), 0.2, 2);
  auto G = cosine(g);
  std::vector<double> times{0.0, 0.2};
  auto samples = sample_fields(traj, G, &G, 1.0, times);
  REQUIRE(samples.size() == 4);
  auto first = evaluate_fields(traj.initial, G, nullptr, 1.0);
  auto last = evaluate_fields(final_configuration(traj), G, nullptr, 1.0);
  for (const auto& s : samples) {
    if (s.kind == FieldKind::fluctuation) {
      CHECK(s.values[0] == doctest::Approx(first.fluctuation));
      CHECK(s.values[1] == doctest::Approx(last.fluctuation));
    }
  }
  std::stringstream out;
  write_csv(samples, traj.seed, out);
  CHECK(out.str().rfind("trial_seed,kind,test_function,time,value\n", 0) == 0);
  CHECK_THROWS_AS(sample_fields(traj, G, nullptr, 1.0, std::vector<double>{0.3}), UsageError);
}

TEST_CASE("Boltzmann-Gibbs statistic of the density observable is exactly zero") {
  TorusGrid g(1, 16);
  auto env = sample_environment(EnvironmentModel::iid_two_point(1.0, 2.0, 0.5), g, 2);
  auto rate = RateFunction::table({0, 1, 1.5, 2, 2.5, 3});
  FugacityTables t(rate);
  auto traj = simulate(sample_equilibrium(t, 1.0, g, 3), env, rate, 0.1, 4);
  auto G = cosine(g);
  CHECK(bg_statistic(traj, G, density_deviation(1.0), env, 1.0, t) == 0.0);
  auto af = additive_functional(traj, G, g_of_eta(rate), env, 1.0, t);
  CHECK(af.difference() == bg_statistic(traj, G, g_of_eta(rate), env, 1.0, t));
  auto ad = additive_functional(traj, G, density_deviation(1.0), env, 1.0, t);
  CHECK(ad.functional == ad.comparator);
}

TEST_CASE("linear rate makes g(eta) a pure density observable") {
  TorusGrid g(1, 8);
  auto env = sample_environment(EnvironmentModel::iid_uniform(0.5), g, 7);
  FugacityTables t(RateFunction::linear());
  auto traj = simulate(sample_equilibrium(t, 1.4, g, 1), env, RateFunction::linear(), 0.1, 2);
  double s = bg_statistic(traj, cosine(g), g_of_eta(RateFunction::linear()), env, 1.4, t);
  CHECK(std::abs(s) < 1e-6);
}

TEST_CASE("centering of local observables") {
  TorusGrid g(1, 8);
  auto env = sample_environment(EnvironmentModel::iid_two_point(1.0, 2.0, 0.5), g, 9);
  auto rate = RateFunction::table({0, 1, 1.5, 2, 2.5, 3, 3.5, 4});
  FugacityTables t(rate);
  auto c = centering(g_of_eta(rate), env, t, 1.0);
  for (double v : c.per_site) CHECK(v == doctest::Approx(t.phi(1.0)).epsilon(1e-10));
  CHECK(c.slope == doctest::Approx(t.dphi(1.0)).epsilon(1e-6));
  auto ca = centering(conductance_times_g(rate), env, t, 1.0);
  for (Site x = 0; x < g.size(); ++x) {
    CHECK(ca.per_site[x] == doctest::Approx(env.conductance(x, 0) * t.phi(1.0)).epsilon(1e-10));
  }
  CHECK(ca.slope == doctest::Approx(env.mean_conductance(0) * t.dphi(1.0)).epsilon(1e-6));

  LocalObservable pair{"pair", {{0, 0, 0}, {1, 0, 0}}, 1.0,
                       [](const Environment&, Site, std::span<const std::int32_t> o) {
                         return double(o[0] * o[1]);
                       }};
  auto cp = centering(pair, env, t, 1.0);
  CHECK(cp.per_site[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(cp.slope == doctest::Approx(2.0).epsilon(1e-6));
  LocalObservable wide = pair;
  wide.support = {{0, 0, 0}, {9, 0, 0}};
  CHECK_THROWS_AS(centering(wide, env, t, 1.0), UsageError);
}

TEST_CASE("additive functional matches a brute-force integral") {
  TorusGrid g(1, 6);
  auto env = sample_environment(EnvironmentModel::iid_two_point(1.0, 2.0, 0.5), g, 1);
  auto rate = RateFunction::table({0, 1, 1.5, 2, 2.5});
  FugacityTables t(rate);
  auto traj = simulate(sample_equilibrium(t, 1.0, g, 2), env, rate, 0.2, 3);
  auto G = cosine(g);
  auto f = conductance_times_g(rate);
  auto c = centering(f, env, t, 1.0);
  auto af = additive_functional(traj, G, f, env, 1.0, t);
  const double norm = 1.0 / std::sqrt(6.0);
  double want = brute_integral(traj, [&](const Configuration& s) {
    double acc = 0;
    for (Site x = 0; x < g.size(); ++x) {
      acc += G[x] * (env.conductance(x, 0) * rate(s[x]) - c.per_site[x]);
    }
    return acc;
  });
  double dens = brute_integral(traj, [&](const Configuration& s) {
    double acc = 0;
    for (Site x = 0; x < g.size(); ++x) acc += G[x] * (s[x] - 1.0);
    return acc;
  });
  CHECK(af.functional == doctest::Approx(norm * want).epsilon(1e-10));
  CHECK(af.comparator == doctest::Approx(c.slope * norm * dens).epsilon(1e-10));
}

TEST_CASE("replacement statistic on static configurations") {
  TorusGrid g(1, 8);
  auto rate = RateFunction::table({0, 1, 1.5, 2, 2.5, 3});
  FugacityTables t(rate);
  PhiInterpolant phi(t, 6.0);

  FugacityTables tl(RateFunction::linear());
  PhiInterpolant phil(tl, 6.0);
  TrajectoryRecord flat{Configuration(g, std::vector<std::int32_t>(16, 3)), {}, 0.5, 0};
  CHECK(replacement_statistic(flat, 0.25, RateFunction::linear(), phil) < 1e-8);

  std::vector<std::int32_t> occ(16, 0);
  occ[5] = 5;
  TrajectoryRecord spike{Configuration(g, occ), {}, 0.5, 0};
  const int l = 2;
  double direct = 0;
  for (int x = 0; x < 16; ++x) {
    double gs = 0, n = 0;
    for (int y = -l; y <= l; ++y) {
      int z = ((x + y) % 16 + 16) % 16;
      gs += rate(occ[z]);
      n += occ[z];
    }
    direct += std::abs(gs / 5 - phi(n / 5));
  }
  direct *= 0.5 / 8.0;
  CHECK(replacement_statistic(spike, 0.25, rate, phi) == doctest::Approx(direct).epsilon(1e-12));
  CHECK_THROWS_AS(replacement_statistic(spike, 0.1, rate, phi), UsageError);
}
