#include "zrp/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "text.hpp"
#include "zrp/errors.hpp"
#include "zrp/resolvent.hpp"

namespace zrp {

namespace {

double scale_factor(const TorusGrid& grid, double power) {
  return std::pow(static_cast<double>(grid.scale()), -power * grid.dim());
}

void check_times(std::span<const double> times, double horizon) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0 && times[i] <= horizon)) {
      throw UsageError("sample time outside [0, horizon]");
    }
    if (i > 0 && times[i] < times[i - 1]) throw UsageError("sample times must be sorted");
  }
}

// Drives a tracker along the piecewise-constant path. The tracker sees
// start(state), advance(dt) for every constant stretch, record(t) at each
// sample time and jump(state, source, target) after each event.
template <class Tracker>
void walk(const TrajectoryRecord& traj, std::span<const double> times, Tracker& tr) {
  check_times(times, traj.horizon);
  Replay rp(traj);
  tr.start(rp.state());
  double t = 0.0;
  std::size_t j = 0;
  while (true) {
    const bool last = rp.done();
    const double tn = rp.next_time();
    while (j < times.size() && (times[j] < tn || (last && times[j] <= tn))) {
      tr.advance(times[j] - t);
      t = times[j];
      tr.record(t);
      ++j;
    }
    tr.advance(tn - t);
    t = tn;
    if (last) break;
    auto jump = rp.advance();
    tr.jump(rp.state(), jump.source, jump.target);
  }
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) throw UsageError("grid mismatch");
}

}  // namespace

FieldValues evaluate_fields(const Configuration& eta, const GridFunction& G,
                            const GridFunction* Gl, double rho) {
  const TorusGrid& grid = eta.grid();
  require_same_grid(grid, G.grid());
  if (Gl) require_same_grid(grid, Gl->grid());
  const double cd = scale_factor(grid, 1.0);
  const double ch = scale_factor(grid, 0.5);
  double e = 0.0, ec = 0.0, f = 0.0, fc = 0.0;
  for (Site x = 0; x < grid.size(); ++x) {
    const double n = eta[x];
    e += n * G[x];
    f += G[x] * (n - rho);
    if (Gl) {
      ec += n * (*Gl)[x];
      fc += (*Gl)[x] * (n - rho);
    }
  }
  return {cd * e, cd * ec, ch * f, ch * fc};
}

const char* to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::empirical: return "empirical";
    case FieldKind::corrected_empirical: return "corrected_empirical";
    case FieldKind::fluctuation: return "fluctuation";
    case FieldKind::corrected_fluctuation: return "corrected_fluctuation";
  }
  return "?";
}

std::vector<FieldSample> sample_fields(const TrajectoryRecord& traj, const GridFunction& G,
                                       const GridFunction* Gl, double rho,
                                       std::span<const double> times,
                                       const std::string& test_function) {
  struct Tracker {
    const GridFunction& G;
    const GridFunction* Gl;
    double rho;
    std::vector<FieldValues> out;
    const Configuration* state = nullptr;
    void start(const Configuration& s) { state = &s; }
    void advance(double) {}
    void record(double) { out.push_back(evaluate_fields(*state, G, Gl, rho)); }
    void jump(const Configuration&, Site, Site) {}
  } tr{G, Gl, rho, {}};
  require_same_grid(traj.initial.grid(), G.grid());
  walk(traj, times, tr);

  std::vector<FieldSample> out;
  auto add = [&](FieldKind kind, double FieldValues::*member) {
    FieldSample s{kind, test_function, {times.begin(), times.end()}, {}};
    for (const auto& v : tr.out) s.values.push_back(v.*member);
    out.push_back(std::move(s));
  };
  add(FieldKind::empirical, &FieldValues::empirical);
  if (Gl) add(FieldKind::corrected_empirical, &FieldValues::corrected_empirical);
  add(FieldKind::fluctuation, &FieldValues::fluctuation);
  if (Gl) add(FieldKind::corrected_fluctuation, &FieldValues::corrected_fluctuation);
  return out;
}

MartingaleTrack martingale_track(const TrajectoryRecord& traj, const GridFunction& Gl,
                                 const Environment& env, const RateFunction& g,
                                 Normalization normalization, double lambda,
                                 std::span<const double> times) {
  const TorusGrid& grid = env.grid();
  require_same_grid(grid, Gl.grid());
  require_same_grid(grid, traj.initial.grid());
  const std::size_t n = grid.size();
  const double c = scale_factor(grid, normalization == Normalization::density ? 1.0 : 0.5);

  std::vector<double> LG(n), Q(n);
  for (Site x = 0; x < n; ++x) {
    double l = 0.0, q = 0.0;
    for (int k = 0; k < grid.directions(); ++k) {
      double diff = Gl[grid.neighbor(x, k)] - Gl[x];
      l += env.jump_rate(x, k) * diff;
      q += env.jump_rate(x, k) * diff * diff;
    }
    LG[x] = l;
    Q[x] = q;
  }

  struct Tracker {
    const RateFunction& g;
    const GridFunction& Gl;
    const std::vector<double>& LG;
    const std::vector<double>& Q;
    double c;
    MartingaleTrack& track;
    double F = 0.0, F0 = 0.0, S1 = 0.0, S2 = 0.0, I1 = 0.0, I2 = 0.0;
    std::size_t since_sync = 0;

    void sync(const Configuration& s) {
      F = S1 = S2 = 0.0;
      for (Site x = 0; x < s.size(); ++x) {
        F += s[x] * Gl[x];
        double gx = g(s[x]);
        S1 += gx * LG[x];
        S2 += gx * Q[x];
      }
      since_sync = 0;
    }
    void start(const Configuration& s) {
      sync(s);
      F0 = F;
    }
    void advance(double dt) {
      I1 += S1 * dt;
      I2 += S2 * dt;
    }
    void record(double t) {
      double field = c * (F - F0);
      double integral = c * I1;
      track.times.push_back(t);
      track.field_term.push_back(field);
      track.integral_term.push_back(integral);
      track.M.push_back(field - integral);
      track.qv.push_back(c * c * I2);
    }
    void jump(const Configuration& s, Site from, Site to) {
      if (++since_sync >= s.size()) {
        sync(s);
        return;
      }
      const std::int32_t nf = s[from], nt = s[to];
      double df = g(nf) - g(nf + 1);
      double dt = g(nt) - g(nt - 1);
      S1 += df * LG[from] + dt * LG[to];
      S2 += df * Q[from] + dt * Q[to];
      F += Gl[to] - Gl[from];
    }
  };

  MartingaleTrack track;
  track.normalization = normalization;
  track.lambda = lambda;
  track.seed = traj.seed;
  Tracker tr{g, Gl, LG, Q, c, track};
  std::vector<double> at_horizon{traj.horizon};
  walk(traj, times.empty() ? std::span<const double>(at_horizon) : times, tr);
  return track;
}

MartingaleTrack martingale_track(const TrajectoryRecord& traj, const TestFunction& G,
                                 double lambda, const Environment& env,
                                 const HomogenizedMatrix& A, const RateFunction& g,
                                 Normalization normalization, double tol,
                                 std::span<const double> times) {
  auto sol = corrected_test_function(G, lambda, env, A, tol);
  return martingale_track(traj, sol.u, env, g, normalization, lambda, times);
}

int LocalObservable::support_radius() const {
  int r = 0;
  for (const auto& c : support) {
    for (int v : c) r = std::max(r, std::abs(v));
  }
  return r;
}

LocalObservable density_deviation(double rho) {
  LocalObservable f;
  f.name = "eta-rho";
  f.lipschitz = 1.0;
  f.eval = [rho](const Environment&, Site, std::span<const std::int32_t> occ) {
    return static_cast<double>(occ[0]) - rho;
  };
  f.closed_form = LocalObservable::Projection{0.0, 1.0};
  return f;
}

LocalObservable g_of_eta(const RateFunction& g) {
  LocalObservable f;
  f.name = "g(eta)";
  f.lipschitz = g.lipschitz_constant();
  f.eval = [g](const Environment&, Site, std::span<const std::int32_t> occ) {
    return g(occ[0]);
  };
  return f;
}

LocalObservable conductance_times_g(const RateFunction& g) {
  LocalObservable f;
  f.name = "a1*g(eta)";
  f.eval = [g](const Environment& env, Site x, std::span<const std::int32_t> occ) {
    return env.conductance(x, 0) * g(occ[0]);
  };
  // Conductances are bounded by 1/epsilon0.
  f.lipschitz = g.lipschitz_constant();
  return f;
}

namespace {

std::vector<Site> support_sites(const TorusGrid& grid, const LocalObservable& f) {
  if (f.support.empty()) throw UsageError("observable has empty support");
  if (f.support_radius() > grid.scale()) throw UsageError("observable support radius exceeds N");
  const std::size_t s = f.support.size();
  std::vector<Site> out(grid.size() * s);
  for (Site x = 0; x < grid.size(); ++x) {
    for (std::size_t k = 0; k < s; ++k) out[x * s + k] = grid.translate(x, f.support[k]);
  }
  return out;
}

// E over independent sites with marginal pmf, by full enumeration.
double product_expectation(const LocalObservable& f, const Environment& env, Site x,
                           const std::vector<double>& pmf) {
  const std::size_t s = f.support.size();
  std::vector<std::int32_t> occ(s, 0);
  double total = 0.0;
  auto rec = [&](auto&& self, std::size_t k, double w) -> void {
    if (k == s) {
      total += w * f.eval(env, x, occ);
      return;
    }
    for (std::size_t n = 0; n < pmf.size(); ++n) {
      occ[k] = static_cast<std::int32_t>(n);
      self(self, k + 1, w * pmf[n]);
    }
  };
  rec(rec, 0, 1.0);
  return total;
}

std::vector<double> trimmed_pmf(const FugacityTables& tables, double rho) {
  auto p = tables.pmf(tables.alpha_of_density(rho));
  while (p.size() > 1 && p.back() < 1e-18) p.pop_back();
  return p;
}

std::vector<double> site_centering(const LocalObservable& f, const Environment& env,
                                   const FugacityTables& tables, double rho) {
  auto pmf = trimmed_pmf(tables, rho);
  std::vector<double> c(env.grid().size());
  for (Site x = 0; x < c.size(); ++x) c[x] = product_expectation(f, env, x, pmf);
  return c;
}

double average(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Tracks S = c sum_x G(x) (f(x, eta) - centering(x)) and its time integral.
class ObservableTracker {
 public:
  ObservableTracker(const GridFunction& G, const LocalObservable& f, const Environment& env,
                    std::vector<double> centering)
      : G_(G), f_(f), env_(env), centering_(std::move(centering)),
        sites_(support_sites(env.grid(), f)), c_(scale_factor(env.grid(), 0.5)),
        term_(env.grid().size()), occ_(f.support.size()) {
    // Centres z whose support contains z + support[k]: z = y - support[k].
    for (const auto& off : f.support) {
      affected_.push_back({-off[0], -off[1], -off[2]});
    }
  }

  double integral() const { return c_ * integral_; }

  void start(const Configuration& s) {
    for (Site x = 0; x < term_.size(); ++x) term_[x] = term(s, x);
    resync();
  }
  void advance(double dt) { integral_ += sum_ * dt; }
  void record(double) {}
  void jump(const Configuration& s, Site from, Site to) {
    for (Site y : {from, to}) {
      for (const auto& off : affected_) {
        Site z = s.grid().translate(y, off);
        double t = term(s, z);
        sum_ += t - term_[z];
        term_[z] = t;
      }
    }
    if (++since_sync_ >= term_.size()) resync();
  }

 private:
  double term(const Configuration& s, Site x) {
    const std::size_t k = occ_.size();
    for (std::size_t i = 0; i < k; ++i) occ_[i] = s[sites_[x * k + i]];
    return G_[x] * (f_.eval(env_, x, occ_) - centering_[x]);
  }
  void resync() {
    sum_ = 0.0;
    for (double t : term_) sum_ += t;
    since_sync_ = 0;
  }

  const GridFunction& G_;
  const LocalObservable& f_;
  const Environment& env_;
  std::vector<double> centering_;
  std::vector<Site> sites_;
  std::vector<Coords> affected_;
  double c_;
  std::vector<double> term_;
  std::vector<std::int32_t> occ_;
  double sum_ = 0.0;
  double integral_ = 0.0;
  std::size_t since_sync_ = 0;
};

// Runs two trackers over the same path.
struct PairTracker {
  ObservableTracker& a;
  ObservableTracker& b;
  void start(const Configuration& s) { a.start(s); b.start(s); }
  void advance(double dt) { a.advance(dt); b.advance(dt); }
  void record(double) {}
  void jump(const Configuration& s, Site from, Site to) { a.jump(s, from, to); b.jump(s, from, to); }
};

}  // namespace

Centering centering(const LocalObservable& f, const Environment& env,
                    const FugacityTables& tables, double rho, double h) {
  support_sites(env.grid(), f);
  const std::size_t n = env.grid().size();
  if (f.closed_form) return {std::vector<double>(n, f.closed_form->centering), f.closed_form->slope};
  Centering c;
  c.per_site = site_centering(f, env, tables, rho);
  if (rho > h) {
    c.slope = (average(site_centering(f, env, tables, rho + h)) -
               average(site_centering(f, env, tables, rho - h))) / (2.0 * h);
  } else {
    c.slope = (average(site_centering(f, env, tables, rho + h)) - average(c.per_site)) / h;
  }
  return c;
}

AdditiveFunctional additive_functional(const TrajectoryRecord& traj, const GridFunction& G,
                                       const LocalObservable& f, const Environment& env,
                                       double rho, const FugacityTables& tables) {
  require_same_grid(env.grid(), G.grid());
  require_same_grid(env.grid(), traj.initial.grid());
  Centering cf = centering(f, env, tables, rho);
  LocalObservable y = density_deviation(rho);
  ObservableTracker tf(G, f, env, std::move(cf.per_site));
  ObservableTracker ty(G, y, env, std::vector<double>(env.grid().size(), y.closed_form->centering));
  PairTracker both{tf, ty};
  walk(traj, {}, both);
  return {tf.integral(), cf.slope * ty.integral(), cf.slope};
}

double bg_statistic(const TrajectoryRecord& traj, const GridFunction& G,
                    const LocalObservable& f, const Environment& env, double rho,
                    const FugacityTables& tables) {
  return additive_functional(traj, G, f, env, rho, tables).difference();
}

double replacement_statistic(const TrajectoryRecord& traj, double eps, const RateFunction& g,
                             const PhiInterpolant& phi) {
  const TorusGrid& grid = traj.initial.grid();
  const int l = static_cast<int>(std::floor(eps * grid.scale()));
  if (l < 1) throw UsageError("replacement box half-width floor(eps N) is zero");
  if (2 * l + 1 > grid.side()) throw UsageError("replacement box wraps around the torus");
  const int d = grid.dim();
  std::vector<Coords> box;
  Coords off{0, 0, 0};
  auto build = [&](auto&& self, int axis) -> void {
    if (axis == d) {
      box.push_back(off);
      return;
    }
    for (int v = -l; v <= l; ++v) {
      off[axis] = v;
      self(self, axis + 1);
    }
    off[axis] = 0;
  };
  build(build, 0);
  const double B = static_cast<double>(box.size());
  const std::size_t n = grid.size();

  struct Tracker {
    const TorusGrid& grid;
    const RateFunction& g;
    const PhiInterpolant& phi;
    const std::vector<Coords>& box;
    double B;
    std::vector<double> sum_eta, sum_g, v;
    double total = 0.0, integral = 0.0;
    std::size_t since_sync = 0;

    double value(Site x) const { return std::abs(sum_g[x] / B - phi(sum_eta[x] / B)); }
    void start(const Configuration& s) {
      for (Site x = 0; x < s.size(); ++x) {
        for (const auto& o : box) {
          Site y = grid.translate(x, o);
          sum_eta[x] += s[y];
          sum_g[x] += g(s[y]);
        }
        v[x] = value(x);
      }
      resync();
    }
    void resync() {
      total = 0.0;
      for (double t : v) total += t;
      since_sync = 0;
    }
    void advance(double dt) { integral += total * dt; }
    void record(double) {}
    void shift(const Configuration& s, Site y, int delta) {
      const std::int32_t now = s[y];
      const double dg = g(now) - g(now - delta);
      for (const auto& o : box) {
        Site z = grid.translate(y, o);
        sum_eta[z] += delta;
        sum_g[z] += dg;
      }
    }
    void refresh(Site y) {
      for (const auto& o : box) {
        Site z = grid.translate(y, o);
        double nv = value(z);
        total += nv - v[z];
        v[z] = nv;
      }
    }
    void jump(const Configuration& s, Site from, Site to) {
      shift(s, from, -1);
      shift(s, to, +1);
      refresh(from);
      refresh(to);
      if (++since_sync >= v.size()) resync();
    }
  } tr{grid, g, phi, box, B, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  walk(traj, {}, tr);
  return tr.integral * scale_factor(grid, 1.0);
}

void write_csv(const std::vector<FieldSample>& samples, std::uint64_t trial_seed,
               std::ostream& out, bool header) {
  if (header) out << "trial_seed,kind,test_function,time,value\n";
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      out << trial_seed << ',' << to_string(s.kind) << ',' << s.test_function << ','
          << text::num(s.times[i]) << ',' << text::num(s.values[i]) << '\n';
    }
  }
}

void write_csv(const MartingaleTrack& track, std::ostream& out, bool header) {
  if (header) out << "trial_seed,time,M,qv,field_term,integral_term\n";
  for (std::size_t i = 0; i < track.times.size(); ++i) {
    out << track.seed << ',' << text::num(track.times[i]) << ',' << text::num(track.M[i]) << ','
        << text::num(track.qv[i]) << ',' << text::num(track.field_term[i]) << ','
        << text::num(track.integral_term[i]) << '\n';
  }
}

}  // namespace zrp
