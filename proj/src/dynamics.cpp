#include "zrp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "text.hpp"
#include "zrp/errors.hpp"
#include "zrp/rng.hpp"

namespace zrp {

IntensityTree::IntensityTree(std::size_t leaves) {
  base_ = 1;
  while (base_ < leaves) base_ <<= 1;
  node_.assign(2 * base_, 0.0);
}

void IntensityTree::set(std::size_t i, double v) {
  std::size_t k = base_ + i;
  node_[k] = v;
  for (k >>= 1; k >= 1; k >>= 1) node_[k] = node_[2 * k] + node_[2 * k + 1];
}

std::size_t IntensityTree::find(double target) const {
  std::size_t k = 1;
  while (k < base_) {
    const double left = node_[2 * k];
    if (target < left || node_[2 * k + 1] <= 0.0) {
      k = 2 * k;
    } else {
      target -= left;
      k = 2 * k + 1;
    }
  }
  // Rounding can leave target on an empty leaf; step back to a live one.
  std::size_t i = k - base_;
  while (node_[base_ + i] <= 0.0 && i > 0) --i;
  return i;
}

double generator_apply(const std::function<double(const Configuration&)>& F,
                       const Configuration& eta, const Environment& env,
                       const RateFunction& g) {
  const TorusGrid& grid = eta.grid();
  const double base = F(eta);
  Configuration moved = eta;
  double acc = 0.0;
  for (Site x = 0; x < grid.size(); ++x) {
    if (eta[x] == 0) continue;
    const double gx = g(eta[x]);
    for (int k = 0; k < grid.directions(); ++k) {
      Site y = grid.neighbor(x, k);
      moved.jump(x, y);
      acc += env.jump_rate(x, k) * gx * (F(moved) - base);
      moved.jump(y, x);
    }
  }
  return acc;
}

namespace {

int pick_direction(const Environment& env, Site x, double u) {
  const int nd = env.grid().directions();
  double target = u * env.exit_rate(x);
  for (int k = 0; k < nd - 1; ++k) {
    target -= env.jump_rate(x, k);
    if (target < 0.0) return k;
  }
  return nd - 1;
}

void check_horizon(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw UsageError("simulation horizon must be positive");
  }
}

}  // namespace

TrajectoryRecord simulate(const Configuration& eta0, const Environment& env,
                          const RateFunction& g, double horizon, std::uint64_t seed) {
  check_horizon(horizon);
  if (!(eta0.grid() == env.grid())) throw UsageError("configuration and environment grids differ");
  TrajectoryRecord rec{eta0, {}, horizon, seed};
  std::vector<std::int32_t> occ(eta0.occupancy().begin(), eta0.occupancy().end());
  const TorusGrid& grid = env.grid();
  IntensityTree tree(grid.size());
  for (Site x = 0; x < grid.size(); ++x) {
    if (occ[x] > 0) tree.set(x, g(occ[x]) * env.exit_rate(x));
  }
  Rng rng(seed);
  double t = 0.0;
  while (true) {
    const double total = tree.total();
    if (!(total > 0.0)) break;
    t += rng.exponential(total);
    if (t > horizon) break;
    Site x = tree.find(rng.uniform() * total);
    int k = pick_direction(env, x, rng.uniform());
    Site y = grid.neighbor(x, k);
    --occ[x];
    ++occ[y];
    tree.set(x, occ[x] > 0 ? g(occ[x]) * env.exit_rate(x) : 0.0);
    tree.set(y, g(occ[y]) * env.exit_rate(y));
    rec.events.push_back({t, static_cast<std::uint32_t>(x), static_cast<std::uint8_t>(k)});
  }
  return rec;
}

Replay::Replay(const TrajectoryRecord& traj) : traj_(&traj), state_(traj.initial) {}

Replay::Jump Replay::advance() {
  const JumpEvent& e = traj_->events.at(next_++);
  Site x = e.source;
  Site y = state_.grid().neighbor(x, e.direction);
  state_.jump(x, y);
  now_ = e.time;
  return {x, y, e.time};
}

Configuration final_configuration(const TrajectoryRecord& traj) {
  Replay r(traj);
  while (!r.done()) r.advance();
  return r.state();
}

bool validate_trajectory(const TrajectoryRecord& traj) {
  double last = 0.0;
  for (const auto& e : traj.events) {
    if (!(e.time > last) || e.time > traj.horizon) return false;
    last = e.time;
  }
  try {
    Configuration fin = final_configuration(traj);
    return fin.total() == traj.initial.total();
  } catch (const PreconditionError&) {
    return false;
  }
}

double stationary_ratio(const RateFunction& g, std::int32_t eta_x, std::int32_t eta_y) {
  return g(eta_x) / g(static_cast<std::int64_t>(eta_y) + 1);
}

double detailed_balance_residual(const RateFunction& g, std::int32_t eta_x,
                                 std::int32_t eta_y, double p_xy, double p_yx) {
  if (eta_x < 1) throw PreconditionError("detailed balance needs eta(x) >= 1");
  const double forward = g(eta_x) * p_xy;
  const double backward =
      stationary_ratio(g, eta_x, eta_y) * g(static_cast<std::int64_t>(eta_y) + 1) * p_yx;
  return forward - backward;
}

double reversibility_residual(const Configuration& eta, Site x, int direction,
                              const FugacityTables& tables, const Environment& env, double rho) {
  const TorusGrid& grid = env.grid();
  if (x >= grid.size() || direction < 0 || direction >= grid.directions()) {
    throw UsageError("invalid bond");
  }
  Site y = grid.neighbor(x, direction);
  if (x == y) throw UsageError("bond is a self loop");
  const std::int32_t ex = eta[x], ey = eta[y];
  if (ex < 1) throw PreconditionError("detailed balance needs eta(x) >= 1");
  const auto P = tables.pmf(tables.alpha_of_density(rho));
  if (static_cast<std::size_t>(std::max(ex, ey + 1)) >= P.size()) {
    throw RangeError("occupation beyond the truncated marginal");
  }
  // nu(eta^{xy}) / nu(eta) from the marginal probabilities.
  const double ratio = (P[ex - 1] * P[ey + 1]) / (P[ex] * P[ey]);
  const RateFunction& g = tables.rate();
  const double forward = g(ex) * env.jump_rate(x, direction);
  const double backward = ratio * g(ey + 1) * env.jump_rate(y, opposite(direction));
  return (forward - backward) / forward;
}

CoupledTrajectory coupled_simulate(const Configuration& lower0,
                                   const Configuration& upper0,
                                   const Environment& env, const RateFunction& g,
                                   double horizon, std::uint64_t seed) {
  check_horizon(horizon);
  if (!g.non_decreasing()) throw PreconditionError("coupling needs a non-decreasing rate");
  if (!precedes(lower0, upper0)) throw PreconditionError("initial configurations are not ordered");
  if (!(lower0.grid() == env.grid())) throw UsageError("configuration and environment grids differ");

  CoupledTrajectory out{{lower0, {}, horizon, seed}, {upper0, {}, horizon, seed}, 0, 0};
  const TorusGrid& grid = env.grid();
  std::vector<std::int32_t> lo(lower0.occupancy().begin(), lower0.occupancy().end());
  std::vector<std::int32_t> up(upper0.occupancy().begin(), upper0.occupancy().end());
  IntensityTree tree(grid.size());
  auto refresh = [&](Site x) { tree.set(x, up[x] > 0 ? g(up[x]) * env.exit_rate(x) : 0.0); };
  for (Site x = 0; x < grid.size(); ++x) refresh(x);

  Rng rng(seed);
  double t = 0.0;
  while (true) {
    const double total = tree.total();
    if (!(total > 0.0)) break;
    t += rng.exponential(total);
    if (t > horizon) break;
    Site x = tree.find(rng.uniform() * total);
    int k = pick_direction(env, x, rng.uniform());
    Site y = grid.neighbor(x, k);
    const double follow = lo[x] > 0 ? g(lo[x]) / g(up[x]) : 0.0;
    const bool both = rng.uniform() < follow;
    --up[x];
    ++up[y];
    out.upper.events.push_back({t, static_cast<std::uint32_t>(x), static_cast<std::uint8_t>(k)});
    if (both) {
      --lo[x];
      ++lo[y];
      out.lower.events.push_back({t, static_cast<std::uint32_t>(x), static_cast<std::uint8_t>(k)});
    }
    refresh(x);
    refresh(y);
    ++out.audited_events;
    if (lo[x] > up[x] || lo[y] > up[y] || lo[x] < 0) ++out.order_violations;
  }
  return out;
}

double local_average(const Configuration& eta, Site x, int l) {
  const TorusGrid& grid = eta.grid();
  if (l < 0 || 2 * l + 1 > grid.side()) throw UsageError("averaging box exceeds the torus");
  if (x >= grid.size()) throw UsageError("site out of range");
  const int d = grid.dim();
  std::int64_t sum = 0;
  std::int64_t count = 0;
  Coords off{0, 0, 0};
  const int span = 2 * l + 1;
  std::int64_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= span;
  for (std::int64_t c = 0; c < cells; ++c) {
    std::int64_t r = c;
    for (int i = 0; i < d; ++i) {
      off[i] = static_cast<int>(r % span) - l;
      r /= span;
    }
    sum += eta[grid.translate(x, off)];
    ++count;
  }
  return static_cast<double>(sum) / static_cast<double>(count);
}

void write_csv(const TrajectoryRecord& traj, const nlohmann::json& provenance,
               std::ostream& out) {
  nlohmann::json header = provenance;
  header["seed"] = traj.seed;
  header["T"] = traj.horizon;
  header["N"] = traj.initial.grid().scale();
  header["d"] = traj.initial.grid().dim();
  header["events"] = traj.events.size();
  out << "# " << header.dump() << '\n';
  out << "event_index,time,source_site,direction\n";
  for (std::size_t i = 0; i < traj.events.size(); ++i) {
    const auto& e = traj.events[i];
    out << i << ',' << text::num(e.time) << ',' << e.source << ',' << int(e.direction) << '\n';
  }
}

}  // namespace zrp
