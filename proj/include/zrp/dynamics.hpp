#pragma once

// Exact event-driven simulation of the zero-range process with generator
// L_N f(eta) = sum_{x,y} p_N(x,y) g(eta(x)) [f(eta^{xy}) - f(eta)].

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "zrp/configuration.hpp"
#include "zrp/environment.hpp"
#include "zrp/measures.hpp"

namespace zrp {

struct JumpEvent {
  double time;
  std::uint32_t source;
  std::uint8_t direction;
};

struct TrajectoryRecord {
  Configuration initial;
  std::vector<JumpEvent> events;
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

// Binary tree of partial sums over per-site intensities. Parents are
// recomputed from their children on every update, so totals do not drift.
class IntensityTree {
 public:
  explicit IntensityTree(std::size_t leaves);

  void set(std::size_t i, double v);
  double total() const { return node_[1]; }
  double leaf(std::size_t i) const { return node_[base_ + i]; }
  // Index i with prefix(i) <= target < prefix(i+1); target in [0, total).
  std::size_t find(double target) const;

 private:
  std::size_t base_;
  std::vector<double> node_;
};

double generator_apply(const std::function<double(const Configuration&)>& F,
                       const Configuration& eta, const Environment& env,
                       const RateFunction& g);

TrajectoryRecord simulate(const Configuration& eta0, const Environment& env,
                          const RateFunction& g, double horizon, std::uint64_t seed);

// Walks a trajectory event by event, exposing the piecewise-constant path.
class Replay {
 public:
  explicit Replay(const TrajectoryRecord& traj);

  bool done() const { return next_ == traj_->events.size(); }
  double now() const { return now_; }
  // Time of the next event, or the horizon when done.
  double next_time() const {
    return done() ? traj_->horizon : traj_->events[next_].time;
  }
  const Configuration& state() const { return state_; }

  struct Jump {
    Site source;
    Site target;
    double time;
  };
  // Applies the next event; throws PreconditionError on a negative count.
  Jump advance();

 private:
  const TrajectoryRecord* traj_;
  Configuration state_;
  std::size_t next_ = 0;
  double now_ = 0.0;
};

Configuration final_configuration(const TrajectoryRecord& traj);

// Checks event ordering, horizon bounds and nonnegativity along the replay.
bool validate_trajectory(const TrajectoryRecord& traj);

// Residual of detailed balance on one bond, divided by nu_rho(eta):
// g(eta(x)) p(x,y) - [nu(eta^{xy})/nu(eta)] g(eta(y)+1) p(y,x), where the
// ratio equals g(eta(x)) / g(eta(y)+1) and does not depend on rho.
double detailed_balance_residual(const RateFunction& g, std::int32_t eta_x,
                                 std::int32_t eta_y, double p_xy, double p_yx);
// Relative residual of detailed balance on the bond (x, x+e), with the
// stationary ratio taken from the marginal pmf of nu_rho.
double reversibility_residual(const Configuration& eta, Site x, int direction,
                              const FugacityTables& tables, const Environment& env,
                              double rho = 1.0);
// nu_rho(eta^{xy}) / nu_rho(eta) from the rate function.
double stationary_ratio(const RateFunction& g, std::int32_t eta_x, std::int32_t eta_y);

struct CoupledTrajectory {
  TrajectoryRecord lower;
  TrajectoryRecord upper;
  std::uint64_t audited_events = 0;
  std::uint64_t order_violations = 0;
};

// Basic coupling: bond clocks run at the upper copy's rate; the lower copy
// follows a jump with probability g(eta(x)) / g(eta'(x)).
CoupledTrajectory coupled_simulate(const Configuration& lower0,
                                   const Configuration& upper0,
                                   const Environment& env, const RateFunction& g,
                                   double horizon, std::uint64_t seed);

// eta^l(x): average over the box of half-width l (sup norm) around x.
double local_average(const Configuration& eta, Site x, int l);

// CSV (event_index, time, source_site, direction) after a `# {json}` line.
void write_csv(const TrajectoryRecord& traj, const nlohmann::json& provenance,
               std::ostream& out);

}  // namespace zrp
