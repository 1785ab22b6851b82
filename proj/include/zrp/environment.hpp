#pragma once

// Random symmetric bond conductances a_i(theta_{Nx} omega) on the torus and
// the jump rates p_N(x, x +- e_i/N) = N^2 a_i derived from them.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "zrp/lattice.hpp"

namespace zrp {

struct ConstantConductance {
  double value;
};

// Uniform on [epsilon0, 1/epsilon0].
struct IidUniformConductance {};

// `high` with probability p, `low` otherwise.
struct IidTwoPointConductance {
  double low;
  double high;
  double p;
};

// `even` on bonds whose lower endpoint has even coordinate sum.
struct CheckerboardConductance {
  double even;
  double odd;
};

class EnvironmentModel {
 public:
  using Kind = std::variant<ConstantConductance, IidUniformConductance,
                            IidTwoPointConductance, CheckerboardConductance>;

  EnvironmentModel(Kind kind, double epsilon0);

  static EnvironmentModel constant(double c);
  static EnvironmentModel iid_uniform(double epsilon0);
  static EnvironmentModel iid_two_point(double low, double high, double p);
  static EnvironmentModel checkerboard(double even, double odd);

  static EnvironmentModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const Kind& kind() const { return kind_; }
  double epsilon0() const { return epsilon0_; }
  bool is_iid() const;
  std::string name() const;

 private:
  Kind kind_;
  double epsilon0_;
};

class Environment {
 public:
  Environment(TorusGrid grid, EnvironmentModel model, std::uint64_t seed,
              std::vector<double> conductances);

  const TorusGrid& grid() const { return grid_; }
  const EnvironmentModel& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }

  // Conductance of the bond (x, x + e_axis/N).
  double conductance(Site x, int axis) const {
    return conductance_[x * static_cast<std::size_t>(grid_.dim()) +
                        static_cast<std::size_t>(axis)];
  }
  // Conductance of the bond crossed when leaving x in `direction`.
  double bond(Site x, int direction) const {
    int axis = direction_axis(direction);
    return direction_sign(direction) > 0
               ? conductance(x, axis)
               : conductance(grid_.neighbor(x, direction), axis);
  }
  double jump_rate(Site x, int direction) const { return n2_ * bond(x, direction); }
  // Sum of p_N(x, y) over the 2d neighbors y.
  double exit_rate(Site x) const { return exit_rate_[x]; }

  std::span<const double> conductances() const { return conductance_; }
  double mean_conductance(int axis) const;

 private:
  TorusGrid grid_;
  EnvironmentModel model_;
  std::uint64_t seed_;
  double n2_;
  std::vector<double> conductance_;
  std::vector<double> exit_rate_;
};

// Each bond draws from its own stream keyed by (seed, lattice coordinates of
// its lower endpoint + shift, axis), so the field does not depend on
// evaluation order and sampling with a shift yields the translated field.
Environment sample_environment(const EnvironmentModel& model,
                               const TorusGrid& grid, std::uint64_t seed,
                               const Coords& shift = {0, 0, 0});

double jump_rate(const Environment& env, Site x, int direction);

// CSV (bond_id, site_index, direction, conductance) preceded by a
// `# {json}` header line holding model, seed, d and N.
void write_csv(const Environment& env, std::ostream& out);
Environment read_environment_csv(std::istream& in);

}  // namespace zrp
