#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "zrp/lattice.hpp"

namespace zrp {

class Environment;
class RateFunction;

// Occupation numbers eta(x) on the torus.
class Configuration {
 public:
  explicit Configuration(const TorusGrid& grid)
      : grid_(grid), occupancy_(grid.size(), 0) {}
  Configuration(const TorusGrid& grid, std::vector<std::int32_t> occupancy);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return occupancy_.size(); }
  std::int32_t operator[](Site x) const { return occupancy_[x]; }
  std::span<const std::int32_t> occupancy() const { return occupancy_; }
  std::int64_t total() const { return total_; }

  void set(Site x, std::int32_t n);
  // eta -> eta^{xy}; throws PreconditionError if eta(x) == 0.
  void jump(Site from, Site to);

  // Sum_x g(eta(x)) * sum_y p_N(x, y); cached until the next mutation.
  double intensity(const Environment& env, const RateFunction& g) const;
  std::optional<double> cached_intensity() const { return cached_intensity_; }

  bool operator==(const Configuration& o) const {
    return grid_ == o.grid_ && occupancy_ == o.occupancy_;
  }

 private:
  TorusGrid grid_;
  std::vector<std::int32_t> occupancy_;
  std::int64_t total_ = 0;
  mutable std::optional<double> cached_intensity_;
};

// eta <= eta' sitewise.
bool precedes(const Configuration& lower, const Configuration& upper);

}  // namespace zrp
