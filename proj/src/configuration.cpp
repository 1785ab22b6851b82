#include "zrp/configuration.hpp"

#include <string>

#include "zrp/environment.hpp"
#include "zrp/errors.hpp"
#include "zrp/measures.hpp"

namespace zrp {

Configuration::Configuration(const TorusGrid& grid, std::vector<std::int32_t> occupancy)
    : grid_(grid), occupancy_(std::move(occupancy)) {
  if (occupancy_.size() != grid_.size()) {
    throw UsageError("occupancy size does not match grid");
  }
  for (auto n : occupancy_) {
    if (n < 0) throw UsageError("occupancies must be nonnegative");
    total_ += n;
  }
}

void Configuration::set(Site x, std::int32_t n) {
  if (n < 0) throw UsageError("occupancies must be nonnegative");
  total_ += n - occupancy_.at(x);
  occupancy_[x] = n;
  cached_intensity_.reset();
}

void Configuration::jump(Site from, Site to) {
  if (occupancy_.at(from) == 0) {
    throw PreconditionError("jump from empty site " + std::to_string(from));
  }
  --occupancy_[from];
  ++occupancy_.at(to);
  cached_intensity_.reset();
}

double Configuration::intensity(const Environment& env, const RateFunction& g) const {
  if (!cached_intensity_) {
    double s = 0.0;
    for (Site x = 0; x < occupancy_.size(); ++x) {
      if (occupancy_[x] > 0) s += g(occupancy_[x]) * env.exit_rate(x);
    }
    cached_intensity_ = s;
  }
  return *cached_intensity_;
}

bool precedes(const Configuration& lower, const Configuration& upper) {
  if (!(lower.grid() == upper.grid())) return false;
  for (Site x = 0; x < lower.size(); ++x) {
    if (lower[x] > upper[x]) return false;
  }
  return true;
}

}  // namespace zrp
