#include "zrp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "text.hpp"
#include "zrp/errors.hpp"

namespace zrp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::range: return "range";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::resource: return "resource";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

namespace {

int wrap(int j, int side) {
  j %= side;
  return j < 0 ? j + side : j;
}

}  // namespace

TorusGrid::TorusGrid(int dim, int scale) : dim_(dim), scale_(scale) {
  if (dim < 1 || dim > 3) throw UsageError("dimension must be 1, 2 or 3");
  if (scale < 1) throw UsageError("scale N must be >= 1");
  size_ = 1;
  for (int i = 0; i < 3; ++i) {
    stride_[i] = i < dim ? size_ : 0;
    if (i < dim) size_ *= static_cast<std::size_t>(side());
  }
  const auto nd = static_cast<std::size_t>(directions());
  neighbor_.resize(size_ * nd);
  for (Site x = 0; x < size_; ++x) {
    Coords c = coords(x);
    for (int k = 0; k < directions(); ++k) {
      Coords n = c;
      int axis = direction_axis(k);
      n[axis] = wrap(n[axis] + direction_sign(k), side());
      neighbor_[x * nd + static_cast<std::size_t>(k)] = index(n);
    }
  }
}

Site TorusGrid::index(const Coords& c) const {
  Site s = 0;
  for (int i = 0; i < dim_; ++i) {
    s += static_cast<Site>(wrap(c[i], side())) * stride_[i];
  }
  return s;
}

Coords TorusGrid::coords(Site x) const {
  Coords c{0, 0, 0};
  for (int i = 0; i < dim_; ++i) {
    c[i] = static_cast<int>((x / stride_[i]) % static_cast<Site>(side()));
  }
  return c;
}

Point TorusGrid::position(Site x) const {
  Coords c = coords(x);
  Point p{0.0, 0.0, 0.0};
  for (int i = 0; i < dim_; ++i) p[i] = coordinate(c[i]);
  return p;
}

std::vector<Neighbor> TorusGrid::neighbors(Site x) const {
  if (x >= size_) {
    throw UsageError("site index " + std::to_string(x) + " out of range");
  }
  std::vector<Neighbor> out;
  out.reserve(static_cast<std::size_t>(directions()));
  for (int k = 0; k < directions(); ++k) out.push_back({neighbor(x, k), k});
  return out;
}

Site TorusGrid::translate(Site x, const Coords& offset) const {
  Coords c = coords(x);
  for (int i = 0; i < dim_; ++i) c[i] += offset[i];
  return index(c);
}

GridFunction::GridFunction(const TorusGrid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

GridFunction::GridFunction(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw UsageError("grid function size does not match grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw UsageError("grid function value not finite");
  }
}

GridFunction GridFunction::sample(const TorusGrid& grid,
                                  const std::function<double(const Point&)>& f) {
  std::vector<double> v(grid.size());
  for (Site x = 0; x < grid.size(); ++x) v[x] = f(grid.position(x));
  return GridFunction(grid, std::move(v));
}

DiscreteNorms discrete_norms(const GridFunction& f) {
  const TorusGrid& g = f.grid();
  const double vol = std::pow(static_cast<double>(g.scale()), -g.dim());
  const double n2 = static_cast<double>(g.scale()) * g.scale();
  double sq = 0.0;
  double grad = 0.0;
  for (Site x = 0; x < g.size(); ++x) {
    sq += f[x] * f[x];
    for (int k = 0; k < g.directions(); ++k) {
      double diff = f[g.neighbor(x, k)] - f[x];
      grad += n2 * diff * diff;
    }
  }
  double norm0_sq = vol * sq;
  return {std::sqrt(norm0_sq), std::sqrt(norm0_sq + vol * grad)};
}

double inner_product(const GridFunction& f, const GridFunction& h) {
  const TorusGrid& g = f.grid();
  double s = 0.0;
  for (Site x = 0; x < g.size(); ++x) s += f[x] * h[x];
  return s * std::pow(static_cast<double>(g.scale()), -g.dim());
}

double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

Interpolant::Interpolant(GridFunction f, int order)
    : f_(std::move(f)), order_(order) {
  if (order != 0 && order != 1) throw UsageError("interpolation order must be 0 or 1");
}

double Interpolant::operator()(const Point& u) const {
  const TorusGrid& g = f_.grid();
  const int side = g.side();
  const int d = g.dim();
  if (order_ == 0) {
    // Cell of site j is [x_j - 1/2N, x_j + 1/2N).
    Coords c{0, 0, 0};
    for (int i = 0; i < d; ++i) {
      double s = g.scale() * (u[i] + 1.0) - 1.0;
      c[i] = wrap(static_cast<int>(std::floor(s + 0.5)), side);
    }
    return f_[g.index(c)];
  }
  Coords lo{0, 0, 0};
  std::array<double, 3> t{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    double s = g.scale() * (u[i] + 1.0) - 1.0;
    double fl = std::floor(s);
    t[i] = s - fl;
    lo[i] = static_cast<int>(fl);
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Coords c = lo;
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      bool up = (corner >> i) & 1;
      c[i] += up ? 1 : 0;
      w *= up ? t[i] : 1.0 - t[i];
    }
    if (w != 0.0) acc += w * f_[g.index(c)];
  }
  return acc;
}

Interpolant interpolate(const GridFunction& f, int order) {
  return Interpolant(f, order);
}

void write_csv(const GridFunction& f, std::ostream& out) {
  const TorusGrid& g = f.grid();
  out << "site_index";
  for (int i = 1; i <= g.dim(); ++i) out << ",x" << i;
  out << ",value\n";
  for (Site x = 0; x < g.size(); ++x) {
    out << x;
    Point p = g.position(x);
    for (int i = 0; i < g.dim(); ++i) out << ',' << text::num(p[i]);
    out << ',' << text::num(f[x]) << '\n';
  }
}

GridFunction read_grid_function_csv(const TorusGrid& grid, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty grid function CSV");
  std::vector<double> values(grid.size(), 0.0);
  std::vector<char> seen(grid.size(), 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = text::split(line);
    if (cols.size() != static_cast<std::size_t>(grid.dim()) + 2) {
      throw IoError("grid function CSV row has wrong column count");
    }
    auto x = text::to_int<Site>(cols.front());
    if (x >= grid.size()) throw IoError("grid function CSV site out of range");
    values[x] = text::to_double(cols.back());
    seen[x] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw IoError("grid function CSV is missing sites");
  }
  return GridFunction(grid, std::move(values));
}

}  // namespace zrp
