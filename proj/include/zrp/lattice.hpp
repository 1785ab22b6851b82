#pragma once

// Discrete torus {-1+1/N, ..., 1}^d with (2N)^d sites, functions on it,
// the discrete L2/H1 norms and the interpolation operators onto [-1,1]^d.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace zrp {

using Site = std::size_t;
using Coords = std::array<int, 3>;
using Point = std::array<double, 3>;

// Directions are numbered 2*axis + s with s = 0 for +e_axis and s = 1 for
// -e_axis, so opposite(k) == k ^ 1.
inline int direction_axis(int direction) { return direction >> 1; }
inline int direction_sign(int direction) { return (direction & 1) ? -1 : 1; }
inline int opposite(int direction) { return direction ^ 1; }

struct Neighbor {
  Site site;
  int direction;
};

class TorusGrid {
 public:
  TorusGrid(int dim, int scale);

  int dim() const { return dim_; }
  int scale() const { return scale_; }
  int side() const { return 2 * scale_; }
  std::size_t size() const { return size_; }
  int directions() const { return 2 * dim_; }

  // Lattice coordinates are integers in [0, 2N); entries past dim() are 0.
  Site index(const Coords& c) const;
  Coords coords(Site x) const;

  // Maps lattice coordinate j to -1 + (j+1)/N.
  double coordinate(int j) const {
    return -1.0 + static_cast<double>(j + 1) / scale_;
  }
  Point position(Site x) const;

  Site neighbor(Site x, int direction) const {
    return neighbor_[x * static_cast<std::size_t>(directions()) +
                     static_cast<std::size_t>(direction)];
  }
  std::vector<Neighbor> neighbors(Site x) const;

  // Site reached from x by the integer offset (periodic).
  Site translate(Site x, const Coords& offset) const;

  bool operator==(const TorusGrid& o) const {
    return dim_ == o.dim_ && scale_ == o.scale_;
  }

 private:
  int dim_;
  int scale_;
  std::size_t size_;
  std::array<std::size_t, 3> stride_{};
  std::vector<Site> neighbor_;
};

class GridFunction {
 public:
  explicit GridFunction(const TorusGrid& grid, double fill = 0.0);
  GridFunction(const TorusGrid& grid, std::vector<double> values);

  static GridFunction sample(const TorusGrid& grid,
                             const std::function<double(const Point&)>& f);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](Site x) const { return values_[x]; }
  double& operator[](Site x) { return values_[x]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

struct DiscreteNorms {
  double norm0;
  double norm1;
};

// ||f||_{0,N}^2 = N^-d sum f^2;  ||f||_{1,N}^2 adds N^-d sum over ordered
// neighbor pairs of N^2 (f(y)-f(x))^2, i.e. every bond counted twice.
DiscreteNorms discrete_norms(const GridFunction& f);

// <f, h>_N = N^-d sum f h.
double inner_product(const GridFunction& f, const GridFunction& h);

double sup_norm(const GridFunction& f);

// T_N^0 (order 0, piecewise constant on half-open cells centred at sites)
// and T_N^1 (order 1, multilinear on the cells spanned by sites).
class Interpolant {
 public:
  Interpolant(GridFunction f, int order);

  double operator()(const Point& u) const;
  int order() const { return order_; }

 private:
  GridFunction f_;
  int order_;
};

Interpolant interpolate(const GridFunction& f, int order);

// CSV columns: site_index, x1..xd, value.
void write_csv(const GridFunction& f, std::ostream& out);
GridFunction read_grid_function_csv(const TorusGrid& grid, std::istream& in);

}  // namespace zrp
