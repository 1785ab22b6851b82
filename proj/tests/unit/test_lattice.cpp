#include <doctest.h>

#include <cmath>
#include <sstream>

#include "zrp/errors.hpp"
#include "zrp/lattice.hpp"

using namespace zrp;

TEST_CASE("torus indexing round-trips and wraps") {
  for (int d = 1; d <= 3; ++d) {
    TorusGrid g(d, 3);
    CHECK(g.size() == static_cast<std::size_t>(std::pow(6, d)));
    for (Site x = 0; x < g.size(); ++x) {
      CHECK(g.index(g.coords(x)) == x);
      for (int k = 0; k < g.directions(); ++k) {
        CHECK(g.neighbor(g.neighbor(x, k), opposite(k)) == x);
      }
    }
  }
  TorusGrid g(1, 4);
  CHECK(g.neighbor(g.index({7, 0, 0}), 0) == g.index({0, 0, 0}));
  CHECK(g.translate(g.index({1, 0, 0}), {-3, 0, 0}) == g.index({6, 0, 0}));
}

TEST_CASE("site coordinates run from -1+1/N to 1") {
  TorusGrid g(1, 4);
  CHECK(g.position(0)[0] == doctest::Approx(-0.75));
  CHECK(g.position(g.size() - 1)[0] == doctest::Approx(1.0));
}

TEST_CASE("discrete norms of constants and of a single mode") {
  TorusGrid g(2, 5);
  GridFunction c(g, 3.0);
  auto n = discrete_norms(c);
  CHECK(n.norm0 == doctest::Approx(std::sqrt(4.0 * 9.0)));
  CHECK(n.norm1 == doctest::Approx(n.norm0));

  TorusGrid h(1, 64);
  auto f = GridFunction::sample(h, [](const Point& u) { return std::cos(M_PI * u[0]); });
  // N^-1 sum cos^2 over 2N sites is exactly 1.
  CHECK(discrete_norms(f).norm0 == doctest::Approx(1.0).epsilon(1e-12));
  // Ordered pairs: 2 * N^-1 sum N^2 (f(x+1)-f(x))^2 = 4 N^2 (1 - cos(pi/N)).
  const double grad = 4.0 * 64 * 64 * (1.0 - std::cos(M_PI / 64));
  CHECK(discrete_norms(f).norm1 == doctest::Approx(std::sqrt(1.0 + grad)).epsilon(1e-12));
  CHECK(inner_product(f, f) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interpolants reproduce site values") {
  TorusGrid g(2, 3);
  auto f = GridFunction::sample(g, [](const Point& u) { return u[0] + 2.0 * u[1]; });
  Interpolant i0(f, 0), i1(f, 1);
  for (Site x = 0; x < g.size(); ++x) {
    CHECK(i0(g.position(x)) == doctest::Approx(f[x]));
    CHECK(i1(g.position(x)) == doctest::Approx(f[x]));
  }
  // Order 1 is linear between neighboring sites away from the seam.
  Point mid{-0.5, 0.0, 0.0};
  Point a{-2.0 / 3.0, 0.0, 0.0}, b{-1.0 / 3.0, 0.0, 0.0};
  CHECK(i1(mid) == doctest::Approx(0.5 * (i1(a) + i1(b))));
}

TEST_CASE("grid function CSV round trip") {
  TorusGrid g(2, 2);
  auto f = GridFunction::sample(g, [](const Point& u) { return std::sin(u[0]) + u[1] / 3.0; });
  std::stringstream s;
  write_csv(f, s);
  auto back = read_grid_function_csv(g, s);
  for (Site x = 0; x < g.size(); ++x) CHECK(back[x] == f[x]);
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(TorusGrid(0, 4), UsageError);
  CHECK_THROWS_AS(TorusGrid(4, 4), UsageError);
  CHECK_THROWS_AS(TorusGrid(1, 0), UsageError);
}
