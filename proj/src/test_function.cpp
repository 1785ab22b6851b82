#include "zrp/test_function.hpp"

#include <cmath>
#include <numbers>

#include "zrp/errors.hpp"

namespace zrp {

using nlohmann::json;

FourierSeries::FourierSeries(int dim, std::vector<FourierMode> modes)
    : dim_(dim), modes_(std::move(modes)) {
  if (dim < 1 || dim > 3) throw UsageError("dimension must be 1, 2 or 3");
  for (const auto& m : modes_) {
    for (int i = dim; i < 3; ++i) {
      if (m.k[i] != 0) throw UsageError("Fourier mode has components beyond dimension");
    }
  }
}

FourierSeries FourierSeries::from_json(int dim, const json& j) {
  try {
    std::vector<FourierMode> modes;
    if (j.contains("constant")) {
      modes.push_back({{0, 0, 0}, j.at("constant").get<double>(), 0.0});
    }
    for (const auto& m : j.value("modes", json::array())) {
      FourierMode mode;
      auto k = m.at("k").get<std::vector<int>>();
      if (k.size() != static_cast<std::size_t>(dim)) {
        throw ConfigError("Fourier mode wave vector has wrong length");
      }
      for (std::size_t i = 0; i < k.size(); ++i) mode.k[i] = k[i];
      mode.cos_coef = m.value("cos", 0.0);
      mode.sin_coef = m.value("sin", 0.0);
      modes.push_back(mode);
    }
    return FourierSeries(dim, std::move(modes));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("Fourier series: ") + e.what());
  }
}

json FourierSeries::to_json() const {
  json modes = json::array();
  for (const auto& m : modes_) {
    modes.push_back({{"k", std::vector<int>(m.k.begin(), m.k.begin() + dim_)},
                     {"cos", m.cos_coef},
                     {"sin", m.sin_coef}});
  }
  return json{{"modes", modes}};
}

namespace {

double phase(const FourierMode& m, const Point& u, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += m.k[i] * u[i];
  return std::numbers::pi * s;
}

}  // namespace

double FourierSeries::value(const Point& u) const {
  double v = 0.0;
  for (const auto& m : modes_) {
    double th = phase(m, u, dim_);
    v += m.cos_coef * std::cos(th) + m.sin_coef * std::sin(th);
  }
  return v;
}

Point FourierSeries::gradient(const Point& u) const {
  Point g{0.0, 0.0, 0.0};
  for (const auto& m : modes_) {
    double th = phase(m, u, dim_);
    double dv = -m.cos_coef * std::sin(th) + m.sin_coef * std::cos(th);
    for (int i = 0; i < dim_; ++i) g[i] += std::numbers::pi * m.k[i] * dv;
  }
  return g;
}

Matrix3 FourierSeries::hessian(const Point& u) const {
  Matrix3 h{};
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (const auto& m : modes_) {
    double v = m.cos_coef * std::cos(phase(m, u, dim_)) + m.sin_coef * std::sin(phase(m, u, dim_));
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) h[3 * i + j] -= pi2 * m.k[i] * m.k[j] * v;
    }
  }
  return h;
}

TestFunction TestFunction::constant(int dim, double c) {
  return fourier(FourierSeries(dim, {{{0, 0, 0}, c, 0.0}}));
}

TestFunction TestFunction::fourier(FourierSeries series) {
  TestFunction f;
  f.dim_ = series.dim();
  f.series_ = series;
  f.value_ = [s = series](const Point& u) { return s.value(u); };
  f.gradient_ = [s = series](const Point& u) { return s.gradient(u); };
  f.hessian_ = [s = series](const Point& u) { return s.hessian(u); };
  return f;
}

TestFunction TestFunction::from_callables(int dim, Value value, Gradient gradient,
                                          Hessian hessian) {
  if (!value) throw UsageError("test function needs a value callable");
  TestFunction f;
  f.dim_ = dim;
  f.value_ = std::move(value);
  f.gradient_ = std::move(gradient);
  f.hessian_ = std::move(hessian);
  return f;
}

Point TestFunction::gradient(const Point& u) const {
  if (!gradient_) throw UsageError("test function has no gradient data");
  return gradient_(u);
}

Matrix3 TestFunction::hessian(const Point& u) const {
  if (!hessian_) throw UsageError("test function has no second-derivative data");
  return hessian_(u);
}

double TestFunction::div_a_grad(const Matrix3& a, const Point& u) const {
  Matrix3 h = hessian(u);
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) s += a[3 * i + j] * h[3 * i + j];
  }
  return s;
}

GridFunction TestFunction::on_grid(const TorusGrid& grid) const {
  if (grid.dim() != dim_) throw UsageError("test function dimension does not match grid");
  return GridFunction::sample(grid, value_);
}

}  // namespace zrp
