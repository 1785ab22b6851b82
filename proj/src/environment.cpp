#include "zrp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "text.hpp"
#include "zrp/errors.hpp"
#include "zrp/rng.hpp"

namespace zrp {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double natural_epsilon(std::initializer_list<double> values) {
  double lo = std::min(values);
  double hi = std::max(values);
  return std::min({lo, 1.0 / hi, 1.0});
}

void check_band(double a, double eps, const char* what) {
  if (!(a >= eps * (1.0 - 1e-15) && a <= (1.0 / eps) * (1.0 + 1e-15))) {
    throw ConfigError(std::string(what) + " = " + text::num(a) +
                      " outside the ellipticity band [" + text::num(eps) + ", " +
                      text::num(1.0 / eps) + "]");
  }
}

}  // namespace

EnvironmentModel::EnvironmentModel(Kind kind, double epsilon0)
    : kind_(kind), epsilon0_(epsilon0) {
  if (!(epsilon0 > 0.0 && epsilon0 <= 1.0)) {
    throw ConfigError("epsilon0 must lie in (0, 1]");
  }
  std::visit(overloaded{
                 [&](const ConstantConductance& c) { check_band(c.value, epsilon0, "constant"); },
                 [&](const IidUniformConductance&) {},
                 [&](const IidTwoPointConductance& c) {
                   check_band(c.low, epsilon0, "low");
                   check_band(c.high, epsilon0, "high");
                   if (!(c.p >= 0.0 && c.p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
                 },
                 [&](const CheckerboardConductance& c) {
                   check_band(c.even, epsilon0, "even");
                   check_band(c.odd, epsilon0, "odd");
                 },
             },
             kind_);
}

EnvironmentModel EnvironmentModel::constant(double c) {
  if (!(c > 0.0)) throw ConfigError("constant conductance must be positive");
  return EnvironmentModel(ConstantConductance{c}, natural_epsilon({c}));
}

EnvironmentModel EnvironmentModel::iid_uniform(double epsilon0) {
  return EnvironmentModel(IidUniformConductance{}, epsilon0);
}

EnvironmentModel EnvironmentModel::iid_two_point(double low, double high, double p) {
  if (!(low > 0.0 && high > 0.0)) throw ConfigError("conductances must be positive");
  return EnvironmentModel(IidTwoPointConductance{low, high, p},
                          natural_epsilon({low, high}));
}

EnvironmentModel EnvironmentModel::checkerboard(double even, double odd) {
  if (!(even > 0.0 && odd > 0.0)) throw ConfigError("conductances must be positive");
  return EnvironmentModel(CheckerboardConductance{even, odd},
                          natural_epsilon({even, odd}));
}

bool EnvironmentModel::is_iid() const {
  return std::holds_alternative<IidUniformConductance>(kind_) ||
         std::holds_alternative<IidTwoPointConductance>(kind_);
}

std::string EnvironmentModel::name() const {
  return std::visit(overloaded{
                        [](const ConstantConductance&) { return std::string("constant"); },
                        [](const IidUniformConductance&) { return std::string("iid_uniform"); },
                        [](const IidTwoPointConductance&) { return std::string("iid_two_point"); },
                        [](const CheckerboardConductance&) { return std::string("checkerboard"); },
                    },
                    kind_);
}

EnvironmentModel EnvironmentModel::from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    EnvironmentModel m = [&] {
      if (kind == "constant") return constant(j.at("value").get<double>());
      if (kind == "iid_uniform") return iid_uniform(j.at("epsilon0").get<double>());
      if (kind == "iid_two_point") {
        return iid_two_point(j.at("low").get<double>(), j.at("high").get<double>(),
                             j.at("p").get<double>());
      }
      if (kind == "checkerboard") {
        return checkerboard(j.at("even").get<double>(), j.at("odd").get<double>());
      }
      throw ConfigError("unknown environment kind '" + kind + "'");
    }();
    if (kind != "iid_uniform" && j.contains("epsilon0")) {
      m = EnvironmentModel(m.kind(), j.at("epsilon0").get<double>());
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("environment model: ") + e.what());
  }
}

json EnvironmentModel::to_json() const {
  json j = std::visit(
      overloaded{
          [](const ConstantConductance& c) { return json{{"kind", "constant"}, {"value", c.value}}; },
          [](const IidUniformConductance&) { return json{{"kind", "iid_uniform"}}; },
          [](const IidTwoPointConductance& c) {
            return json{{"kind", "iid_two_point"}, {"low", c.low}, {"high", c.high}, {"p", c.p}};
          },
          [](const CheckerboardConductance& c) {
            return json{{"kind", "checkerboard"}, {"even", c.even}, {"odd", c.odd}};
          },
      },
      kind_);
  j["epsilon0"] = epsilon0_;
  return j;
}

Environment::Environment(TorusGrid grid, EnvironmentModel model,
                         std::uint64_t seed, std::vector<double> conductances)
    : grid_(std::move(grid)),
      model_(std::move(model)),
      seed_(seed),
      n2_(static_cast<double>(grid_.scale()) * grid_.scale()),
      conductance_(std::move(conductances)) {
  if (conductance_.size() != grid_.size() * static_cast<std::size_t>(grid_.dim())) {
    throw UsageError("conductance count must equal sites * d");
  }
  const double eps = model_.epsilon0();
  for (double a : conductance_) check_band(a, eps, "conductance");
  exit_rate_.resize(grid_.size());
  for (Site x = 0; x < grid_.size(); ++x) {
    double r = 0.0;
    for (int k = 0; k < grid_.directions(); ++k) r += jump_rate(x, k);
    exit_rate_[x] = r;
  }
}

double Environment::mean_conductance(int axis) const {
  double s = 0.0;
  for (Site x = 0; x < grid_.size(); ++x) s += conductance(x, axis);
  return s / static_cast<double>(grid_.size());
}

Environment sample_environment(const EnvironmentModel& model,
                               const TorusGrid& grid, std::uint64_t seed,
                               const Coords& shift) {
  const int d = grid.dim();
  std::vector<double> a(grid.size() * static_cast<std::size_t>(d));
  for (Site x = 0; x < grid.size(); ++x) {
    Coords c = grid.coords(x);
    Coords key{0, 0, 0};
    int parity = 0;
    for (int i = 0; i < d; ++i) {
      key[i] = ((c[i] + shift[i]) % grid.side() + grid.side()) % grid.side();
      parity += key[i];
    }
    for (int axis = 0; axis < d; ++axis) {
      auto draw = [&] {
        Rng rng(derive_seed({seed, static_cast<std::uint64_t>(key[0]),
                             static_cast<std::uint64_t>(key[1]),
                             static_cast<std::uint64_t>(key[2]),
                             static_cast<std::uint64_t>(axis)}));
        return rng.uniform();
      };
      const double eps = model.epsilon0();
      a[x * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)] = std::visit(
          overloaded{
              [](const ConstantConductance& m) { return m.value; },
              [&](const IidUniformConductance&) { return eps + (1.0 / eps - eps) * draw(); },
              [&](const IidTwoPointConductance& m) { return draw() < m.p ? m.high : m.low; },
              [&](const CheckerboardConductance& m) { return parity % 2 == 0 ? m.even : m.odd; },
          },
          model.kind());
    }
  }
  return Environment(grid, model, seed, std::move(a));
}

double jump_rate(const Environment& env, Site x, int direction) {
  const TorusGrid& g = env.grid();
  if (x >= g.size() || direction < 0 || direction >= g.directions()) {
    throw UsageError("invalid site or direction");
  }
  return env.jump_rate(x, direction);
}

void write_csv(const Environment& env, std::ostream& out) {
  const TorusGrid& g = env.grid();
  json header{{"model", env.model().to_json()},
              {"seed", env.seed()},
              {"d", g.dim()},
              {"N", g.scale()}};
  out << "# " << header.dump() << '\n';
  out << "bond_id,site_index,direction,conductance\n";
  for (Site x = 0; x < g.size(); ++x) {
    for (int axis = 0; axis < g.dim(); ++axis) {
      out << x * static_cast<Site>(g.dim()) + static_cast<Site>(axis) << ',' << x << ','
          << 2 * axis << ',' << text::num(env.conductance(x, axis)) << '\n';
    }
  }
}

Environment read_environment_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw IoError("environment CSV lacks its JSON header line");
  }
  json header;
  try {
    header = json::parse(line.substr(2));
  } catch (const json::exception& e) {
    throw IoError(std::string("environment CSV header: ") + e.what());
  }
  TorusGrid grid(header.at("d").get<int>(), header.at("N").get<int>());
  auto model = EnvironmentModel::from_json(header.at("model"));
  std::getline(in, line);  // column names
  std::vector<double> a(grid.size() * static_cast<std::size_t>(grid.dim()), 0.0);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = text::split(line);
    if (cols.size() != 4) throw IoError("environment CSV row has wrong column count");
    auto id = text::to_int<std::size_t>(cols[0]);
    if (id >= a.size()) throw IoError("environment CSV bond id out of range");
    a[id] = text::to_double(cols[3]);
    ++rows;
  }
  if (rows != a.size()) throw IoError("environment CSV has wrong number of bonds");
  return Environment(grid, model, header.at("seed").get<std::uint64_t>(), std::move(a));
}

}  // namespace zrp
