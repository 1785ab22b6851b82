#include "zrp/harness.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "experiments.hpp"
#include "text.hpp"
#include "zrp/errors.hpp"
#include "zrp/rng.hpp"

namespace zrp {

using nlohmann::json;

const char* version() { return "1.0.0"; }

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::hydro: return "hydro";
    case ExperimentKind::fluctuation: return "fluctuation";
    case ExperimentKind::boltzmann_gibbs: return "boltzmann_gibbs";
    case ExperimentKind::homogenize: return "homogenize";
    case ExperimentKind::property_suite: return "property_suite";
  }
  return "?";
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::hydro, ExperimentKind::fluctuation,
                 ExperimentKind::boltzmann_gibbs, ExperimentKind::homogenize,
                 ExperimentKind::property_suite}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown experiment kind '" + s + "'");
}

bool needs_trajectories(ExperimentKind k) {
  return k == ExperimentKind::hydro || k == ExperimentKind::fluctuation ||
         k == ExperimentKind::boltzmann_gibbs;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig c;
  try {
    c.kind = kind_from_string(j.at("kind").get<std::string>());
    c.dim = j.value("d", 1);
    c.N = j.value("N", std::vector<int>{});
    c.trials = j.value("trials", 1);
    c.seed = j.value("seed", std::uint64_t{1});
    c.T = j.value("T", 0.0);
    c.rho = j.value("rho", 1.0);
    c.lambda = j.value("lambda", 1.0);
    c.output = j.value("output", std::string{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  if (c.dim < 1 || c.dim > 3) throw ConfigError("d must be 1, 2 or 3");
  for (std::size_t i = 0; i < c.N.size(); ++i) {
    if (c.N[i] < 1) throw ConfigError("N values must be positive");
    if (i > 0 && c.N[i] <= c.N[i - 1]) throw ConfigError("N list must be strictly ascending");
  }
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  if (!(c.lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(c.rho >= 0.0)) throw ConfigError("rho must be nonnegative");
  if (needs_trajectories(c.kind)) {
    if (c.N.empty()) throw ConfigError("N list is required");
    if (!(c.T > 0.0)) throw ConfigError("T must be positive");
  }
  c.raw = j;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::abs_le: return "abs_le";
    case Comparison::lt: return "lt";
    case Comparison::le: return "le";
  }
  return "?";
}

Comparison comparison_from_string(const std::string& s) {
  if (s == "abs_le") return Comparison::abs_le;
  if (s == "lt") return Comparison::lt;
  if (s == "le") return Comparison::le;
  throw IoError("unknown comparison '" + s + "'");
}

bool compare(Comparison c, double observed, double reference, double tolerance) {
  switch (c) {
    case Comparison::abs_le: return std::abs(observed - reference) <= tolerance;
    case Comparison::lt: return observed < reference;
    case Comparison::le: return observed <= reference + tolerance;
  }
  return false;
}

void ExperimentReport::add(const std::string& id, const std::string& name, double observed,
                           double reference, double tolerance, Comparison c) {
  criteria.push_back({id, name, observed, reference, tolerance, c,
                      compare(c, observed, reference, tolerance)});
}

bool ExperimentReport::passed() const {
  if (failure) return false;
  for (const auto& c : criteria) {
    if (!c.pass) return false;
  }
  return true;
}

std::vector<std::pair<std::string, bool>> ExperimentReport::by_criterion() const {
  std::vector<std::pair<std::string, bool>> out;
  for (const auto& c : criteria) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == c.id; });
    if (it == out.end()) {
      out.emplace_back(c.id, c.pass);
    } else {
      it->second = it->second && c.pass;
    }
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, int N, long trial) {
  return derive_seed({master, static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(trial)});
}

std::uint64_t environment_seed(std::uint64_t master, int N) {
  return derive_seed({master, static_cast<std::uint64_t>(N), ~std::uint64_t{0}});
}

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentReport report;
  report.config = config;
  if (options.seed) {
    report.config.seed = *options.seed;
    report.config.raw["seed"] = *options.seed;
  }
  const auto start = std::chrono::steady_clock::now();
  RunContext ctx{report.config, std::max(1, options.workers)};
  try {
    switch (report.config.kind) {
      case ExperimentKind::hydro: run_hydro(ctx, report); break;
      case ExperimentKind::fluctuation: run_fluctuation(ctx, report); break;
      case ExperimentKind::boltzmann_gibbs: run_boltzmann_gibbs(ctx, report); break;
      case ExperimentKind::homogenize: run_homogenize(ctx, report); break;
      case ExperimentKind::property_suite: run_property_suite(ctx, report); break;
    }
  } catch (const Error& e) {
    report.failure = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    report.failure = std::string("internal: ") + e.what();
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out) throw IoError("write failed for " + p.string());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream rows;
  rows << "N,seed,trial,statistic,value\n";
  for (const auto& r : report.rows) {
    rows << r.N << ',' << r.seed << ',' << r.trial << ',' << r.statistic << ','
         << text::num(r.value) << '\n';
  }
  write_file(dir / "rows.csv", rows.str());

  std::ostringstream crit;
  crit << "id,name,observed,reference,tolerance,comparison,pass\n";
  for (const auto& c : report.criteria) {
    crit << c.id << ',' << c.name << ',' << text::num(c.observed) << ','
         << text::num(c.reference) << ',' << text::num(c.tolerance) << ','
         << to_string(c.comparison) << ',' << (c.pass ? 1 : 0) << '\n';
  }
  write_file(dir / "criteria.csv", crit.str());

  json criteria = json::array();
  for (const auto& c : report.criteria) {
    criteria.push_back({{"id", c.id},
                        {"name", c.name},
                        {"observed", c.observed},
                        {"reference", c.reference},
                        {"tolerance", c.tolerance},
                        {"comparison", to_string(c.comparison)},
                        {"pass", c.pass}});
  }
  json verdicts = json::object();
  for (const auto& [id, pass] : report.by_criterion()) verdicts[id] = pass;
  json summary{{"version", version()},
               {"kind", to_string(report.config.kind)},
               {"config", report.config.raw},
               {"criteria", criteria},
               {"verdicts", verdicts},
               {"statistics", report.statistics},
               {"rows", report.rows.size()},
               {"pass", report.passed()},
               {"failure", report.failure ? json(*report.failure) : json(nullptr)}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  std::ostringstream digest;
  digest << "zrp " << version() << "  kind=" << to_string(report.config.kind)
         << "  seed=" << report.config.seed << "  wall=" << text::num(report.wall_seconds)
         << "s\n";
  for (const auto& c : report.criteria) {
    digest << (c.pass ? "PASS " : "FAIL ") << c.id << ' ' << c.name
           << "  observed=" << text::num(c.observed) << "  reference=" << text::num(c.reference)
           << "  tolerance=" << text::num(c.tolerance) << "  (" << to_string(c.comparison)
           << ")\n";
  }
  if (report.failure) digest << "FAILED: " << *report.failure << '\n';
  digest << (report.passed() ? "overall: PASS\n" : "overall: FAIL\n");
  write_file(dir / "digest.txt", digest.str());

  for (const auto& [name, content] : report.artifacts) write_file(dir / name, content);
}

ReportCheck check_report_dir(const std::filesystem::path& dir) {
  ReportCheck out;
  std::istringstream crit(read_file(dir / "criteria.csv"));
  std::string line;
  if (!std::getline(crit, line) || line != "id,name,observed,reference,tolerance,comparison,pass") {
    throw IoError("criteria.csv has an unexpected header");
  }
  bool all = true;
  while (std::getline(crit, line)) {
    if (line.empty()) continue;
    auto f = text::split(line);
    if (f.size() != 7) throw IoError("malformed criteria row: " + line);
    bool pass = compare(comparison_from_string(f[5]), text::to_double(f[2]),
                        text::to_double(f[3]), text::to_double(f[4]));
    if (pass != (f[6] == "1")) throw IoError("criteria row disagrees with its comparison: " + line);
    if (!pass) out.failing.push_back(f[0] + " " + f[1]);
    all = all && pass;
    ++out.criteria;
  }
  json summary;
  try {
    summary = json::parse(read_file(dir / "summary.json"));
  } catch (const json::exception& e) {
    throw IoError(std::string("summary.json: ") + e.what());
  }
  const bool failed_run = !summary.value("failure", json(nullptr)).is_null();
  out.passed = all && !failed_run;
  out.consistent = summary.value("pass", false) == out.passed;
  return out;
}

}  // namespace zrp
