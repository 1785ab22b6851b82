#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "zrp/errors.hpp"
#include "zrp/harness.hpp"

using namespace zrp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("zrp_unit_" + name);
  fs::remove_all(p);
  return p;
}

json small_hydro() {
  return {{"kind", "hydro"}, {"d", 1},      {"N", {8, 16}},       {"trials", 12},
          {"seed", 5},       {"T", 0.01},   {"pde_cells", 32},    {"max_final_l2", 10.0}};
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(ExperimentConfig::from_json(small_hydro()));
  auto bad = [](json j) { CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError); };
  auto j = small_hydro();
  j["kind"] = "nonsense";
  bad(j);
  j = small_hydro();
  j["d"] = 4;
  bad(j);
  j = small_hydro();
  j["N"] = {16, 8};
  bad(j);
  j = small_hydro();
  j["trials"] = 0;
  bad(j);
  j = small_hydro();
  j["T"] = 0.0;
  bad(j);
  j = small_hydro();
  j["lambda"] = -1.0;
  bad(j);
  j = small_hydro();
  j.erase("N");
  bad(j);
  CHECK_THROWS_AS(load_config("/nonexistent/zrp.json"), IoError);
  auto c = ExperimentConfig::from_json(default_suite_config());
  CHECK(c.kind == ExperimentKind::property_suite);
}

TEST_CASE("comparison semantics") {
  CHECK(compare(Comparison::abs_le, 1.05, 1.0, 0.1));
  CHECK_FALSE(compare(Comparison::abs_le, 0.85, 1.0, 0.1));
  CHECK(compare(Comparison::lt, 0.99, 1.0, 5.0));
  CHECK_FALSE(compare(Comparison::lt, 1.0, 1.0, 5.0));
  CHECK(compare(Comparison::le, 1.05, 1.0, 0.1));
  CHECK_FALSE(compare(Comparison::le, 1.2, 1.0, 0.1));
  for (auto c : {Comparison::abs_le, Comparison::lt, Comparison::le}) {
    CHECK(comparison_from_string(to_string(c)) == c);
  }
}

TEST_CASE("report verdicts group by criterion") {
  ExperimentReport r;
  r.add("3", "a", 0.5, 1.0, 0.0, Comparison::le);
  r.add("3", "b", 2.0, 1.0, 0.0, Comparison::le);
  r.add("5", "c", 0.0, 0.0, 0.0, Comparison::abs_le);
  auto v = r.by_criterion();
  REQUIRE(v.size() == 2);
  CHECK(v[0] == std::pair<std::string, bool>{"3", false});
  CHECK(v[1] == std::pair<std::string, bool>{"5", true});
  CHECK_FALSE(r.passed());
  ExperimentReport ok;
  ok.add("1", "x", 0.0, 0.0, 0.0, Comparison::abs_le);
  CHECK(ok.passed());
  ok.failure = "config: broken";
  CHECK_FALSE(ok.passed());
}

TEST_CASE("parallel map is ordered and deterministic") {
  std::function<long(std::size_t)> sq = [](std::size_t i) { return static_cast<long>(i * i); };
  auto a = parallel_map(100, 1, sq);
  auto b = parallel_map(100, 4, sq);
  CHECK(a == b);
  CHECK(a[7] == 49);
  CHECK(parallel_map(0, 4, sq).empty());

  std::function<int(std::size_t)> boom = [](std::size_t i) -> int {
    if (i == 3 || i == 9) throw std::runtime_error("at " + std::to_string(i));
    return 0;
  };
  try {
    parallel_map(20, 4, boom);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "at 3");
  }
}

TEST_CASE("seeds differ by N, trial and master") {
  CHECK(trial_seed(1, 8, 0) != trial_seed(1, 8, 1));
  CHECK(trial_seed(1, 8, 0) != trial_seed(1, 16, 0));
  CHECK(trial_seed(1, 8, 0) != trial_seed(2, 8, 0));
  CHECK(trial_seed(1, 8, 0) == trial_seed(1, 8, 0));
  CHECK(environment_seed(1, 8) != trial_seed(1, 8, 0));
}

TEST_CASE("empty report emits header-only tables") {
  ExperimentReport r;
  r.config = ExperimentConfig::from_json(default_suite_config());
  auto dir = scratch("empty");
  emit_report(r, dir);
  CHECK(slurp(dir / "rows.csv") == "N,seed,trial,statistic,value\n");
  CHECK(slurp(dir / "criteria.csv") ==
        "id,name,observed,reference,tolerance,comparison,pass\n");
  auto summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("rows") == 0);
  auto chk = check_report_dir(dir);
  CHECK(chk.consistent);
  CHECK(chk.criteria == 0);
  fs::remove_all(dir);
}

TEST_CASE("runs are byte-identical across worker counts and re-emission") {
  auto config = ExperimentConfig::from_json(small_hydro());
  auto one = run_experiment(config, {1, std::nullopt});
  auto four = run_experiment(config, {4, std::nullopt});
  REQUIRE_FALSE(one.failure.has_value());
  auto d1 = scratch("w1"), d4 = scratch("w4"), again = scratch("w1b");
  emit_report(one, d1);
  emit_report(four, d4);
  emit_report(one, again);
  for (const char* f : {"rows.csv", "criteria.csv", "summary.json"}) {
    CHECK(slurp(d1 / f) == slurp(d4 / f));
    CHECK(slurp(d1 / f) == slurp(again / f));
  }
  CHECK(fs::exists(d1 / "profile_N16.csv"));

  auto other = run_experiment(config, {1, std::uint64_t{6}});
  CHECK(other.config.seed == 6);
  CHECK(other.rows.front().value != one.rows.front().value);

  auto chk = check_report_dir(d1);
  CHECK(chk.consistent);
  CHECK(chk.passed == one.passed());
  CHECK(chk.criteria == one.criteria.size());

  // A tampered verdict no longer agrees with its own numbers.
  auto text = slurp(d1 / "criteria.csv");
  auto pos = text.rfind(",1\n");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 3, ",0\n");
  std::ofstream(d1 / "criteria.csv", std::ios::binary) << text;
  CHECK_THROWS_AS(check_report_dir(d1), IoError);
  for (const auto& d : {d1, d4, again}) fs::remove_all(d);
}

TEST_CASE("module errors are recorded, not thrown") {
  auto j = small_hydro();
  j["pde_cells"] = 2;
  j["epsilon"] = 0.0;
  auto r = run_experiment(ExperimentConfig::from_json(j));
  REQUIRE(r.failure.has_value());
  CHECK_FALSE(r.passed());
}
