#pragma once

// Experiment drivers behind run_experiment, and the config helpers they share.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "zrp/environment.hpp"
#include "zrp/harness.hpp"
#include "zrp/measures.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

struct RunContext {
  const ExperimentConfig& config;
  int workers;
};

void run_hydro(const RunContext& ctx, ExperimentReport& report);
void run_fluctuation(const RunContext& ctx, ExperimentReport& report);
void run_boltzmann_gibbs(const RunContext& ctx, ExperimentReport& report);
void run_homogenize(const RunContext& ctx, ExperimentReport& report);
void run_property_suite(const RunContext& ctx, ExperimentReport& report);

struct MeanSe {
  double mean;
  double se;  // sample standard deviation / sqrt(n); 0 for n < 2
};
MeanSe mean_se(std::span<const double> xs);

RateFunction rate_from(const nlohmann::json& raw, const char* key, const RateFunction& fallback);
EnvironmentModel environment_from(const nlohmann::json& raw, const EnvironmentModel& fallback);
TestFunction test_function_from(int dim, const nlohmann::json& raw, const char* key,
                                const nlohmann::json& fallback);

inline std::string tag(const std::string& base, int N) { return base + "_N" + std::to_string(N); }

}  // namespace zrp
