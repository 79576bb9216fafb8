#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idid/rng.hpp"
#include "idid/types.hpp"

namespace idid {

enum class DgpVariant {
  Case1,  // P(Z=1) = 0.5
  Case2,  // P(Z=1|x) = exp(-0.5x) / (1 + exp(-0.5x))
};

struct DgpCase {
  DgpVariant variant = DgpVariant::Case1;
  int n = 20000;
};

/// Truncated standard normal on (-1, 1), inverse-CDF sampled.
double sample_truncated_normal(RngStream& rng);

/// One synthetic sample: per row draw T ~ Bern(0.5), X ~ N(0,1), Z by case,
/// U_t = t + TN(0,1,(-1,1)), eps_t ~ N(0,1), D_t ~ Bern((Z+1)U_t/8 + 0.5),
/// Y_t = (1+X)D_t + 2 + 2U_t + Z + X + eps_t; observe the T-selected arm.
/// Both potential arms are drawn for every row so streams stay aligned.
Dataset generate_case_data(const DgpCase& dgp, RngStream& rng);

/// Which nuisances use their correct specification; the rest use the
/// misspecification devices (logistic exposure model; exp(x/2) substitution
/// for the outcome model and the propensity).
struct Scenario {
  bool pi_correct = true;
  bool mu_d_correct = true;
  bool mu_y_correct = true;
  std::string label() const;
  static Scenario parse(const std::string& token);  // e.g. "pi+mu_d+mu_y", "none"
};

enum class SimEstimator { Ols, StandardIv, Wald, SemiparConstant, SemiparLinear };

SimEstimator parse_sim_estimator(const std::string& name);
std::string sim_estimator_name(SimEstimator estimator);

struct ScenarioGrid {
  std::vector<Scenario> scenarios;
  std::vector<SimEstimator> estimators;
  int replications = 500;
  std::uint64_t master_seed = 0;
  int threads = 1;
};

/// One output row per (scenario, estimator[, coordinate]). The true value of
/// every estimand is 1; bias = mean(estimate) - 1, coverage counts per-rep
/// 95% CI containment of 1. Replications where an estimator fails are
/// excluded from its row and counted in `failures`.
struct MonteCarloRow {
  std::string scenario;   // "-" for scenario-independent estimators
  std::string estimator;
  double bias = 0.0;
  double sd = 0.0;
  double median_se = 0.0;
  double coverage = 0.0;
  long failures = 0;
  long successes = 0;
};

std::vector<MonteCarloRow> run_monte_carlo(const ScenarioGrid& grid, const DgpCase& dgp);

std::string monte_carlo_csv(const std::vector<MonteCarloRow>& rows);

/// Flat key = value config for the `simulate` subcommand.
struct SimulationConfig {
  DgpCase dgp;
  ScenarioGrid grid;
  std::string output_path;  // empty: stdout
  bool seed_set = false;
};

SimulationConfig parse_simulation_config(const std::string& text);

}  // namespace idid
