#include <doctest.h>

#include <cmath>

#include "idid/errors.hpp"
#include "idid/estimators.hpp"
#include "idid/rng.hpp"
#include "idid/simulation.hpp"
#include "helpers.hpp"

using namespace idid;

TEST_CASE("truncated normal stays in its support and is centered") {
  RngStream rng(101);
  const int n = 1000000;
  double sum = 0.0;
  long below_half = 0;
  for (int i = 0; i < n; ++i) {
    double v = sample_truncated_normal(rng);
    REQUIRE(v > -1.0);
    REQUIRE(v < 1.0);
    sum += v;
    if (v <= 0.5) ++below_half;
  }
  CHECK(std::abs(sum / n) <= 0.005);
  // (Phi(0.5) - Phi(-1)) / (Phi(1) - Phi(-1)) = 0.780453...
  double expected = (norm_cdf(0.5) - norm_cdf(-1.0)) / (norm_cdf(1.0) - norm_cdf(-1.0));
  CHECK(expected == doctest::Approx(0.7804532).epsilon(1e-6));
  CHECK(static_cast<double>(below_half) / n == doctest::Approx(expected).epsilon(0.003));
}

TEST_CASE("inverse normal CDF round-trips") {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10}) {
    CHECK(norm_cdf(inv_norm_cdf(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(inv_norm_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(inv_norm_cdf(0.0), ValidationError);
}

TEST_CASE("case-1 data has the advertised marginals") {
  RngStream rng(103);
  DgpCase dgp{DgpVariant::Case1, 100000};
  Dataset data = generate_case_data(dgp, rng);
  CHECK(data.p() == 1);
  CHECK(data.covariate_names()[0] == "x");
  CHECK(std::abs(data.z().mean() - 0.5) <= 0.01);
  CHECK(std::abs(data.t().mean() - 0.5) <= 0.01);
  CHECK(std::abs(data.x().col(0).mean()) <= 0.02);

  // true effect is 1: the Wald estimate should sit within 3 SEs of it
  WaldEstimate wald = wald_estimate(cell_table(data));
  CHECK(std::abs(wald.beta - 1.0) <= 3.0 * wald.se);
}

TEST_CASE("exposure rates by arm match the generating equation") {
  RngStream rng(107);
  DgpCase dgp{DgpVariant::Case1, 200000};
  Dataset data = generate_case_data(dgp, rng);
  CellTable cells = cell_table(data);
  // mu_D(t,z) = (z+1) t / 8 + 0.5
  for (int t = 0; t < 2; ++t)
    for (int z = 0; z < 2; ++z)
      CHECK(cells.cell(t, z).mean_d ==
            doctest::Approx((z + 1.0) * t / 8.0 + 0.5).epsilon(0.02));

  // the baseline-period exposure rate does not depend on the instrument case
  RngStream rng2(109);
  DgpCase dgp2{DgpVariant::Case2, 200000};
  CellTable cells2 = cell_table(generate_case_data(dgp2, rng2));
  for (int z = 0; z < 2; ++z)
    CHECK(cells2.cell(0, z).mean_d == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("identical streams generate identical data") {
  DgpCase dgp{DgpVariant::Case2, 2000};
  RngStream a(31415, {7});
  RngStream b(31415, {7});
  Dataset da = generate_case_data(dgp, a);
  Dataset db = generate_case_data(dgp, b);
  CHECK(da.y() == db.y());
  CHECK(da.d() == db.d());
  CHECK(da.x() == db.x());

  RngStream c(31415, {8});
  Dataset dc = generate_case_data(dgp, c);
  CHECK(da.y() != dc.y());
}

TEST_CASE("scenario labels parse and print") {
  Scenario s = Scenario::parse("pi+mu_y");
  CHECK(s.pi_correct);
  CHECK_FALSE(s.mu_d_correct);
  CHECK(s.mu_y_correct);
  CHECK(s.label() == "pi+mu_y");
  CHECK(Scenario::parse("none").label() == "none");
  CHECK_THROWS_AS(Scenario::parse("pi+bogus"), ValidationError);
}

TEST_CASE("monte carlo runs are schedule-independent") {
  ScenarioGrid grid;
  grid.scenarios = {Scenario::parse("pi+mu_d+mu_y"), Scenario::parse("pi")};
  grid.estimators = {SimEstimator::Wald, SimEstimator::SemiparConstant,
                     SimEstimator::SemiparLinear};
  grid.replications = 12;
  grid.master_seed = 555;
  DgpCase dgp{DgpVariant::Case1, 2000};

  grid.threads = 1;
  auto serial = run_monte_carlo(grid, dgp);
  grid.threads = 8;
  auto parallel = run_monte_carlo(grid, dgp);
  REQUIRE(serial.size() == parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].scenario == parallel[i].scenario);
    CHECK(serial[i].estimator == parallel[i].estimator);
    CHECK(serial[i].bias == parallel[i].bias);  // bit-identical
    CHECK(serial[i].sd == parallel[i].sd);
    CHECK(serial[i].median_se == parallel[i].median_se);
    CHECK(serial[i].coverage == parallel[i].coverage);
  }
  CHECK(monte_carlo_csv(serial) == monte_carlo_csv(parallel));
}

TEST_CASE("monte carlo smoke run produces sane desk-scale rows") {
  ScenarioGrid grid;
  grid.scenarios = {Scenario::parse("pi+mu_d+mu_y")};
  grid.estimators = {SimEstimator::Ols, SimEstimator::StandardIv, SimEstimator::Wald,
                     SimEstimator::SemiparConstant};
  grid.replications = 40;
  grid.master_seed = 986;
  grid.threads = 4;
  DgpCase dgp{DgpVariant::Case1, 4000};
  auto rows = run_monte_carlo(grid, dgp);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.failures == 0);
    CHECK(row.successes == 40);
    CHECK(std::isfinite(row.bias));
    CHECK(row.sd > 0.0);
    CHECK(row.median_se > 0.0);
  }
  // OLS is badly confounded by construction
  CHECK(rows[0].estimator == "ols");
  CHECK(rows[0].bias > 0.5);
  CHECK(rows[0].coverage <= 0.1);
  // the semiparametric row should be near the truth even at this small n
  CHECK(rows[3].estimator == "semipar_constant");
  CHECK(std::abs(rows[3].bias) <= 0.25);
}

TEST_CASE("simulation config parsing") {
  SimulationConfig config = parse_simulation_config(
      "# comment\n"
      "case = case2\n"
      "n = 12000\n"
      "replications = 77\n"
      "seed = 42\n"
      "threads = 3\n"
      "estimators = wald, semipar_constant\n"
      "scenarios = pi+mu_d+mu_y, none\n"
      "output = out.csv\n");
  CHECK(config.dgp.variant == DgpVariant::Case2);
  CHECK(config.dgp.n == 12000);
  CHECK(config.grid.replications == 77);
  CHECK(config.grid.master_seed == 42);
  CHECK(config.seed_set);
  CHECK(config.grid.threads == 3);
  REQUIRE(config.grid.estimators.size() == 2);
  CHECK(config.grid.estimators[1] == SimEstimator::SemiparConstant);
  REQUIRE(config.grid.scenarios.size() == 2);
  CHECK(config.grid.scenarios[1].label() == "none");
  CHECK(config.output_path == "out.csv");

  // case-1 default keeps pi correct everywhere
  SimulationConfig defaults = parse_simulation_config("case = case1\nseed = 1\n");
  REQUIRE(defaults.grid.scenarios.size() == 4);
  for (const auto& s : defaults.grid.scenarios) CHECK(s.pi_correct);

  CHECK_THROWS_AS(parse_simulation_config("bogus = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_simulation_config("case = case3\n"), ValidationError);
}
