#include <doctest.h>

#include <cmath>

#include "idid/design.hpp"
#include "idid/errors.hpp"
#include "idid/regression.hpp"
#include "idid/rng.hpp"
#include "idid/simulation.hpp"
#include "helpers.hpp"

using namespace idid;

TEST_CASE("fit_linear recovers an exact line") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 1, 1, 1, 2;
  Eigen::VectorXd y(3);
  y << 0, 2, 4;
  LinearFit fit = fit_linear(x, y);
  CHECK(fit.coefficients(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.residual_variance == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_linear rejects duplicate columns") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, 1, 1, 2, 2, 3, 3;
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  try {
    fit_linear(x, y);
    FAIL("expected RankDeficient");
  } catch (const EstimationError& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("D8 first stage: zt coefficient 0.5, residual variance 0.375") {
  Dataset d8 = idid::testing::d8();
  Eigen::MatrixXd design(8, 4);
  design.col(0).setOnes();
  design.col(1) = d8.z();
  design.col(2) = d8.t();
  design.col(3) = d8.z().cwiseProduct(d8.t());
  LinearFit fit = fit_linear(design, d8.d());
  CHECK(fit.coefficients(3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.residual_variance == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("orthogonality of residuals and projection idempotence") {
  RngStream rng(21);
  const int n = 200;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    x(i, 2) = rng.normal();
    y(i) = 1.0 + 2.0 * x(i, 1) - x(i, 2) + rng.normal();
  }
  LinearFit fit = fit_linear(x, y);
  Eigen::VectorXd resid = y - x * fit.coefficients;
  CHECK((x.transpose() * resid).lpNorm<Eigen::Infinity>() <=
        1e-8 * y.lpNorm<Eigen::Infinity>() * n);

  Eigen::VectorXd fitted = x * fit.coefficients;
  LinearFit refit = fit_linear(x, fitted);
  CHECK((refit.coefficients - fit.coefficients).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("weighted least squares matches replication") {
  // weight 2 on a row should equal duplicating it
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 1, 1, 1, 3;
  Eigen::VectorXd y(3);
  y << 1, 3, 2;
  Eigen::VectorXd w(3);
  w << 1, 2, 1;
  LinearFit weighted = fit_linear(x, y, &w);

  Eigen::MatrixXd x2(4, 2);
  x2 << 1, 0, 1, 1, 1, 1, 1, 3;
  Eigen::VectorXd y2(4);
  y2 << 1, 3, 3, 2;
  LinearFit duplicated = fit_linear(x2, y2);
  CHECK((weighted.coefficients - duplicated.coefficients).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("intercept-only logistic hits the closed-form logit") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
  Eigen::VectorXd y(4);
  y << 1, 1, 1, 0;
  LogisticFit fit = fit_logistic(x, y);
  CHECK(fit.converged);
  CHECK(fit.coefficients(0) == doctest::Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("constant response raises Separation") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  try {
    fit_logistic(x, y);
    FAIL("expected Separation");
  } catch (const EstimationError& e) {
    CHECK(e.kind() == ErrorKind::Separation);
  }
}

TEST_CASE("logistic score is zero at the optimum") {
  RngStream rng(23);
  const int n = 400;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    y(i) = rng.bernoulli(logistic(-0.3 + 0.8 * x(i, 1))) ? 1.0 : 0.0;
  }
  LogisticFit fit = fit_logistic(x, y);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = logistic(x.row(i).dot(fit.coefficients));
  Eigen::VectorXd score = x.transpose() * (y - p);
  CHECK(score.lpNorm<Eigen::Infinity>() <= 1e-8 * n);
  // with an intercept, mean fitted probability equals the sample mean
  CHECK(p.mean() == doctest::Approx(y.mean()).epsilon(1e-8));
  for (int i = 0; i < n; ++i) {
    CHECK(p(i) > 0.0);
    CHECK(p(i) < 1.0);
  }
}

TEST_CASE("saturated nuisances on p=0 data reproduce cell statistics") {
  Dataset d8 = idid::testing::d8();
  DesignSpec saturated{DesignKind::SaturatedTZ, ModelFamily::Linear, CovariateTransform::None};
  NuisanceFit fit = fit_nuisance(d8, saturated, saturated, PropensitySpec{});

  CellTable cells = cell_table(d8);
  Eigen::VectorXd x0(0);
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      CHECK(fit.predict_mu_y(t, z, x0) == doctest::Approx(cells.cell(t, z).mean_y).epsilon(1e-10));
      CHECK(fit.predict_mu_d(t, z, x0) == doctest::Approx(cells.cell(t, z).mean_d).epsilon(1e-10));
      double proportion = static_cast<double>(cells.cell(t, z).n_cell) /
                          static_cast<double>(cells.n_total);
      CHECK(fit.predict_pi(t, z, x0) == doctest::Approx(proportion).epsilon(1e-6));
    }
  }
  // delta_d equals the Wald denominator and is constant in x
  CHECK(fit.delta_d(x0) == doctest::Approx(cells.delta_d()).epsilon(1e-10));
}

TEST_CASE("factorized propensity sums to one over the four cells") {
  RngStream rng(29);
  Dataset data = idid::testing::random_dataset_p1(rng, 300);
  DesignSpec full{DesignKind::FullInteractions, ModelFamily::Linear, CovariateTransform::None};
  NuisanceFit fit = fit_nuisance(data, full, full, PropensitySpec{});
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd x(1);
    x << rng.normal() * 2.0;
    double total = 0.0;
    for (int t = 0; t < 2; ++t)
      for (int z = 0; z < 2; ++z) total += fit.predict_pi(t, z, x);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("correct specification recovers the exposure model at scale") {
  RngStream rng(31);
  DgpCase dgp{DgpVariant::Case1, 100000};
  Dataset data = generate_case_data(dgp, rng);
  DesignSpec mu_y{DesignKind::FullInteractions, ModelFamily::Linear, CovariateTransform::None};
  DesignSpec mu_d{DesignKind::PairwiseInteractions, ModelFamily::Linear, CovariateTransform::None};
  NuisanceFit fit = fit_nuisance(data, mu_y, mu_d, PropensitySpec{});
  double err = 0.0;
  const int m = 2000;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd x = data.x().row(i).transpose();
    int t = static_cast<int>(data.t()(i));
    int z = static_cast<int>(data.z()(i));
    double truth = (z + 1.0) * t / 8.0 + 0.5;
    err += std::abs(fit.predict_mu_d(t, z, x) - truth);
  }
  CHECK(err / m <= 0.01);
}

TEST_CASE("design spec names round-trip") {
  for (const char* name :
       {"saturated_tz", "main_effects", "pairwise_interactions", "full_interactions",
        "full_interactions_exphalf", "logistic_pairwise_interactions",
        "logistic_main_effects"}) {
    CHECK(DesignSpec::parse(name).name() == name);
  }
  CHECK_THROWS_AS(DesignSpec::parse("quadratic"), ValidationError);
  CHECK(PropensitySpec::parse("logistic_propensity_exphalf").transform ==
        CovariateTransform::ExpHalf);
}
