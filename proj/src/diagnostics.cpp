#include "idid/diagnostics.hpp"

#include <cmath>
#include <string>

#include "idid/errors.hpp"
#include "idid/regression.hpp"

namespace idid {
namespace {

constexpr double kRuleOfTen = 10.0;

Eigen::MatrixXd first_stage_design(const Dataset& data, bool include_covariates) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd m(n, 4 + (include_covariates ? data.p() : 0));
  m.col(0).setOnes();
  m.col(1) = data.z();
  m.col(2) = data.t();
  m.col(3) = data.z().cwiseProduct(data.t());
  if (include_covariates) m.rightCols(data.p()) = data.x();
  return m;
}

void check_cells(const Dataset& data) {
  long counts[4] = {0, 0, 0, 0};
  for (Eigen::Index i = 0; i < data.n(); ++i)
    ++counts[2 * static_cast<int>(data.t()(i)) + static_cast<int>(data.z()(i))];
  for (int c = 0; c < 4; ++c)
    if (counts[c] < 2)
      throw EstimationError(ErrorKind::CellTooSmall,
                            "weak-id statistic requires >= 2 rows per (t,z) cell");
}

}  // namespace

WeakIdReport weak_id_statistic(const Dataset& data, bool include_covariates) {
  check_cells(data);
  Eigen::MatrixXd design = first_stage_design(data, include_covariates);
  if (data.n() <= design.cols())
    throw EstimationError(ErrorKind::CellTooSmall, "too few rows for the first stage");
  LinearFit fit = fit_linear(design, data.d());

  WeakIdReport rep;
  rep.method = WeakIdMethod::FirstStageF;
  rep.covariates_included = include_covariates && data.p() > 0;
  rep.delta_d = fit.coefficients(3);
  double var_coef = fit.residual_variance * fit.xtx_inverse(3, 3);
  rep.kappa2 = rep.delta_d * rep.delta_d / var_coef;
  rep.weak = rep.kappa2 < kRuleOfTen;
  return rep;
}

double weak_id_fwl_kappa2(const Dataset& data, bool include_covariates) {
  check_cells(data);
  Eigen::MatrixXd full = first_stage_design(data, include_covariates);
  const Eigen::Index k = full.cols();
  const Eigen::Index n = data.n();

  // residualize the interaction column on the remaining regressors
  Eigen::MatrixXd rest(n, k - 1);
  rest << full.leftCols(3), full.rightCols(k - 4);
  Eigen::VectorXd zt = full.col(3);
  LinearFit proj = fit_linear(rest, zt);
  Eigen::VectorXd r = zt - rest * proj.coefficients;

  double rtr = r.squaredNorm();
  if (rtr <= 0.0)
    throw EstimationError(ErrorKind::RankDeficient, "interaction column has no residual variation");
  double coef = r.dot(data.d()) / rtr;

  // residual variance must match the full regression's dof to agree exactly
  LinearFit dproj = fit_linear(rest, data.d());
  Eigen::VectorXd d_resid = data.d() - rest * dproj.coefficients;
  Eigen::VectorXd e = d_resid - coef * r;
  double s2 = e.squaredNorm() / static_cast<double>(n - k);
  return coef * coef * rtr / s2;
}

WeakIdReport weak_id_statistic(const CellTable& exposure_summary) {
  double sum_se2 = 0.0;
  for (const auto& c : exposure_summary.cells) {
    if (c.se_mean_d <= 0.0)
      throw EstimationError(ErrorKind::ZeroSE,
                            "summary weak-id needs se_mean_d > 0 in every cell");
    sum_se2 += c.se_mean_d * c.se_mean_d;
  }
  WeakIdReport rep;
  rep.method = WeakIdMethod::SquaredZ;
  rep.delta_d = exposure_summary.delta_d();
  rep.kappa2 = rep.delta_d * rep.delta_d / sum_se2;
  rep.weak = rep.kappa2 < kRuleOfTen;
  return rep;
}

}  // namespace idid
