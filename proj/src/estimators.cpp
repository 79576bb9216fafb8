#include "idid/estimators.hpp"

#include <cmath>
#include <string>

#include "idid/errors.hpp"
#include "idid/regression.hpp"

namespace idid {

WaldEstimate wald_estimate(const CellTable& cells, double z_crit) {
  if (!cells.cov_available)
    throw ValidationError(ErrorKind::InvalidArgument,
                          "wald_estimate requires a microdata-backed cell table");
  for (const auto& c : cells.cells) {
    if (c.n_cell < 2)
      throw EstimationError(ErrorKind::CellTooSmall,
                            "cell (t=" + std::to_string(c.t) + ",z=" + std::to_string(c.z) +
                                ") has fewer than 2 rows");
  }
  WaldEstimate est;
  est.delta_y = cells.delta_y();
  est.delta_d = cells.delta_d();
  if (std::abs(est.delta_d) <= 1e-12)
    throw EstimationError(ErrorKind::DegenerateTrend,
                          "exposure trends are parallel: delta_D is zero in-sample");
  est.beta = est.delta_y / est.delta_d;

  const double n = static_cast<double>(cells.n_total);
  double acc = 0.0;
  for (const auto& c : cells.cells) {
    double var_resid = c.var_y - 2.0 * est.beta * c.cov_yd + est.beta * est.beta * c.var_d;
    double p_cell = static_cast<double>(c.n_cell) / n;
    acc += var_resid / p_cell;
  }
  est.se = std::sqrt(acc / (n * est.delta_d * est.delta_d));
  est.ci95 = {est.beta - z_crit * est.se, est.beta + z_crit * est.se};
  return est;
}

Eigen::VectorXd WorkingModel::basis_vector(const Eigen::VectorXd& x) const {
  if (basis == Basis::Constant) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd v(dim());
  v(0) = 1.0;
  for (size_t k = 0; k < modifier_indices.size(); ++k) {
    int j = modifier_indices[k];
    if (j < 0 || j >= x.size())
      throw ValidationError(ErrorKind::InvalidArgument, "effect-modifier index out of range");
    v(1 + static_cast<Eigen::Index>(k)) = x(j);
  }
  return v;
}

double WorkingModel::weight_value(const Eigen::VectorXd& v) const {
  if (!weight) return 1.0;
  double w = weight(v);
  if (!(w >= 0.0))
    throw ValidationError(ErrorKind::InvalidArgument, "weight function must be nonnegative");
  return w;
}

WorkingModel WorkingModel::constant() { return WorkingModel{}; }

WorkingModel WorkingModel::linear(std::vector<int> modifier_indices) {
  WorkingModel wm;
  wm.basis = Basis::Linear;
  wm.modifier_indices = std::move(modifier_indices);
  return wm;
}

PsiEstimate semiparametric_estimate(const Dataset& data, const WorkingModel& wm,
                                    const NuisanceFit& nuisance,
                                    const SemiparOptions& options) {
  const Eigen::Index n = data.n();
  const int dim = wm.dim();

  NuisanceValues nv = nuisance.evaluate(data);

  long offending = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(nv.delta_d(i)) <= options.delta_floor) ++offending;
  if (offending > 0)
    throw EstimationError(ErrorKind::DeltaDNearZero,
                          "fitted exposure-trend contrast within " +
                              std::to_string(options.delta_floor) + " of zero at " +
                              std::to_string(offending) + " observations");

  // per-observation target: ratio + augmentation
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double pi = nv.pi_obs(i);
    if (options.clamp_pi) pi = std::min(std::max(pi, 0.01), 0.99);
    pi = std::max(pi, 1e-6);
    double ratio = nv.delta_y(i) / nv.delta_d(i);
    double sign = (2.0 * data.z()(i) - 1.0) * (2.0 * data.t()(i) - 1.0);
    double bracket =
        data.y()(i) - nv.mu_y_obs(i) - ratio * (data.d()(i) - nv.mu_d_obs(i));
    u(i) = ratio + sign / (pi * nv.delta_d(i)) * bracket;
  }

  // weighted least squares of u on the working-model basis
  Eigen::MatrixXd v_mat(n, dim);
  Eigen::VectorXd w_vec(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = wm.basis_vector(data.x().row(i).transpose());
    v_mat.row(i) = v.transpose();
    w_vec(i) = wm.weight_value(v);
  }
  LinearFit wls = fit_linear(v_mat, u, &w_vec);

  PsiEstimate est;
  est.psi = wls.coefficients;

  // sandwich: M = (1/n) sum w V V', S = (1/n) sum phi phi', phi = w V (u - V'psi)
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
  est.per_obs_influence.resize(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = v_mat.row(i).transpose();
    double resid = u(i) - v.dot(est.psi);
    Eigen::VectorXd phi = w_vec(i) * resid * v;
    est.per_obs_influence.row(i) = phi.transpose();
    m.noalias() += w_vec(i) * v * v.transpose();
    s.noalias() += phi * phi.transpose();
  }
  double dn = static_cast<double>(n);
  m /= dn;
  s /= dn;
  Eigen::MatrixXd minv = m.inverse();
  est.covariance = minv * s * minv.transpose() / dn;
  est.se.resize(dim);
  est.ci95.resize(dim);
  for (int j = 0; j < dim; ++j) {
    est.se(j) = std::sqrt(est.covariance(j, j));
    est.ci95[j] = {est.psi(j) - options.z_crit * est.se(j),
                   est.psi(j) + options.z_crit * est.se(j)};
  }
  return est;
}

WaldEstimate two_sample_estimate(const CellTable& outcome, const CellTable& exposure,
                                 double z_crit) {
  WaldEstimate est;
  est.delta_y = outcome.delta_y();
  est.delta_d = exposure.delta_d();
  if (std::abs(est.delta_d) <= 1e-12)
    throw EstimationError(ErrorKind::DegenerateTrend,
                          "exposure-sample trends are parallel: delta_Db is zero");
  est.beta = est.delta_y / est.delta_d;

  double acc = 0.0;
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      double se_y = outcome.cell(t, z).se_mean_y;
      double se_d = exposure.cell(t, z).se_mean_d;
      acc += se_y * se_y + est.beta * est.beta * se_d * se_d;
    }
  }
  est.se = std::sqrt(acc) / std::abs(est.delta_d);
  est.ci95 = {est.beta - z_crit * est.se, est.beta + z_crit * est.se};
  return est;
}

namespace {

Eigen::MatrixXd with_covariates(const Dataset& data, const Eigen::VectorXd& main,
                                bool include_covariates) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd m(n, 2 + (include_covariates ? data.p() : 0));
  m.col(0).setOnes();
  m.col(1) = main;
  if (include_covariates) m.rightCols(data.p()) = data.x();
  return m;
}

}  // namespace

BaselineEstimates baseline_estimates(const Dataset& data, bool include_covariates) {
  const Eigen::Index n = data.n();
  BaselineEstimates out;

  Eigen::MatrixXd x_ols = with_covariates(data, data.d(), include_covariates);
  LinearFit ols = fit_linear(x_ols, data.y());
  out.ols_beta = ols.coefficients(1);
  out.ols_se = std::sqrt(ols.residual_variance * ols.xtx_inverse(1, 1));

  // first stage: d on (1, z [, x])
  double zc = (data.z().array() - data.z().mean()).matrix().dot(
                  (data.d().array() - data.d().mean()).matrix()) /
              static_cast<double>(n - 1);
  if (std::abs(zc) <= 1e-12)
    throw EstimationError(ErrorKind::WeakFirstStage,
                          "sample covariance of z and d is zero");
  Eigen::MatrixXd z_design = with_covariates(data, data.z(), include_covariates);
  LinearFit first = fit_linear(z_design, data.d());
  Eigen::VectorXd d_hat = z_design * first.coefficients;

  Eigen::MatrixXd x_hat = with_covariates(data, d_hat, include_covariates);
  LinearFit second = fit_linear(x_hat, data.y());
  out.iv_beta = second.coefficients(1);

  // conventional 2SLS sigma^2 uses residuals at the actual regressors
  Eigen::VectorXd resid = data.y() - x_ols * second.coefficients;
  double sigma2 = resid.squaredNorm() / static_cast<double>(n - x_ols.cols());
  out.iv_se = std::sqrt(sigma2 * second.xtx_inverse(1, 1));
  return out;
}

}  // namespace idid
