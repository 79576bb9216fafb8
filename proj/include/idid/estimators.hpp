#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "idid/design.hpp"
#include "idid/types.hpp"

namespace idid {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Ratio-of-trend-differences estimate with its plug-in variance.
struct WaldEstimate {
  double beta = 0.0;
  double delta_y = 0.0;
  double delta_d = 0.0;
  double se = 0.0;
  Interval ci95;
};

/// beta = delta_y / delta_d from the four cell means; SE from the plug-in
/// variance (1/(n*delta_d^2)) * sum_cells Var(Y - beta*D | t,z) / P(t,z),
/// with the per-cell variance expanded as var_y - 2*beta*cov + beta^2*var_d.
/// pre: microdata-backed table (cov_yd available), every cell n >= 2,
/// |delta_d| > 1e-12.
WaldEstimate wald_estimate(const CellTable& cells, double z_crit = 1.96);

/// Parametric approximation basis for the conditional treatment effect,
/// beta(v; psi) = V'psi, with an optional nonnegative weight function.
struct WorkingModel {
  enum class Basis { Constant, Linear };
  Basis basis = Basis::Constant;
  std::vector<int> modifier_indices;  // covariate indices entering V (Linear)
  std::function<double(const Eigen::VectorXd&)> weight;  // default: 1

  int dim() const {
    return basis == Basis::Constant ? 1 : 1 + static_cast<int>(modifier_indices.size());
  }
  Eigen::VectorXd basis_vector(const Eigen::VectorXd& x) const;
  double weight_value(const Eigen::VectorXd& v) const;

  static WorkingModel constant();
  static WorkingModel linear(std::vector<int> modifier_indices);
};

struct SemiparOptions {
  double delta_floor = 1e-6;  // abort when any |delta_d(x_i)| falls at or below
  bool clamp_pi = false;      // optional clamp of pi-hat to [0.01, 0.99]
  double z_crit = 1.96;
};

struct PsiEstimate {
  Eigen::VectorXd psi;
  Eigen::MatrixXd covariance;          // sandwich covariance of psi-hat
  Eigen::VectorXd se;                  // sqrt(diag(covariance))
  Eigen::MatrixXd per_obs_influence;   // n x dim matrix of phi_i
  std::vector<Interval> ci95;
};

/// Closed-form solution of the influence-function estimating equation for
/// linear-in-parameters working models:
///   psi = [sum w V V']^{-1} sum w V (ratio_i + aug_i)
/// with ratio_i = delta_y(x_i)/delta_d(x_i) and
/// aug_i = (2z-1)(2t-1)/(pi_i * delta_d(x_i)) *
///         [y_i - mu_y_i - ratio_i (d_i - mu_d_i)].
/// Covariance: M^{-1} (1/n sum phi phi') M^{-T} / n with M = (1/n) sum w V V'.
PsiEstimate semiparametric_estimate(const Dataset& data, const WorkingModel& wm,
                                    const NuisanceFit& nuisance,
                                    const SemiparOptions& options = {});

/// Two-sample ratio estimate: beta = delta_y(outcome) / delta_d(exposure),
/// SE^2 = sum_cells [se_mean_y^2 + beta^2 se_mean_d^2] / delta_d^2.
WaldEstimate two_sample_estimate(const CellTable& outcome, const CellTable& exposure,
                                 double z_crit = 1.96);

/// Comparators used by the simulation study: OLS of y on d and two-stage
/// least squares with z instrumenting d. Conventional homoskedastic SEs.
struct BaselineEstimates {
  double ols_beta = 0.0;
  double ols_se = 0.0;
  double iv_beta = 0.0;
  double iv_se = 0.0;
};

BaselineEstimates baseline_estimates(const Dataset& data, bool include_covariates);

}  // namespace idid
