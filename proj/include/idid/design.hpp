#pragma once

#include <Eigen/Dense>
#include <string>

#include "idid/regression.hpp"
#include "idid/types.hpp"

namespace idid {

/// Regressor layout for a conditional-mean model of Y or D given (T, Z, X).
enum class DesignKind {
  SaturatedTZ,           // 1, z, t, zt (ignores covariates)
  MainEffects,           // 1, t, z, x_1..x_p
  PairwiseInteractions,  // + tz, tx_j, zx_j
  FullInteractions,      // + tzx_j
};

/// The only built-in covariate map: x -> exp(x/2), applied componentwise
/// before the design is assembled.
enum class CovariateTransform { None, ExpHalf };

enum class ModelFamily { Linear, Logistic };

struct DesignSpec {
  DesignKind kind = DesignKind::FullInteractions;
  ModelFamily family = ModelFamily::Linear;
  CovariateTransform transform = CovariateTransform::None;

  /// Names: saturated_tz, main_effects, pairwise_interactions,
  /// full_interactions, logistic_main_effects, logistic_pairwise,
  /// plus an `_exphalf` suffix for the transformed variants.
  static DesignSpec parse(const std::string& name);
  std::string name() const;
};

/// Joint (T, Z) propensity factorized as P(Z=z|X,T) * P(T=t|X), each side a
/// logistic model (z on 1,x,t; t on 1,x).
struct PropensitySpec {
  CovariateTransform transform = CovariateTransform::None;

  static PropensitySpec parse(const std::string& name);  // logistic_propensity[_exphalf]
  std::string name() const;
};

Eigen::MatrixXd build_mu_design(DesignKind kind, CovariateTransform transform,
                                const Eigen::VectorXd& t, const Eigen::VectorXd& z,
                                const Eigen::MatrixXd& x);

/// Fitted nuisance triple (mu_Y, mu_D, pi).
///
/// predict_mu_* return response-scale conditional means. delta_y/delta_d are
/// the double differences of the fitted linear predictor over the (t, z)
/// cells; for linear-family models the linear predictor is the conditional
/// mean, so this is the mean contrast.
struct NuisanceValues {
  Eigen::VectorXd mu_y_obs;  // response-scale prediction at the observed (t, z)
  Eigen::VectorXd mu_d_obs;
  Eigen::VectorXd pi_obs;
  Eigen::VectorXd delta_y;   // index contrast at each row's x
  Eigen::VectorXd delta_d;
};

class NuisanceFit {
 public:
  double predict_mu_y(int t, int z, const Eigen::VectorXd& x) const;
  double predict_mu_d(int t, int z, const Eigen::VectorXd& x) const;
  double predict_pi(int t, int z, const Eigen::VectorXd& x) const;
  double delta_y(const Eigen::VectorXd& x) const;
  double delta_d(const Eigen::VectorXd& x) const;

  /// Vectorized evaluation over a whole dataset (the estimator hot path).
  NuisanceValues evaluate(const Dataset& data) const;

  const DesignSpec& mu_y_spec() const { return mu_y_spec_; }
  const DesignSpec& mu_d_spec() const { return mu_d_spec_; }
  const PropensitySpec& pi_spec() const { return pi_spec_; }

  friend NuisanceFit fit_nuisance(const Dataset&, const DesignSpec&, const DesignSpec&,
                                  const PropensitySpec&);
  friend NuisanceFit compose_nuisance(DesignSpec, Eigen::VectorXd, DesignSpec,
                                      Eigen::VectorXd, PropensitySpec, Eigen::VectorXd,
                                      Eigen::VectorXd);

 private:
  double index(const DesignSpec& spec, const Eigen::VectorXd& coef, int t, int z,
               const Eigen::VectorXd& x) const;

  DesignSpec mu_y_spec_, mu_d_spec_;
  PropensitySpec pi_spec_;
  Eigen::VectorXd mu_y_coef_, mu_d_coef_;
  Eigen::VectorXd z_model_coef_;  // logistic: z ~ 1, x, t
  Eigen::VectorXd t_model_coef_;  // logistic: t ~ 1, x
};

NuisanceFit fit_nuisance(const Dataset& data, const DesignSpec& mu_y,
                         const DesignSpec& mu_d, const PropensitySpec& pi);

/// Assemble a NuisanceFit from already-fitted coefficient vectors (used by
/// the Monte Carlo engine to share fits across scenarios).
NuisanceFit compose_nuisance(DesignSpec mu_y_spec, Eigen::VectorXd mu_y_coef,
                             DesignSpec mu_d_spec, Eigen::VectorXd mu_d_coef,
                             PropensitySpec pi_spec, Eigen::VectorXd z_model_coef,
                             Eigen::VectorXd t_model_coef);

}  // namespace idid
