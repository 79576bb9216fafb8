#include "idid/design.hpp"

#include <cmath>

#include "idid/errors.hpp"

namespace idid {
namespace {

Eigen::MatrixXd apply_transform(CovariateTransform transform, const Eigen::MatrixXd& x) {
  if (transform == CovariateTransform::None) return x;
  return x.array().exp().sqrt().matrix();  // exp(x/2) = sqrt(exp(x))
}

Eigen::Index design_width(DesignKind kind, Eigen::Index p) {
  switch (kind) {
    case DesignKind::SaturatedTZ: return 4;
    case DesignKind::MainEffects: return 3 + p;
    case DesignKind::PairwiseInteractions: return 4 + 3 * p;
    case DesignKind::FullInteractions: return 4 + 4 * p;
  }
  return 0;
}

}  // namespace

Eigen::MatrixXd build_mu_design(DesignKind kind, CovariateTransform transform,
                                const Eigen::VectorXd& t, const Eigen::VectorXd& z,
                                const Eigen::MatrixXd& x) {
  const Eigen::Index n = t.size();
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd xt = apply_transform(transform, x);
  Eigen::MatrixXd m(n, design_width(kind, p));
  m.col(0).setOnes();
  if (kind == DesignKind::SaturatedTZ) {
    m.col(1) = z;
    m.col(2) = t;
    m.col(3) = z.cwiseProduct(t);
    return m;
  }
  m.col(1) = t;
  m.col(2) = z;
  Eigen::Index c = 3;
  for (Eigen::Index j = 0; j < p; ++j) m.col(c++) = xt.col(j);
  if (kind == DesignKind::MainEffects) return m;
  m.col(c++) = t.cwiseProduct(z);
  for (Eigen::Index j = 0; j < p; ++j) m.col(c++) = t.cwiseProduct(xt.col(j));
  for (Eigen::Index j = 0; j < p; ++j) m.col(c++) = z.cwiseProduct(xt.col(j));
  if (kind == DesignKind::PairwiseInteractions) return m;
  for (Eigen::Index j = 0; j < p; ++j)
    m.col(c++) = t.cwiseProduct(z).cwiseProduct(xt.col(j));
  return m;
}

DesignSpec DesignSpec::parse(const std::string& name) {
  DesignSpec spec;
  std::string base = name;
  auto strip_suffix = [&](const std::string& suffix) {
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
      base = base.substr(0, base.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (strip_suffix("_exphalf")) spec.transform = CovariateTransform::ExpHalf;
  if (base.rfind("logistic_", 0) == 0) {
    spec.family = ModelFamily::Logistic;
    base = base.substr(9);
  }
  if (base == "saturated_tz") spec.kind = DesignKind::SaturatedTZ;
  else if (base == "main_effects") spec.kind = DesignKind::MainEffects;
  else if (base == "pairwise_interactions") spec.kind = DesignKind::PairwiseInteractions;
  else if (base == "full_interactions") spec.kind = DesignKind::FullInteractions;
  else
    throw ValidationError(ErrorKind::InvalidArgument, "unknown design spec: " + name);
  return spec;
}

std::string DesignSpec::name() const {
  std::string base;
  switch (kind) {
    case DesignKind::SaturatedTZ: base = "saturated_tz"; break;
    case DesignKind::MainEffects: base = "main_effects"; break;
    case DesignKind::PairwiseInteractions: base = "pairwise_interactions"; break;
    case DesignKind::FullInteractions: base = "full_interactions"; break;
  }
  if (family == ModelFamily::Logistic) base = "logistic_" + base;
  if (transform == CovariateTransform::ExpHalf) base += "_exphalf";
  return base;
}

PropensitySpec PropensitySpec::parse(const std::string& name) {
  if (name == "logistic_propensity") return {CovariateTransform::None};
  if (name == "logistic_propensity_exphalf") return {CovariateTransform::ExpHalf};
  throw ValidationError(ErrorKind::InvalidArgument, "unknown propensity spec: " + name);
}

std::string PropensitySpec::name() const {
  return transform == CovariateTransform::ExpHalf ? "logistic_propensity_exphalf"
                                                  : "logistic_propensity";
}

namespace {

Eigen::MatrixXd z_model_design(CovariateTransform transform, const Eigen::VectorXd& t,
                               const Eigen::MatrixXd& x) {
  const Eigen::Index n = t.size();
  Eigen::MatrixXd xt = apply_transform(transform, x);
  Eigen::MatrixXd m(n, 2 + x.cols());
  m.col(0).setOnes();
  m.middleCols(1, x.cols()) = xt;
  m.col(1 + x.cols()) = t;
  return m;
}

Eigen::MatrixXd t_model_design(CovariateTransform transform, Eigen::Index n,
                               const Eigen::MatrixXd& x) {
  Eigen::MatrixXd xt = apply_transform(transform, x);
  Eigen::MatrixXd m(n, 1 + x.cols());
  m.col(0).setOnes();
  m.middleCols(1, x.cols()) = xt;
  return m;
}

}  // namespace

NuisanceFit fit_nuisance(const Dataset& data, const DesignSpec& mu_y,
                         const DesignSpec& mu_d, const PropensitySpec& pi) {
  if (mu_y.family != ModelFamily::Linear)
    throw ValidationError(ErrorKind::InvalidArgument, "mu_Y model must be linear");

  NuisanceFit fit;
  fit.mu_y_spec_ = mu_y;
  fit.mu_d_spec_ = mu_d;
  fit.pi_spec_ = pi;

  Eigen::MatrixXd design_y = build_mu_design(mu_y.kind, mu_y.transform, data.t(), data.z(), data.x());
  fit.mu_y_coef_ = fit_linear(design_y, data.y()).coefficients;

  Eigen::MatrixXd design_d = build_mu_design(mu_d.kind, mu_d.transform, data.t(), data.z(), data.x());
  if (mu_d.family == ModelFamily::Linear) {
    fit.mu_d_coef_ = fit_linear(design_d, data.d()).coefficients;
  } else {
    fit.mu_d_coef_ = fit_logistic(design_d, data.d()).coefficients;
  }

  fit.z_model_coef_ =
      fit_logistic(z_model_design(pi.transform, data.t(), data.x()), data.z()).coefficients;
  fit.t_model_coef_ =
      fit_logistic(t_model_design(pi.transform, data.n(), data.x()), data.t()).coefficients;
  return fit;
}

NuisanceFit compose_nuisance(DesignSpec mu_y_spec, Eigen::VectorXd mu_y_coef,
                             DesignSpec mu_d_spec, Eigen::VectorXd mu_d_coef,
                             PropensitySpec pi_spec, Eigen::VectorXd z_model_coef,
                             Eigen::VectorXd t_model_coef) {
  NuisanceFit fit;
  fit.mu_y_spec_ = mu_y_spec;
  fit.mu_d_spec_ = mu_d_spec;
  fit.pi_spec_ = pi_spec;
  fit.mu_y_coef_ = std::move(mu_y_coef);
  fit.mu_d_coef_ = std::move(mu_d_coef);
  fit.z_model_coef_ = std::move(z_model_coef);
  fit.t_model_coef_ = std::move(t_model_coef);
  return fit;
}

double NuisanceFit::index(const DesignSpec& spec, const Eigen::VectorXd& coef, int t,
                          int z, const Eigen::VectorXd& x) const {
  Eigen::VectorXd tv = Eigen::VectorXd::Constant(1, static_cast<double>(t));
  Eigen::VectorXd zv = Eigen::VectorXd::Constant(1, static_cast<double>(z));
  Eigen::MatrixXd row = build_mu_design(spec.kind, spec.transform, tv, zv, x.transpose());
  return row.row(0).dot(coef);
}

double NuisanceFit::predict_mu_y(int t, int z, const Eigen::VectorXd& x) const {
  return index(mu_y_spec_, mu_y_coef_, t, z, x);
}

double NuisanceFit::predict_mu_d(int t, int z, const Eigen::VectorXd& x) const {
  double eta = index(mu_d_spec_, mu_d_coef_, t, z, x);
  return mu_d_spec_.family == ModelFamily::Logistic ? logistic(eta) : eta;
}

double NuisanceFit::predict_pi(int t, int z, const Eigen::VectorXd& x) const {
  Eigen::MatrixXd xt = apply_transform(pi_spec_.transform, x.transpose());
  double eta_z = z_model_coef_(0);
  for (Eigen::Index j = 0; j < xt.cols(); ++j) eta_z += z_model_coef_(1 + j) * xt(0, j);
  eta_z += z_model_coef_(z_model_coef_.size() - 1) * static_cast<double>(t);
  double pz1 = logistic(eta_z);
  double pz = z == 1 ? pz1 : 1.0 - pz1;

  double eta_t = t_model_coef_(0);
  for (Eigen::Index j = 0; j < xt.cols(); ++j) eta_t += t_model_coef_(1 + j) * xt(0, j);
  double pt1 = logistic(eta_t);
  double pt = t == 1 ? pt1 : 1.0 - pt1;
  return pz * pt;
}

NuisanceValues NuisanceFit::evaluate(const Dataset& data) const {
  const Eigen::Index n = data.n();
  NuisanceValues v;

  // index predictions on the four (t, z) cells for both mu models
  Eigen::MatrixXd eta_y(n, 4), eta_d(n, 4);
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      Eigen::VectorXd tv = Eigen::VectorXd::Constant(n, static_cast<double>(t));
      Eigen::VectorXd zv = Eigen::VectorXd::Constant(n, static_cast<double>(z));
      eta_y.col(2 * t + z) =
          build_mu_design(mu_y_spec_.kind, mu_y_spec_.transform, tv, zv, data.x()) * mu_y_coef_;
      eta_d.col(2 * t + z) =
          build_mu_design(mu_d_spec_.kind, mu_d_spec_.transform, tv, zv, data.x()) * mu_d_coef_;
    }
  }
  v.delta_y = eta_y.col(3) - eta_y.col(1) - eta_y.col(2) + eta_y.col(0);
  v.delta_d = eta_d.col(3) - eta_d.col(1) - eta_d.col(2) + eta_d.col(0);

  v.mu_y_obs.resize(n);
  v.mu_d_obs.resize(n);
  const bool logit_d = mu_d_spec_.family == ModelFamily::Logistic;
  for (Eigen::Index i = 0; i < n; ++i) {
    int cell = 2 * static_cast<int>(data.t()(i)) + static_cast<int>(data.z()(i));
    v.mu_y_obs(i) = eta_y(i, cell);
    double ed = eta_d(i, cell);
    v.mu_d_obs(i) = logit_d ? logistic(ed) : ed;
  }

  Eigen::VectorXd eta_z =
      z_model_design(pi_spec_.transform, data.t(), data.x()) * z_model_coef_;
  Eigen::VectorXd eta_t =
      t_model_design(pi_spec_.transform, n, data.x()) * t_model_coef_;
  v.pi_obs.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double pz1 = logistic(eta_z(i));
    double pt1 = logistic(eta_t(i));
    double pz = data.z()(i) == 1.0 ? pz1 : 1.0 - pz1;
    double pt = data.t()(i) == 1.0 ? pt1 : 1.0 - pt1;
    v.pi_obs(i) = pz * pt;
  }
  return v;
}

double NuisanceFit::delta_y(const Eigen::VectorXd& x) const {
  return index(mu_y_spec_, mu_y_coef_, 1, 1, x) - index(mu_y_spec_, mu_y_coef_, 0, 1, x) -
         index(mu_y_spec_, mu_y_coef_, 1, 0, x) + index(mu_y_spec_, mu_y_coef_, 0, 0, x);
}

double NuisanceFit::delta_d(const Eigen::VectorXd& x) const {
  return index(mu_d_spec_, mu_d_coef_, 1, 1, x) - index(mu_d_spec_, mu_d_coef_, 0, 1, x) -
         index(mu_d_spec_, mu_d_coef_, 1, 0, x) + index(mu_d_spec_, mu_d_coef_, 0, 0, x);
}

}  // namespace idid
