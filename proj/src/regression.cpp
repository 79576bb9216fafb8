#include "idid/regression.hpp"

#include <cmath>

#include "idid/errors.hpp"

namespace idid {

double logistic(double eta) {
  double p = 1.0 / (1.0 + std::exp(-eta));
  if (p < 1e-15) p = 1e-15;
  if (p > 1.0 - 1e-15) p = 1.0 - 1e-15;
  return p;
}

LinearFit fit_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                     const Eigen::VectorXd* weights) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (response.size() != n)
    throw ValidationError(ErrorKind::DimensionMismatch, "design rows != response length");
  if (weights && weights->size() != n)
    throw ValidationError(ErrorKind::DimensionMismatch, "weights length != rows");
  if (n < p)
    throw ValidationError(ErrorKind::DimensionMismatch, "fewer rows than columns");

  Eigen::MatrixXd a = design;
  Eigen::VectorXd b = response;
  if (weights) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((*weights)(i) < 0.0)
        throw ValidationError(ErrorKind::InvalidArgument, "negative weight");
      double s = std::sqrt((*weights)(i));
      a.row(i) *= s;
      b(i) *= s;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < p)
    throw EstimationError(ErrorKind::RankDeficient, "design matrix is rank deficient");

  LinearFit fit;
  fit.n = n;
  fit.coefficients = qr.solve(b);

  Eigen::VectorXd resid = b - a * fit.coefficients;
  double ssr = resid.squaredNorm();
  fit.residual_variance = n > p ? ssr / static_cast<double>(n - p) : 0.0;

  // (X'WX)^{-1} = P R^{-1} R^{-T} P'
  Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  Eigen::MatrixXd rinv = r.inverse();
  Eigen::MatrixXd inner = rinv * rinv.transpose();
  const auto& perm = qr.colsPermutation();
  fit.xtx_inverse = perm * inner * perm.transpose();
  return fit;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (response.size() != n)
    throw ValidationError(ErrorKind::DimensionMismatch, "design rows != response length");
  if (n < p)
    throw ValidationError(ErrorKind::DimensionMismatch, "fewer rows than columns");
  bool any0 = false, any1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (response(i) == 0.0) any0 = true;
    else if (response(i) == 1.0) any1 = true;
    else throw ValidationError(ErrorKind::NonBinaryValue, "logistic response must be 0/1");
  }
  if (!any0 || !any1)
    throw EstimationError(ErrorKind::Separation, "constant response: degenerate MLE");

  LogisticFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta(n), prob(n), w(n);

  constexpr int kMaxIter = 100;
  constexpr double kCoefTol = 1e-10;
  constexpr double kDivergence = 1e3;

  for (int iter = 1; iter <= kMaxIter; ++iter) {
    eta = design * fit.coefficients;
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = logistic(eta(i));
      w(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-10);
    }
    Eigen::VectorXd score = design.transpose() * (response - prob);
    Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success)
      throw EstimationError(ErrorKind::RankDeficient, "singular information matrix");
    Eigen::VectorXd step = ldlt.solve(score);
    fit.coefficients += step;
    fit.iterations = iter;

    if (fit.coefficients.lpNorm<Eigen::Infinity>() > kDivergence)
      throw EstimationError(ErrorKind::Separation, "diverging coefficients: separation");
    double score_norm = score.lpNorm<Eigen::Infinity>();
    if (step.lpNorm<Eigen::Infinity>() <= kCoefTol ||
        score_norm <= 1e-8 * static_cast<double>(n)) {
      fit.converged = true;
      return fit;
    }
  }
  throw EstimationError(ErrorKind::NotConverged, "IRLS did not converge in 100 iterations");
}

}  // namespace idid
