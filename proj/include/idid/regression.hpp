#pragma once

#include <Eigen/Dense>

namespace idid {

/// Ordinary / weighted least squares solved by column-pivoted Householder QR.
struct LinearFit {
  Eigen::VectorXd coefficients;
  double residual_variance = 0.0;  // SSR / (n - p)
  Eigen::MatrixXd xtx_inverse;     // (X'WX)^{-1}
  Eigen::Index n = 0;
};

/// pre: rows(design) = len(response) >= cols(design), full column rank.
/// Throws RankDeficient on collinear columns, DimensionMismatch otherwise.
LinearFit fit_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                     const Eigen::VectorXd* weights = nullptr);

/// Logistic regression by IRLS (Newton on the log-likelihood).
/// Converged when max coefficient change <= 1e-10 or the score max-norm
/// <= 1e-8 * n; at most 100 iterations.
struct LogisticFit {
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
};

/// Throws Separation when the response is constant or the coefficient
/// max-norm exceeds 1e3 during iteration, NotConverged past 100 iterations.
LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// Numerically safe logistic function; output strictly inside (0, 1).
double logistic(double eta);

}  // namespace idid
