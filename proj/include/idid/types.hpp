#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace idid {

/// One microdata row: (T, Z, D, Y, X) with binary T, Z, D.
struct Observation {
  int t = 0;
  int z = 0;
  int d = 0;
  double y = 0.0;
  Eigen::VectorXd x;
  std::optional<std::string> unit_id;
};

/// Immutable microdata sample, stored column-wise. t/z/d hold exactly 0.0
/// or 1.0 so they can be used directly as design-matrix columns.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Eigen::VectorXd t, Eigen::VectorXd z, Eigen::VectorXd d,
          Eigen::VectorXd y, Eigen::MatrixXd x,
          std::vector<std::string> covariate_names,
          std::vector<std::string> unit_ids = {});

  static Dataset from_rows(const std::vector<Observation>& rows,
                           std::vector<std::string> covariate_names);

  Eigen::Index n() const { return t_.size(); }
  Eigen::Index p() const { return x_.cols(); }

  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& z() const { return z_; }
  const Eigen::VectorXd& d() const { return d_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  bool has_unit_ids() const { return !unit_ids_.empty(); }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }

  Observation row(Eigen::Index i) const;

  /// Rows selected by index, with repetition allowed (bootstrap resampling).
  Dataset select(const std::vector<Eigen::Index>& indices) const;

 private:
  void validate() const;

  Eigen::VectorXd t_, z_, d_, y_;
  Eigen::MatrixXd x_;
  std::vector<std::string> covariate_names_;
  std::vector<std::string> unit_ids_;
};

/// Sufficient statistics of (Y, D) within one (t, z) cell. Variances use the
/// n-1 denominator; se_mean_* = sqrt(var/n_cell) when built from microdata.
struct CellSummary {
  int t = 0;
  int z = 0;
  double mean_y = 0.0;
  double mean_d = 0.0;
  double var_y = 0.0;
  double var_d = 0.0;
  double cov_yd = 0.0;
  long n_cell = 0;
  double se_mean_y = 0.0;
  double se_mean_d = 0.0;
};

/// The four (t, z) cells. cov_available is false for tables reconstructed
/// from summary files, where within-cell Y-D covariances are unknowable.
struct CellTable {
  std::array<CellSummary, 4> cells;  // index = 2*t + z
  long n_total = 0;
  bool cov_available = false;

  const CellSummary& cell(int t, int z) const { return cells[2 * t + z]; }
  CellSummary& cell(int t, int z) { return cells[2 * t + z]; }

  /// Double differences over the (t, z) cells.
  double delta_y() const;
  double delta_d() const;
};

/// Per-cell means/variances/covariance with compensated summation, so the
/// result is invariant (to ~1 ulp) under row permutation.
/// Throws EmptyCell if any (t, z) combination is absent.
CellTable cell_table(const Dataset& data);

}  // namespace idid
