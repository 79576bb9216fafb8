#include "idid/types.hpp"

#include <cmath>
#include <utility>

#include "idid/errors.hpp"
#include "idid/summation.hpp"

namespace idid {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonBinaryValue: return "NonBinaryValue";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::MissingCell: return "MissingCell";
    case ErrorKind::NegativeSE: return "NegativeSE";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyCell: return "EmptyCell";
    case ErrorKind::CellTooSmall: return "CellTooSmall";
    case ErrorKind::DegenerateTrend: return "DegenerateTrend";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::Separation: return "Separation";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::DeltaDNearZero: return "DeltaDNearZero";
    case ErrorKind::WeakFirstStage: return "WeakFirstStage";
    case ErrorKind::ZeroSE: return "ZeroSE";
    case ErrorKind::TooManyDegenerateResamples: return "TooManyDegenerateResamples";
  }
  return "Unknown";
}

Dataset::Dataset(Eigen::VectorXd t, Eigen::VectorXd z, Eigen::VectorXd d,
                 Eigen::VectorXd y, Eigen::MatrixXd x,
                 std::vector<std::string> covariate_names,
                 std::vector<std::string> unit_ids)
    : t_(std::move(t)),
      z_(std::move(z)),
      d_(std::move(d)),
      y_(std::move(y)),
      x_(std::move(x)),
      covariate_names_(std::move(covariate_names)),
      unit_ids_(std::move(unit_ids)) {
  validate();
}

void Dataset::validate() const {
  const Eigen::Index n = t_.size();
  if (n < 1) throw ValidationError(ErrorKind::InvalidArgument, "dataset requires n >= 1");
  if (z_.size() != n || d_.size() != n || y_.size() != n || x_.rows() != n)
    throw ValidationError(ErrorKind::DimensionMismatch, "dataset columns have unequal lengths");
  if (static_cast<Eigen::Index>(covariate_names_.size()) != x_.cols())
    throw ValidationError(ErrorKind::DimensionMismatch, "covariate_names does not match x columns");
  if (!unit_ids_.empty() && static_cast<Eigen::Index>(unit_ids_.size()) != n)
    throw ValidationError(ErrorKind::DimensionMismatch, "unit_ids does not match n");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto* col : {&t_, &z_, &d_}) {
      double v = (*col)(i);
      if (v != 0.0 && v != 1.0)
        throw ValidationError(ErrorKind::NonBinaryValue, "t/z/d must be 0 or 1");
    }
    if (!std::isfinite(y_(i)))
      throw ValidationError(ErrorKind::NonFiniteValue, "non-finite outcome");
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      if (!std::isfinite(x_(i, j)))
        throw ValidationError(ErrorKind::NonFiniteValue, "non-finite covariate");
    }
  }
}

Dataset Dataset::from_rows(const std::vector<Observation>& rows,
                           std::vector<std::string> covariate_names) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw ValidationError(ErrorKind::InvalidArgument, "dataset requires n >= 1");
  const Eigen::Index p = static_cast<Eigen::Index>(covariate_names.size());
  Eigen::VectorXd t(n), z(n), d(n), y(n);
  Eigen::MatrixXd x(n, p);
  std::vector<std::string> ids;
  bool any_id = false;
  for (const auto& r : rows) any_id = any_id || r.unit_id.has_value();
  if (any_id) ids.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Observation& r = rows[i];
    if (r.x.size() != p)
      throw ValidationError(ErrorKind::DimensionMismatch, "row covariate length mismatch");
    t(i) = r.t;
    z(i) = r.z;
    d(i) = r.d;
    y(i) = r.y;
    x.row(i) = r.x.transpose();
    if (any_id) ids[i] = r.unit_id.value_or("");
  }
  return Dataset(std::move(t), std::move(z), std::move(d), std::move(y), std::move(x),
                 std::move(covariate_names), std::move(ids));
}

Observation Dataset::row(Eigen::Index i) const {
  Observation o;
  o.t = static_cast<int>(t_(i));
  o.z = static_cast<int>(z_(i));
  o.d = static_cast<int>(d_(i));
  o.y = y_(i);
  o.x = x_.row(i).transpose();
  if (!unit_ids_.empty()) o.unit_id = unit_ids_[i];
  return o;
}

Dataset Dataset::select(const std::vector<Eigen::Index>& indices) const {
  const Eigen::Index m = static_cast<Eigen::Index>(indices.size());
  Eigen::VectorXd t(m), z(m), d(m), y(m);
  Eigen::MatrixXd x(m, x_.cols());
  std::vector<std::string> ids;
  if (!unit_ids_.empty()) ids.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::Index i = indices[k];
    t(k) = t_(i);
    z(k) = z_(i);
    d(k) = d_(i);
    y(k) = y_(i);
    x.row(k) = x_.row(i);
    if (!ids.empty()) ids[k] = unit_ids_[i];
  }
  return Dataset(std::move(t), std::move(z), std::move(d), std::move(y), std::move(x),
                 covariate_names_, std::move(ids));
}

double CellTable::delta_y() const {
  return cell(1, 1).mean_y - cell(0, 1).mean_y - cell(1, 0).mean_y + cell(0, 0).mean_y;
}

double CellTable::delta_d() const {
  return cell(1, 1).mean_d - cell(0, 1).mean_d - cell(1, 0).mean_d + cell(0, 0).mean_d;
}

CellTable cell_table(const Dataset& data) {
  CellTable table;
  table.n_total = static_cast<long>(data.n());
  table.cov_available = true;

  const auto& t = data.t();
  const auto& z = data.z();
  const auto& d = data.d();
  const auto& y = data.y();

  for (int ct = 0; ct < 2; ++ct) {
    for (int cz = 0; cz < 2; ++cz) {
      CompensatedSum sum_y, sum_d;
      long n_cell = 0;
      for (Eigen::Index i = 0; i < data.n(); ++i) {
        if (static_cast<int>(t(i)) == ct && static_cast<int>(z(i)) == cz) {
          sum_y.add(y(i));
          sum_d.add(d(i));
          ++n_cell;
        }
      }
      if (n_cell == 0)
        throw EstimationError(ErrorKind::EmptyCell,
                              "empty (t=" + std::to_string(ct) + ",z=" + std::to_string(cz) +
                                  ") cell: positivity violated in-sample");
      CellSummary& c = table.cell(ct, cz);
      c.t = ct;
      c.z = cz;
      c.n_cell = n_cell;
      c.mean_y = sum_y.value() / static_cast<double>(n_cell);
      c.mean_d = sum_d.value() / static_cast<double>(n_cell);

      // second pass for centered moments keeps them order-independent too
      CompensatedSum ss_y, ss_d, ss_yd;
      for (Eigen::Index i = 0; i < data.n(); ++i) {
        if (static_cast<int>(t(i)) == ct && static_cast<int>(z(i)) == cz) {
          double ry = y(i) - c.mean_y;
          double rd = d(i) - c.mean_d;
          ss_y.add(ry * ry);
          ss_d.add(rd * rd);
          ss_yd.add(ry * rd);
        }
      }
      if (n_cell > 1) {
        double denom = static_cast<double>(n_cell - 1);
        c.var_y = ss_y.value() / denom;
        c.var_d = ss_d.value() / denom;
        c.cov_yd = ss_yd.value() / denom;
      }
      c.se_mean_y = std::sqrt(c.var_y / static_cast<double>(n_cell));
      c.se_mean_d = std::sqrt(c.var_d / static_cast<double>(n_cell));
    }
  }
  return table;
}

}  // namespace idid
