#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "idid/estimators.hpp"
#include "idid/types.hpp"

namespace idid {

enum class ResampleUnit { Row, UnitBlock };

struct BootstrapConfig {
  int replications = 200;
  ResampleUnit unit = ResampleUnit::Row;
  std::uint64_t master_seed = 0;
  double ci_level = 0.95;
  int threads = 1;
};

struct BootstrapResult {
  Eigen::VectorXd se;            // sample SD of the replicate estimates
  std::vector<Interval> ci;      // percentile interval per coordinate
  Eigen::MatrixXd replicates;    // B x dim, in replicate order
  int redraws = 0;               // degenerate resamples that were redrawn
};

/// Percentile bootstrap with replacement over rows or whole unit_id blocks.
/// Replicate r, attempt a draws from the stream (master_seed, r, a), so the
/// output is independent of thread scheduling. Resamples on which the
/// estimator raises an EstimationError are redrawn, at most 10 attempts per
/// replicate (<= 10*B in total); exhausting them raises
/// TooManyDegenerateResamples. Percentile CIs interpolate linearly between
/// order statistics.
BootstrapResult percentile_bootstrap(
    const Dataset& data, const std::function<Eigen::VectorXd(const Dataset&)>& estimator,
    const BootstrapConfig& config);

/// Empirical quantile with linear interpolation between order statistics.
double interpolated_quantile(std::vector<double> values, double q);

enum class SensitivityTarget { Time0Effect, Time1Effect };

struct SensitivityConfig {
  double gamma_lower = 0.0;  // <= 0
  double gamma_upper = 0.0;  // >= 0
  int grid_points = 101;
  SensitivityTarget target = SensitivityTarget::Time0Effect;
  double z_crit = 1.96;
};

struct SensitivityPoint {
  double delta = 0.0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct SensitivityBand {
  std::vector<SensitivityPoint> grid;
  Interval union_ci;  // [min ci_low, max ci_high] over the grid
};

/// Drift-adjusted trend-ratio estimate over a uniform grid of the drift
/// parameter. Time-0 target: beta(D) = delta_y/delta_d - D*(mu_d(1,1)-mu_d(1,0))/delta_d,
/// per-cell residual variance evaluated at beta(D) + t*D. The time-1 target
/// mirrors the roles of the two time points.
SensitivityBand sensitivity_one_sample(const Dataset& data, const SensitivityConfig& config);

/// Same construction from summary statistics alone:
/// SE^2(D) = sum_cells [se_mean_y^2 + (beta(D)+t*D)^2 se_mean_d^2] / delta_d^2.
SensitivityBand sensitivity_two_sample(const CellTable& outcome, const CellTable& exposure,
                                       const SensitivityConfig& config);

}  // namespace idid
