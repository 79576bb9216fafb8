#include "idid/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "idid/errors.hpp"
#include "idid/rng.hpp"

namespace idid {
namespace {

constexpr int kMaxAttemptsPerReplicate = 10;

std::vector<Eigen::Index> draw_row_indices(const Dataset& data, RngStream& rng) {
  const Eigen::Index n = data.n();
  std::vector<Eigen::Index> idx(n);
  for (Eigen::Index i = 0; i < n; ++i)
    idx[i] = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
  return idx;
}

std::vector<Eigen::Index> draw_block_indices(const Dataset& data,
                                             const std::map<std::string, std::vector<Eigen::Index>>& blocks,
                                             RngStream& rng) {
  std::vector<const std::vector<Eigen::Index>*> pool;
  pool.reserve(blocks.size());
  for (const auto& [id, rows] : blocks) pool.push_back(&rows);
  const auto b = pool.size();
  std::vector<Eigen::Index> idx;
  idx.reserve(data.n());
  for (size_t k = 0; k < b; ++k) {
    size_t pick = static_cast<size_t>(rng.uniform() * static_cast<double>(b));
    for (Eigen::Index row : *pool[pick]) idx.push_back(row);
  }
  return idx;
}

void run_parallel(int n_tasks, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (int i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < std::min(threads, n_tasks); ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

double interpolated_quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw ValidationError(ErrorKind::InvalidArgument, "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

BootstrapResult percentile_bootstrap(
    const Dataset& data, const std::function<Eigen::VectorXd(const Dataset&)>& estimator,
    const BootstrapConfig& config) {
  if (config.replications < 2)
    throw ValidationError(ErrorKind::InvalidArgument, "bootstrap needs >= 2 replications");
  if (!(config.ci_level > 0.0 && config.ci_level < 1.0))
    throw ValidationError(ErrorKind::InvalidArgument, "ci_level must be in (0,1)");

  std::map<std::string, std::vector<Eigen::Index>> blocks;
  if (config.unit == ResampleUnit::UnitBlock) {
    if (!data.has_unit_ids())
      throw ValidationError(ErrorKind::InvalidArgument,
                            "block bootstrap requires unit ids");
    for (Eigen::Index i = 0; i < data.n(); ++i) blocks[data.unit_ids()[i]].push_back(i);
  }

  // the estimator must succeed on the original data
  Eigen::VectorXd base = estimator(data);
  const int dim = static_cast<int>(base.size());
  const int b = config.replications;

  Eigen::MatrixXd replicates(b, dim);
  std::vector<int> attempts_used(b, 0);

  run_parallel(b, config.threads, [&](int r) {
    for (int attempt = 0; attempt < kMaxAttemptsPerReplicate; ++attempt) {
      RngStream rng(config.master_seed,
                    {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(attempt)});
      std::vector<Eigen::Index> idx = config.unit == ResampleUnit::Row
                                          ? draw_row_indices(data, rng)
                                          : draw_block_indices(data, blocks, rng);
      try {
        Eigen::VectorXd est = estimator(data.select(idx));
        replicates.row(r) = est.transpose();
        attempts_used[r] = attempt;
        return;
      } catch (const EstimationError&) {
        // degenerate resample (EmptyCell, DegenerateTrend, ...): redraw
      }
    }
    throw EstimationError(ErrorKind::TooManyDegenerateResamples,
                          "replicate " + std::to_string(r) + " exceeded " +
                              std::to_string(kMaxAttemptsPerReplicate) + " attempts");
  });

  BootstrapResult result;
  result.replicates = replicates;
  for (int v : attempts_used) result.redraws += v;
  result.se.resize(dim);
  result.ci.resize(dim);
  const double alpha = 1.0 - config.ci_level;
  for (int j = 0; j < dim; ++j) {
    double mean = replicates.col(j).mean();
    result.se(j) = std::sqrt((replicates.col(j).array() - mean).square().sum() /
                             static_cast<double>(b - 1));
    std::vector<double> col(replicates.col(j).data(), replicates.col(j).data() + b);
    result.ci[j] = {interpolated_quantile(col, alpha / 2.0),
                    interpolated_quantile(col, 1.0 - alpha / 2.0)};
  }
  return result;
}

namespace {

struct SensitivityInputs {
  double delta_y = 0.0;
  double delta_d = 0.0;
  double shift_numerator = 0.0;  // mu_d contrast whose drift is removed
};

std::vector<double> drift_grid(const SensitivityConfig& config) {
  if (config.gamma_lower > 0.0 || config.gamma_upper < 0.0 ||
      config.gamma_lower > config.gamma_upper)
    throw ValidationError(ErrorKind::InvalidArgument,
                          "sensitivity bounds must satisfy gamma_lower <= 0 <= gamma_upper");
  if (config.grid_points < 2)
    throw ValidationError(ErrorKind::InvalidArgument, "grid_points must be >= 2");
  if (config.gamma_lower == config.gamma_upper) return {config.gamma_lower};
  std::vector<double> grid(config.grid_points);
  const double step =
      (config.gamma_upper - config.gamma_lower) / static_cast<double>(config.grid_points - 1);
  for (int k = 0; k < config.grid_points; ++k)
    grid[k] = config.gamma_lower + step * static_cast<double>(k);
  return grid;
}

SensitivityBand build_band(const std::vector<double>& grid,
                           const std::function<SensitivityPoint(double)>& eval) {
  SensitivityBand band;
  band.grid.reserve(grid.size());
  for (double delta : grid) band.grid.push_back(eval(delta));
  band.union_ci = {band.grid.front().ci_low, band.grid.front().ci_high};
  for (const auto& pt : band.grid) {
    band.union_ci.lo = std::min(band.union_ci.lo, pt.ci_low);
    band.union_ci.hi = std::max(band.union_ci.hi, pt.ci_high);
  }
  return band;
}

// Residual coefficient at time t: the drift-adjusted effect active at t.
double cell_coef(double estimate, double delta, int t, SensitivityTarget target) {
  return target == SensitivityTarget::Time0Effect
             ? estimate + static_cast<double>(t) * delta
             : estimate + static_cast<double>(1 - t) * delta;
}

}  // namespace

SensitivityBand sensitivity_one_sample(const Dataset& data, const SensitivityConfig& config) {
  CellTable cells = cell_table(data);
  for (const auto& c : cells.cells)
    if (c.n_cell < 2)
      throw EstimationError(ErrorKind::CellTooSmall, "sensitivity needs >= 2 rows per cell");

  const double delta_y = cells.delta_y();
  const double delta_d = cells.delta_d();
  if (std::abs(delta_d) <= 1e-12)
    throw EstimationError(ErrorKind::DegenerateTrend, "delta_D is zero in-sample");

  // time-0 removes the later-period exposure gain, time-1 the earlier one
  const double shift = config.target == SensitivityTarget::Time0Effect
                           ? cells.cell(1, 1).mean_d - cells.cell(1, 0).mean_d
                           : cells.cell(0, 1).mean_d - cells.cell(0, 0).mean_d;
  const double sign = config.target == SensitivityTarget::Time0Effect ? -1.0 : 1.0;
  const double n = static_cast<double>(cells.n_total);

  return build_band(drift_grid(config), [&](double delta) {
    SensitivityPoint pt;
    pt.delta = delta;
    pt.estimate = delta_y / delta_d + sign * delta * shift / delta_d;
    double acc = 0.0;
    for (const auto& c : cells.cells) {
      double coef = cell_coef(pt.estimate, delta, c.t, config.target);
      double var_resid = c.var_y - 2.0 * coef * c.cov_yd + coef * coef * c.var_d;
      acc += var_resid / (static_cast<double>(c.n_cell) / n);
    }
    double se = std::sqrt(acc / (n * delta_d * delta_d));
    pt.ci_low = pt.estimate - config.z_crit * se;
    pt.ci_high = pt.estimate + config.z_crit * se;
    return pt;
  });
}

SensitivityBand sensitivity_two_sample(const CellTable& outcome, const CellTable& exposure,
                                       const SensitivityConfig& config) {
  const double delta_y = outcome.delta_y();
  const double delta_d = exposure.delta_d();
  if (std::abs(delta_d) <= 1e-12)
    throw EstimationError(ErrorKind::DegenerateTrend, "delta_Db is zero");

  const double shift = config.target == SensitivityTarget::Time0Effect
                           ? exposure.cell(1, 1).mean_d - exposure.cell(1, 0).mean_d
                           : exposure.cell(0, 1).mean_d - exposure.cell(0, 0).mean_d;
  const double sign = config.target == SensitivityTarget::Time0Effect ? -1.0 : 1.0;

  return build_band(drift_grid(config), [&](double delta) {
    SensitivityPoint pt;
    pt.delta = delta;
    pt.estimate = delta_y / delta_d + sign * delta * shift / delta_d;
    double acc = 0.0;
    for (int t = 0; t < 2; ++t) {
      for (int z = 0; z < 2; ++z) {
        double se_y = outcome.cell(t, z).se_mean_y;
        double se_d = exposure.cell(t, z).se_mean_d;
        double coef = cell_coef(pt.estimate, delta, t, config.target);
        acc += se_y * se_y + coef * coef * se_d * se_d;
      }
    }
    double se = std::sqrt(acc) / std::abs(delta_d);
    pt.ci_low = pt.estimate - config.z_crit * se;
    pt.ci_high = pt.estimate + config.z_crit * se;
    return pt;
  });
}

}  // namespace idid
