#pragma once

#include "idid/types.hpp"

namespace idid {

enum class WeakIdMethod { FirstStageF, SquaredZ };

/// Concentration-parameter estimate for the interaction instrument, with the
/// rule-of-10 flag.
struct WeakIdReport {
  double kappa2 = 0.0;
  WeakIdMethod method = WeakIdMethod::FirstStageF;
  double delta_d = 0.0;
  bool weak = true;  // kappa2 < 10
  bool covariates_included = false;
};

/// Microdata path: regress d on (1, z, t, z*t [, x]); kappa^2 is the squared
/// t-statistic of the z*t coefficient (homoskedastic OLS variance), which is
/// the F statistic for that single coefficient.
WeakIdReport weak_id_statistic(const Dataset& data, bool include_covariates);

/// Summary path: kappa^2 is the squared z-score delta_Db^2 / sum se_mean_d^2.
WeakIdReport weak_id_statistic(const CellTable& exposure_summary);

/// Same statistic via Frisch-Waugh-Lovell residualization: z*t is first
/// residualized on the remaining regressors, then d is regressed on the
/// residual. Agrees with the direct computation; kept as a separate route so
/// the equivalence is testable.
double weak_id_fwl_kappa2(const Dataset& data, bool include_covariates);

}  // namespace idid
