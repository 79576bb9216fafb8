#include "idid/report.hpp"

#include <charconv>

namespace idid {

nlohmann::json to_json(const Interval& iv) { return nlohmann::json::array({iv.lo, iv.hi}); }

nlohmann::json to_json(const WaldEstimate& est) {
  return {{"estimate", est.beta},
          {"delta_y", est.delta_y},
          {"delta_d", est.delta_d},
          {"se", est.se},
          {"ci95", to_json(est.ci95)}};
}

nlohmann::json to_json(const PsiEstimate& est) {
  nlohmann::json psi = nlohmann::json::array();
  nlohmann::json se = nlohmann::json::array();
  nlohmann::json ci = nlohmann::json::array();
  for (Eigen::Index j = 0; j < est.psi.size(); ++j) {
    psi.push_back(est.psi(j));
    se.push_back(est.se(j));
    ci.push_back(to_json(est.ci95[static_cast<size_t>(j)]));
  }
  return {{"psi", psi}, {"se", se}, {"ci95", ci}};
}

nlohmann::json to_json(const WeakIdReport& rep) {
  return {{"kappa2", rep.kappa2},
          {"method", rep.method == WeakIdMethod::FirstStageF ? "first_stage_F" : "squared_z"},
          {"delta_d", rep.delta_d},
          {"weak", rep.weak},
          {"covariates_included", rep.covariates_included}};
}

nlohmann::json to_json(const SensitivityBand& band) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& pt : band.grid)
    grid.push_back({{"delta", pt.delta},
                    {"estimate", pt.estimate},
                    {"ci_low", pt.ci_low},
                    {"ci_high", pt.ci_high}});
  return {{"grid", grid}, {"union_ci", to_json(band.union_ci)}};
}

nlohmann::json make_report(const std::string& command) {
  return {{"schema_version", kReportSchemaVersion},
          {"command", command},
          {"warnings", nlohmann::json::array()}};
}

nlohmann::json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

std::string sensitivity_band_csv(const SensitivityBand& band) {
  auto fmt = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  std::string out = "delta,estimate,ci_low,ci_high\n";
  for (const auto& pt : band.grid)
    out += fmt(pt.delta) + "," + fmt(pt.estimate) + "," + fmt(pt.ci_low) + "," +
           fmt(pt.ci_high) + "\n";
  return out;
}

}  // namespace idid
