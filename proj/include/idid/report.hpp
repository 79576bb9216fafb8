#pragma once

#include <json.hpp>

#include "idid/diagnostics.hpp"
#include "idid/estimators.hpp"
#include "idid/inference.hpp"

namespace idid {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const Interval& iv);
nlohmann::json to_json(const WaldEstimate& est);
nlohmann::json to_json(const PsiEstimate& est);
nlohmann::json to_json(const WeakIdReport& rep);
nlohmann::json to_json(const SensitivityBand& band);

/// Skeleton report: {schema_version, command, warnings: []}.
nlohmann::json make_report(const std::string& command);

/// {error: {kind, message}} for stderr on failure.
nlohmann::json error_json(const std::string& kind, const std::string& message);

std::string sensitivity_band_csv(const SensitivityBand& band);

}  // namespace idid
