#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idid/types.hpp"

namespace idid {

/// Column-name mapping for microdata CSV files. With `covariates` empty,
/// every column not otherwise mapped is treated as a covariate.
struct CsvSchema {
  std::string t = "t";
  std::string z = "z";
  std::string d = "d";
  std::string y = "y";
  std::vector<std::string> covariates;
  std::optional<std::string> unit_id;
};

/// Parse a microdata CSV (header row, UTF-8, "." decimal).
/// Errors: MissingColumn, NonBinaryValue(row, column), NonFiniteValue(row, column).
Dataset load_dataset(const std::string& path, const CsvSchema& schema = {});

enum class SummaryRole { Outcome, Exposure };

/// Parse a 4-row summary CSV with header `t,z,mean,se,n`. The mean/se land in
/// the y-fields (Outcome) or d-fields (Exposure); variances are reconstructed
/// as se^2 * n_cell; cov_yd is zero and flagged unavailable.
CellTable load_summary(const std::string& path, SummaryRole role);

/// Inverse of load_summary: writes `t,z,mean,se,n` rows with full round-trip
/// precision so mean/se/n reload exactly.
void write_summary(const CellTable& table, SummaryRole role, const std::string& path);
std::string summary_to_csv(const CellTable& table, SummaryRole role);

}  // namespace idid
