#include "idid/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "idid/errors.hpp"

namespace idid {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& token, long row, const std::string& column) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ValidationError(ErrorKind::NonFiniteValue,
                          "row " + std::to_string(row) + ", column '" + column +
                              "': not a finite number: '" + token + "'");
  return value;
}

double parse_binary(const std::string& token, long row, const std::string& column) {
  if (token == "0") return 0.0;
  if (token == "1") return 1.0;
  throw ValidationError(ErrorKind::NonBinaryValue,
                        "row " + std::to_string(row) + ", column '" + column +
                            "': expected 0 or 1, got '" + token + "'");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError(ErrorKind::InvalidArgument, "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty())
    throw ValidationError(ErrorKind::InvalidArgument, "empty file: " + path);
  return lines;
}

size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw ValidationError(ErrorKind::MissingColumn, "missing column: " + name);
  return static_cast<size_t>(it - header.begin());
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Dataset load_dataset(const std::string& path, const CsvSchema& schema) {
  auto lines = read_lines(path);
  auto header = split_line(lines[0]);

  size_t ct = find_column(header, schema.t);
  size_t cz = find_column(header, schema.z);
  size_t cd = find_column(header, schema.d);
  size_t cy = find_column(header, schema.y);
  std::optional<size_t> cid;
  if (schema.unit_id) cid = find_column(header, *schema.unit_id);

  std::vector<std::string> covariate_names = schema.covariates;
  if (covariate_names.empty()) {
    for (size_t j = 0; j < header.size(); ++j) {
      if (j == ct || j == cz || j == cd || j == cy) continue;
      if (cid && j == *cid) continue;
      covariate_names.push_back(header[j]);
    }
  }
  std::vector<size_t> cx;
  for (const auto& name : covariate_names) cx.push_back(find_column(header, name));

  const long n = static_cast<long>(lines.size()) - 1;
  if (n < 1) throw ValidationError(ErrorKind::InvalidArgument, "no data rows in " + path);
  const Eigen::Index p = static_cast<Eigen::Index>(cx.size());

  Eigen::VectorXd t(n), z(n), d(n), y(n);
  Eigen::MatrixXd x(n, p);
  std::vector<std::string> ids;
  if (cid) ids.resize(n);

  for (long i = 0; i < n; ++i) {
    auto fields = split_line(lines[i + 1]);
    if (fields.size() != header.size())
      throw ValidationError(ErrorKind::DimensionMismatch,
                            "row " + std::to_string(i + 1) + ": expected " +
                                std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
    t(i) = parse_binary(fields[ct], i + 1, schema.t);
    z(i) = parse_binary(fields[cz], i + 1, schema.z);
    d(i) = parse_binary(fields[cd], i + 1, schema.d);
    y(i) = parse_number(fields[cy], i + 1, schema.y);
    for (Eigen::Index j = 0; j < p; ++j)
      x(i, j) = parse_number(fields[cx[j]], i + 1, covariate_names[j]);
    if (cid) ids[i] = fields[*cid];
  }
  return Dataset(std::move(t), std::move(z), std::move(d), std::move(y), std::move(x),
                 std::move(covariate_names), std::move(ids));
}

CellTable load_summary(const std::string& path, SummaryRole role) {
  auto lines = read_lines(path);
  auto header = split_line(lines[0]);
  size_t ct = find_column(header, "t");
  size_t cz = find_column(header, "z");
  size_t cm = find_column(header, "mean");
  size_t cs = find_column(header, "se");
  size_t cn = find_column(header, "n");

  CellTable table;
  table.cov_available = false;
  std::array<bool, 4> seen{false, false, false, false};

  for (size_t i = 1; i < lines.size(); ++i) {
    auto f = split_line(lines[i]);
    if (f.size() != header.size())
      throw ValidationError(ErrorKind::DimensionMismatch,
                            "summary row " + std::to_string(i) + ": wrong field count");
    int t = static_cast<int>(parse_binary(f[ct], static_cast<long>(i), "t"));
    int z = static_cast<int>(parse_binary(f[cz], static_cast<long>(i), "z"));
    double mean = parse_number(f[cm], static_cast<long>(i), "mean");
    double se = parse_number(f[cs], static_cast<long>(i), "se");
    double n = parse_number(f[cn], static_cast<long>(i), "n");
    if (se < 0.0)
      throw ValidationError(ErrorKind::NegativeSE,
                            "summary row " + std::to_string(i) + ": negative se");
    if (n < 1.0 || n != std::floor(n))
      throw ValidationError(ErrorKind::InvalidArgument,
                            "summary row " + std::to_string(i) + ": n must be a count >= 1");
    if (seen[2 * t + z])
      throw ValidationError(ErrorKind::InvalidArgument,
                            "duplicate (t,z) cell in summary file");
    seen[2 * t + z] = true;

    CellSummary& c = table.cell(t, z);
    c.t = t;
    c.z = z;
    c.n_cell = static_cast<long>(n);
    if (role == SummaryRole::Outcome) {
      c.mean_y = mean;
      c.se_mean_y = se;
      c.var_y = se * se * n;
    } else {
      c.mean_d = mean;
      c.se_mean_d = se;
      c.var_d = se * se * n;
    }
  }
  for (int t = 0; t < 2; ++t)
    for (int z = 0; z < 2; ++z)
      if (!seen[2 * t + z])
        throw ValidationError(ErrorKind::MissingCell,
                              "missing (t=" + std::to_string(t) + ",z=" + std::to_string(z) +
                                  ") record in summary file");
  table.n_total = 0;
  for (const auto& c : table.cells) table.n_total += c.n_cell;
  return table;
}

std::string summary_to_csv(const CellTable& table, SummaryRole role) {
  std::string out = "t,z,mean,se,n\n";
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      const CellSummary& c = table.cell(t, z);
      double mean = role == SummaryRole::Outcome ? c.mean_y : c.mean_d;
      double se = role == SummaryRole::Outcome ? c.se_mean_y : c.se_mean_d;
      out += std::to_string(t) + "," + std::to_string(z) + "," + format_double(mean) + "," +
             format_double(se) + "," + std::to_string(c.n_cell) + "\n";
    }
  }
  return out;
}

void write_summary(const CellTable& table, SummaryRole role, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError(ErrorKind::InvalidArgument, "cannot write file: " + path);
  out << summary_to_csv(table, role);
}

}  // namespace idid
