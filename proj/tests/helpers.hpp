#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "idid/rng.hpp"
#include "idid/types.hpp"

namespace idid::testing {

/// Eight-row fixture: two rows per (t, z) cell with
///   mean_y = {(0,0):2, (0,1):2, (1,0):3, (1,1):5}
///   mean_d = {0.5, 0.5, 0.5, 1.0}
/// so beta = 2/0.5 = 4, SE^2 = 40, first-stage zt coefficient 0.5 with
/// residual variance 0.375, and kappa^2 = 1/3.
inline Dataset d8() {
  Eigen::VectorXd t(8), z(8), d(8), y(8);
  Eigen::MatrixXd x(8, 0);
  // t, z, d, y
  double rows[8][4] = {
      {0, 0, 0, 2}, {0, 0, 1, 2}, {0, 1, 0, 1}, {0, 1, 1, 3},
      {1, 0, 0, 2}, {1, 0, 1, 4}, {1, 1, 1, 3}, {1, 1, 1, 7},
  };
  for (int i = 0; i < 8; ++i) {
    t(i) = rows[i][0];
    z(i) = rows[i][1];
    d(i) = rows[i][2];
    y(i) = rows[i][3];
  }
  return Dataset(t, z, d, y, x, {});
}

inline std::string d8_csv_text() {
  return "t,z,d,y\n"
         "0,0,0,2\n"
         "0,0,1,2\n"
         "0,1,0,1\n"
         "0,1,1,3\n"
         "1,0,0,2\n"
         "1,0,1,4\n"
         "1,1,1,3\n"
         "1,1,1,7\n";
}

/// Random p=0 dataset with a strong z*t exposure trend; redraws until every
/// cell has at least `min_cell` rows and |delta_d| is comfortably nonzero.
inline Dataset random_dataset_p0(RngStream& rng, int n, int min_cell = 2) {
  for (;;) {
    Eigen::VectorXd t(n), z(n), d(n), y(n);
    Eigen::MatrixXd x(n, 0);
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
      t(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      z(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      double p_d = 0.25 + 0.15 * t(i) + 0.4 * t(i) * z(i);
      d(i) = rng.bernoulli(p_d) ? 1.0 : 0.0;
      y(i) = 2.0 * d(i) + t(i) + 0.5 * z(i) + rng.normal();
      ++counts[2 * static_cast<int>(t(i)) + static_cast<int>(z(i))];
    }
    bool ok = true;
    for (int c = 0; c < 4; ++c) ok = ok && counts[c] >= min_cell;
    if (!ok) continue;
    Dataset data(t, z, d, y, x, {});
    CellTable cells = cell_table(data);
    if (std::abs(cells.delta_d()) < 0.05) continue;
    return data;
  }
}

/// Random p=1 dataset from the same family, with a covariate entering the
/// outcome, suitable for the invariance checks.
inline Dataset random_dataset_p1(RngStream& rng, int n) {
  for (;;) {
    Eigen::VectorXd t(n), z(n), d(n), y(n);
    Eigen::MatrixXd x(n, 1);
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
      t(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      z(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      x(i, 0) = rng.normal();
      double p_d = 0.25 + 0.15 * t(i) + 0.4 * t(i) * z(i);
      d(i) = rng.bernoulli(p_d) ? 1.0 : 0.0;
      y(i) = (1.0 + 0.5 * x(i, 0)) * d(i) + t(i) + 0.5 * z(i) + x(i, 0) + rng.normal();
      ++counts[2 * static_cast<int>(t(i)) + static_cast<int>(z(i))];
    }
    bool ok = true;
    for (int c = 0; c < 4; ++c) ok = ok && counts[c] >= 4;
    if (!ok) continue;
    Dataset data(t, z, d, y, x, {"x1"});
    CellTable cells = cell_table(data);
    if (std::abs(cells.delta_d()) < 0.1) continue;
    return data;
  }
}

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int k = 0;; ++k) {
      auto candidate = base / ("idid_test_" + std::to_string(::getpid()) + "_" + std::to_string(k));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::string p = file(name);
    std::ofstream out(p);
    out << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace idid::testing
