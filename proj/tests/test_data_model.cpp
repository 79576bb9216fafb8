#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "idid/csv.hpp"
#include "idid/errors.hpp"
#include "idid/rng.hpp"
#include "idid/types.hpp"
#include "helpers.hpp"

using namespace idid;
using idid::testing::TempDir;

TEST_CASE("load_dataset parses a plain 8-row file") {
  TempDir tmp;
  auto path = tmp.write("d8.csv", idid::testing::d8_csv_text());
  Dataset data = load_dataset(path);
  CHECK(data.n() == 8);
  CHECK(data.p() == 0);
  CHECK(data.y()(7) == 7.0);
  CHECK(data.row(3).z == 1);
}

TEST_CASE("load_dataset rejects non-binary exposure values") {
  TempDir tmp;
  auto path = tmp.write("bad.csv",
                        "t,z,d,y\n"
                        "0,0,0,1\n"
                        "0,1,1,2\n"
                        "1,0,2,3\n");
  try {
    load_dataset(path);
    FAIL("expected NonBinaryValue");
  } catch (const ValidationError& e) {
    CHECK(e.kind() == ErrorKind::NonBinaryValue);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    CHECK(std::string(e.what()).find("'d'") != std::string::npos);
  }
}

TEST_CASE("extra columns become covariates") {
  TempDir tmp;
  auto path = tmp.write("cov.csv",
                        "t,z,d,y,x1\n"
                        "0,0,0,1.5,0.25\n"
                        "1,1,1,2.5,-1.0\n");
  Dataset data = load_dataset(path);
  CHECK(data.p() == 1);
  CHECK(data.covariate_names() == std::vector<std::string>{"x1"});
  CHECK(data.x()(1, 0) == -1.0);
}

TEST_CASE("load_dataset rejects non-finite values and missing columns") {
  TempDir tmp;
  auto nan_path = tmp.write("nan.csv", "t,z,d,y\n0,0,0,nan\n");
  CHECK_THROWS_AS(load_dataset(nan_path), ValidationError);
  auto missing = tmp.write("missing.csv", "t,z,d\n0,0,0\n");
  try {
    load_dataset(missing);
    FAIL("expected MissingColumn");
  } catch (const ValidationError& e) {
    CHECK(e.kind() == ErrorKind::MissingColumn);
  }
}

TEST_CASE("cell_table reproduces the D8 cell means") {
  CellTable cells = cell_table(idid::testing::d8());
  CHECK(cells.cell(0, 0).mean_y == doctest::Approx(2.0));
  CHECK(cells.cell(0, 1).mean_y == doctest::Approx(2.0));
  CHECK(cells.cell(1, 0).mean_y == doctest::Approx(3.0));
  CHECK(cells.cell(1, 1).mean_y == doctest::Approx(5.0));
  CHECK(cells.cell(0, 0).mean_d == doctest::Approx(0.5));
  CHECK(cells.cell(1, 1).mean_d == doctest::Approx(1.0));
  CHECK(cells.n_total == 8);
  CHECK(cells.cov_available);
  // se_mean^2 == var / n_cell
  for (const auto& c : cells.cells)
    CHECK(c.se_mean_y * c.se_mean_y ==
          doctest::Approx(c.var_y / static_cast<double>(c.n_cell)).epsilon(1e-12));
}

TEST_CASE("cell_table reports the missing cell") {
  Eigen::VectorXd t(3), z(3), d(3), y(3);
  t << 0, 0, 1;
  z << 0, 1, 0;
  d << 0, 1, 1;
  y << 1, 2, 3;
  Dataset data(t, z, d, y, Eigen::MatrixXd(3, 0), {});
  try {
    cell_table(data);
    FAIL("expected EmptyCell");
  } catch (const EstimationError& e) {
    CHECK(e.kind() == ErrorKind::EmptyCell);
    CHECK(std::string(e.what()).find("t=1,z=1") != std::string::npos);
  }
}

TEST_CASE("constant outcome gives zero variance in every cell") {
  RngStream rng(7);
  Dataset base = idid::testing::random_dataset_p0(rng, 64);
  Eigen::VectorXd y_const = Eigen::VectorXd::Constant(base.n(), 3.25);
  Dataset data(base.t(), base.z(), base.d(), y_const, Eigen::MatrixXd(base.n(), 0), {});
  CellTable cells = cell_table(data);
  for (const auto& c : cells.cells) {
    CHECK(c.mean_y == doctest::Approx(3.25));
    CHECK(c.var_y == 0.0);
  }
}

TEST_CASE("cell_table is invariant under row permutation") {
  RngStream rng(11);
  Dataset data = idid::testing::random_dataset_p0(rng, 501);
  CellTable a = cell_table(data);

  std::vector<Eigen::Index> perm(data.n());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  CellTable b = cell_table(data.select(perm));

  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      const auto&ca = a.cell(t, z);
      const auto& cb = b.cell(t, z);
      CHECK(ca.n_cell == cb.n_cell);
      CHECK(ca.mean_y == doctest::Approx(cb.mean_y).epsilon(1e-12));
      CHECK(ca.var_y == doctest::Approx(cb.var_y).epsilon(1e-12));
      CHECK(ca.cov_yd == doctest::Approx(cb.cov_yd).epsilon(1e-12));
    }
  }
}

TEST_CASE("cell means recompose the grand total") {
  RngStream rng(13);
  Dataset data = idid::testing::random_dataset_p0(rng, 777);
  CellTable cells = cell_table(data);
  double total = 0.0;
  for (const auto& c : cells.cells) total += static_cast<double>(c.n_cell) * c.mean_y;
  CHECK(total == doctest::Approx(data.y().sum()).epsilon(1e-12));
}

TEST_CASE("summary files round-trip exactly") {
  RngStream rng(17);
  Dataset data = idid::testing::random_dataset_p0(rng, 333);
  CellTable cells = cell_table(data);

  TempDir tmp;
  auto path = tmp.file("sum.csv");
  write_summary(cells, SummaryRole::Exposure, path);
  CellTable loaded = load_summary(path, SummaryRole::Exposure);
  CHECK_FALSE(loaded.cov_available);
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      CHECK(loaded.cell(t, z).mean_d == cells.cell(t, z).mean_d);  // bit-exact
      CHECK(loaded.cell(t, z).se_mean_d == cells.cell(t, z).se_mean_d);
      CHECK(loaded.cell(t, z).n_cell == cells.cell(t, z).n_cell);
    }
  }
}

TEST_CASE("load_summary validates shape") {
  TempDir tmp;
  auto three = tmp.write("three.csv",
                         "t,z,mean,se,n\n"
                         "0,0,1.0,0.1,10\n"
                         "0,1,1.0,0.1,10\n"
                         "1,0,1.0,0.1,10\n");
  try {
    load_summary(three, SummaryRole::Outcome);
    FAIL("expected MissingCell");
  } catch (const ValidationError& e) {
    CHECK(e.kind() == ErrorKind::MissingCell);
  }

  auto negative = tmp.write("neg.csv",
                            "t,z,mean,se,n\n"
                            "0,0,1.0,0.1,10\n"
                            "0,1,1.0,-0.1,10\n"
                            "1,0,1.0,0.1,10\n"
                            "1,1,1.0,0.1,10\n");
  try {
    load_summary(negative, SummaryRole::Outcome);
    FAIL("expected NegativeSE");
  } catch (const ValidationError& e) {
    CHECK(e.kind() == ErrorKind::NegativeSE);
  }
}

TEST_CASE("load_summary reconstructs variances from se and n") {
  TempDir tmp;
  auto path = tmp.write("sum.csv",
                        "t,z,mean,se,n\n"
                        "0,0,0.20,0.010,400\n"
                        "0,1,0.25,0.010,400\n"
                        "1,0,0.30,0.012,500\n"
                        "1,1,0.60,0.012,500\n");
  CellTable table = load_summary(path, SummaryRole::Exposure);
  CHECK(table.cell(1, 1).var_d == doctest::Approx(0.012 * 0.012 * 500).epsilon(1e-14));
  CHECK(table.cell(1, 1).cov_yd == 0.0);
  CHECK(table.n_total == 1800);
  CHECK(table.delta_d() == doctest::Approx(0.6 - 0.25 - 0.3 + 0.2).epsilon(1e-14));
}
