#include "idid/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "idid/csv.hpp"
#include "idid/design.hpp"
#include "idid/diagnostics.hpp"
#include "idid/errors.hpp"
#include "idid/estimators.hpp"
#include "idid/inference.hpp"
#include "idid/report.hpp"
#include "idid/simulation.hpp"

namespace idid {
namespace {

struct SchemaOptions {
  std::string t = "t", z = "z", d = "d", y = "y";
  std::string covariates;  // comma-separated; empty = all extra columns
  std::string unit_id;

  CsvSchema to_schema() const {
    CsvSchema schema;
    schema.t = t;
    schema.z = z;
    schema.d = d;
    schema.y = y;
    if (!covariates.empty()) {
      std::stringstream ss(covariates);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) schema.covariates.push_back(item);
      }
    }
    if (!unit_id.empty()) schema.unit_id = unit_id;
    return schema;
  }
};

void add_schema_options(CLI::App* cmd, SchemaOptions& opts) {
  cmd->add_option("--t-col", opts.t, "Column holding the time indicator");
  cmd->add_option("--z-col", opts.z, "Column holding the binary instrument");
  cmd->add_option("--d-col", opts.d, "Column holding the exposure");
  cmd->add_option("--y-col", opts.y, "Column holding the outcome");
  cmd->add_option("--covariates", opts.covariates,
                  "Comma-separated covariate columns (default: every unmapped column)");
  cmd->add_option("--unit-id-col", opts.unit_id, "Column holding unit ids (block bootstrap)");
}

void emit(const nlohmann::json& report, const std::string& output_path, std::ostream& out) {
  if (output_path.empty()) {
    out << report.dump(2) << "\n";
    return;
  }
  std::ofstream file(output_path);
  if (!file)
    throw ValidationError(ErrorKind::InvalidArgument, "cannot write file: " + output_path);
  file << report.dump(2) << "\n";
}

std::vector<int> resolve_modifiers(const Dataset& data, const std::string& csv_names) {
  std::vector<int> indices;
  if (csv_names.empty()) {
    for (int j = 0; j < data.p(); ++j) indices.push_back(j);
    return indices;
  }
  std::stringstream ss(csv_names);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    auto it = std::find(data.covariate_names().begin(), data.covariate_names().end(), name);
    if (it == data.covariate_names().end())
      throw ValidationError(ErrorKind::MissingColumn, "unknown effect modifier: " + name);
    indices.push_back(static_cast<int>(it - data.covariate_names().begin()));
  }
  return indices;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ValidationError& e) {
    err << error_json(e.kind_name(), e.what()).dump(2) << "\n";
    return 1;
  } catch (const EstimationError& e) {
    err << error_json(e.kind_name(), e.what()).dump(2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << error_json("Internal", e.what()).dump(2) << "\n";
    return 1;
  }
}

namespace {

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Instrumented difference-in-differences estimators"};
  app.require_subcommand(1);

  // ---- estimate ----------------------------------------------------------
  auto* estimate = app.add_subcommand(
      "estimate", "One-sample estimators (Wald; semiparametric when covariates exist)");
  SchemaOptions est_schema;
  std::string est_data, est_output;
  std::string working_model = "constant", effect_modifiers;
  std::string mu_y_spec = "full_interactions", mu_d_spec = "pairwise_interactions",
              pi_spec = "logistic_propensity";
  bool pi_clamp = false;
  double delta_floor = 1e-6, ci_multiplier = 1.96;
  int bootstrap_reps = 0, est_threads = 1;
  std::uint64_t est_seed = 0;
  bool est_seed_set = false, block_bootstrap = false;
  estimate->add_option("--data", est_data, "Microdata CSV")->required();
  add_schema_options(estimate, est_schema);
  estimate->add_option("--working-model", working_model, "constant|linear");
  estimate->add_option("--effect-modifiers", effect_modifiers,
                       "Covariates entering the linear working model (default: all)");
  estimate->add_option("--mu-y-spec", mu_y_spec, "Outcome-model design");
  estimate->add_option("--mu-d-spec", mu_d_spec, "Exposure-model design");
  estimate->add_option("--pi-spec", pi_spec, "Propensity design");
  estimate->add_flag("--pi-clamp", pi_clamp, "Clamp fitted propensities to [0.01, 0.99]");
  estimate->add_option("--delta-floor", delta_floor,
                       "Abort when any |delta_D(x_i)| falls at or below this");
  estimate->add_option("--ci-multiplier", ci_multiplier, "Normal critical value (default 1.96)");
  estimate->add_option("--bootstrap", bootstrap_reps, "Percentile-bootstrap replications");
  estimate
      ->add_option("--seed", [&](const CLI::results_t& res) {
        est_seed = std::stoull(res[0]);
        est_seed_set = true;
        return true;
      }, "Master seed (required with --bootstrap)")
      ->type_name("UINT");
  estimate->add_flag("--block", block_bootstrap, "Resample whole unit-id blocks");
  estimate->add_option("--threads", est_threads, "Worker threads for the bootstrap");
  estimate->add_option("--output", est_output, "Write the JSON report here (default: stdout)");

  // ---- two-sample --------------------------------------------------------
  auto* two_sample = app.add_subcommand("two-sample", "Ratio estimate from two summary CSVs");
  std::string ts_outcome, ts_exposure, ts_output;
  two_sample->add_option("--outcome", ts_outcome, "Outcome summary CSV (t,z,mean,se,n)")
      ->required();
  two_sample->add_option("--exposure", ts_exposure, "Exposure summary CSV (t,z,mean,se,n)")
      ->required();
  two_sample->add_option("--output", ts_output, "Write the JSON report here");

  // ---- weak-id -----------------------------------------------------------
  auto* weak_id = app.add_subcommand("weak-id", "Weak-identification diagnostic");
  SchemaOptions wi_schema;
  std::string wi_data, wi_exposure, wi_output;
  bool wi_no_covariates = false;
  weak_id->add_option("--data", wi_data, "Microdata CSV (first-stage F)");
  weak_id->add_option("--exposure", wi_exposure, "Exposure summary CSV (squared z-score)");
  weak_id->add_flag("--no-covariates", wi_no_covariates,
                    "Exclude covariates from the first stage");
  add_schema_options(weak_id, wi_schema);
  weak_id->add_option("--output", wi_output, "Write the JSON report here");

  // ---- sensitivity -------------------------------------------------------
  auto* sensitivity =
      app.add_subcommand("sensitivity", "Band of estimates under treatment-effect drift");
  SchemaOptions sa_schema;
  std::string sa_data, sa_outcome, sa_exposure, sa_output, sa_band_out, sa_target = "time0";
  double gamma_lower = 0.0, gamma_upper = 0.0;
  int grid_points = 101;
  sensitivity->add_option("--data", sa_data, "Microdata CSV (one-sample band)");
  sensitivity->add_option("--outcome", sa_outcome, "Outcome summary CSV (two-sample band)");
  sensitivity->add_option("--exposure", sa_exposure, "Exposure summary CSV (two-sample band)");
  sensitivity->add_option("--gamma-lower", gamma_lower, "Lower drift bound (<= 0)")->required();
  sensitivity->add_option("--gamma-upper", gamma_upper, "Upper drift bound (>= 0)")->required();
  sensitivity->add_option("--grid-points", grid_points, "Grid size (default 101)");
  sensitivity->add_option("--target", sa_target, "time0|time1 effect");
  add_schema_options(sensitivity, sa_schema);
  sensitivity->add_option("--band-out", sa_band_out, "Write the per-delta band CSV here");
  sensitivity->add_option("--output", sa_output, "Write the JSON report here");

  // ---- simulate ----------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study from a config file");
  std::string sim_config_path, sim_output;
  int sim_threads = 0;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false, sim_threads_set = false;
  simulate->add_option("--config", sim_config_path, "key = value config file")->required();
  simulate->add_option("--output", sim_output, "Results CSV (overrides config)");
  simulate
      ->add_option("--seed", [&](const CLI::results_t& res) {
        sim_seed = std::stoull(res[0]);
        sim_seed_set = true;
        return true;
      }, "Master seed (overrides config)")
      ->type_name("UINT");
  simulate
      ->add_option("--threads", [&](const CLI::results_t& res) {
        sim_threads = std::stoi(res[0]);
        sim_threads_set = true;
        return true;
      }, "Worker threads (overrides config)")
      ->type_name("INT");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("InvalidArgument", e.what()).dump(2) << "\n";
    return 1;
  }

  if (estimate->parsed()) {
    Dataset data = load_dataset(est_data, est_schema.to_schema());
    nlohmann::json report = make_report("estimate");
    report["n"] = data.n();

    CellTable cells = cell_table(data);
    WaldEstimate wald = wald_estimate(cells, ci_multiplier);
    report["wald"] = to_json(wald);

    WeakIdReport weak = weak_id_statistic(data, data.p() > 0);
    report["weak_id"] = to_json(weak);
    if (weak.weak) report["warnings"].push_back("weak identification (kappa2 < 10)");

    SemiparOptions options;
    options.delta_floor = delta_floor;
    options.clamp_pi = pi_clamp;
    options.z_crit = ci_multiplier;
    std::optional<WorkingModel> wm;
    std::optional<NuisanceFit> nuisance;
    if (data.p() > 0) {
      if (working_model == "constant") wm = WorkingModel::constant();
      else if (working_model == "linear")
        wm = WorkingModel::linear(resolve_modifiers(data, effect_modifiers));
      else
        throw ValidationError(ErrorKind::InvalidArgument,
                              "working model must be constant|linear");
      nuisance = fit_nuisance(data, DesignSpec::parse(mu_y_spec), DesignSpec::parse(mu_d_spec),
                              PropensitySpec::parse(pi_spec));
      PsiEstimate psi = semiparametric_estimate(data, *wm, *nuisance, options);
      report["semiparametric"] = to_json(psi);
      report["semiparametric"]["working_model"] = working_model;
      report["nuisance_specs"] = {{"mu_y", mu_y_spec}, {"mu_d", mu_d_spec}, {"pi", pi_spec}};
    } else {
      report["semiparametric"] = nullptr;
    }

    if (bootstrap_reps > 0) {
      if (!est_seed_set)
        throw ValidationError(ErrorKind::InvalidArgument,
                              "--bootstrap requires an explicit --seed");
      BootstrapConfig config;
      config.replications = bootstrap_reps;
      config.master_seed = est_seed;
      config.threads = est_threads;
      config.unit = block_bootstrap ? ResampleUnit::UnitBlock : ResampleUnit::Row;
      std::function<Eigen::VectorXd(const Dataset&)> target;
      std::string method;
      if (data.p() > 0) {
        method = "semiparametric";
        target = [&, options](const Dataset& resample) {
          NuisanceFit fit = fit_nuisance(resample, DesignSpec::parse(mu_y_spec),
                                         DesignSpec::parse(mu_d_spec),
                                         PropensitySpec::parse(pi_spec));
          return semiparametric_estimate(resample, *wm, fit, options).psi;
        };
      } else {
        method = "wald";
        target = [&](const Dataset& resample) {
          Eigen::VectorXd v(1);
          v(0) = wald_estimate(cell_table(resample)).beta;
          return v;
        };
      }
      BootstrapResult boot = percentile_bootstrap(data, target, config);
      nlohmann::json se = nlohmann::json::array();
      nlohmann::json ci = nlohmann::json::array();
      for (Eigen::Index j = 0; j < boot.se.size(); ++j) {
        se.push_back(boot.se(j));
        ci.push_back(to_json(boot.ci[static_cast<size_t>(j)]));
      }
      report["bootstrap"] = {{"method", method},
                             {"replications", bootstrap_reps},
                             {"seed", est_seed},
                             {"resample_unit", block_bootstrap ? "unit_id_block" : "row"},
                             {"se", se},
                             {"ci", ci},
                             {"redraws", boot.redraws}};
    }
    emit(report, est_output, out);
    return 0;
  }

  if (two_sample->parsed()) {
    CellTable outcome = load_summary(ts_outcome, SummaryRole::Outcome);
    CellTable exposure = load_summary(ts_exposure, SummaryRole::Exposure);
    nlohmann::json report = make_report("two-sample");
    WaldEstimate est = two_sample_estimate(outcome, exposure);
    report["two_sample"] = to_json(est);
    report["n"] = {{"outcome", outcome.n_total}, {"exposure", exposure.n_total}};
    WeakIdReport weak = weak_id_statistic(exposure);
    report["weak_id"] = to_json(weak);
    if (weak.weak) report["warnings"].push_back("weak identification (kappa2 < 10)");
    emit(report, ts_output, out);
    return 0;
  }

  if (weak_id->parsed()) {
    if (wi_data.empty() == wi_exposure.empty())
      throw ValidationError(ErrorKind::InvalidArgument,
                            "weak-id needs exactly one of --data or --exposure");
    nlohmann::json report = make_report("weak-id");
    WeakIdReport rep;
    if (!wi_data.empty()) {
      Dataset data = load_dataset(wi_data, wi_schema.to_schema());
      rep = weak_id_statistic(data, !wi_no_covariates && data.p() > 0);
      report["n"] = data.n();
    } else {
      CellTable exposure = load_summary(wi_exposure, SummaryRole::Exposure);
      rep = weak_id_statistic(exposure);
      report["n"] = exposure.n_total;
    }
    report["weak_id"] = to_json(rep);
    if (rep.weak) report["warnings"].push_back("weak identification (kappa2 < 10)");
    emit(report, wi_output, out);
    return 0;
  }

  if (sensitivity->parsed()) {
    SensitivityConfig config;
    config.gamma_lower = gamma_lower;
    config.gamma_upper = gamma_upper;
    config.grid_points = grid_points;
    if (sa_target == "time0") config.target = SensitivityTarget::Time0Effect;
    else if (sa_target == "time1") config.target = SensitivityTarget::Time1Effect;
    else
      throw ValidationError(ErrorKind::InvalidArgument, "target must be time0|time1");

    SensitivityBand band;
    nlohmann::json report = make_report("sensitivity");
    if (!sa_data.empty()) {
      Dataset data = load_dataset(sa_data, sa_schema.to_schema());
      band = sensitivity_one_sample(data, config);
      report["design"] = "one-sample";
      report["n"] = data.n();
    } else if (!sa_outcome.empty() && !sa_exposure.empty()) {
      CellTable outcome = load_summary(sa_outcome, SummaryRole::Outcome);
      CellTable exposure = load_summary(sa_exposure, SummaryRole::Exposure);
      band = sensitivity_two_sample(outcome, exposure, config);
      report["design"] = "two-sample";
    } else {
      throw ValidationError(ErrorKind::InvalidArgument,
                            "sensitivity needs --data, or --outcome and --exposure");
    }
    report["sensitivity"] = to_json(band);
    report["target"] = sa_target;
    if (!sa_band_out.empty()) {
      std::ofstream file(sa_band_out);
      if (!file)
        throw ValidationError(ErrorKind::InvalidArgument, "cannot write file: " + sa_band_out);
      file << sensitivity_band_csv(band);
    }
    emit(report, sa_output, out);
    return 0;
  }

  if (simulate->parsed()) {
    std::ifstream file(sim_config_path);
    if (!file)
      throw ValidationError(ErrorKind::InvalidArgument,
                            "cannot open config: " + sim_config_path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    SimulationConfig config = parse_simulation_config(buffer.str());
    if (sim_seed_set) {
      config.grid.master_seed = sim_seed;
      config.seed_set = true;
    }
    if (!config.seed_set)
      throw ValidationError(ErrorKind::InvalidArgument,
                            "simulate requires an explicit seed (config or --seed)");
    if (sim_threads_set) config.grid.threads = sim_threads;
    if (!sim_output.empty()) config.output_path = sim_output;
    if (config.grid.threads < 1)
      config.grid.threads = static_cast<int>(std::thread::hardware_concurrency());

    std::vector<MonteCarloRow> rows = run_monte_carlo(config.grid, config.dgp);
    std::string csv = monte_carlo_csv(rows);
    if (config.output_path.empty()) {
      out << csv;
    } else {
      std::ofstream results(config.output_path);
      if (!results)
        throw ValidationError(ErrorKind::InvalidArgument,
                              "cannot write file: " + config.output_path);
      results << csv;
    }
    return 0;
  }

  err << error_json("InvalidArgument", "no subcommand given").dump(2) << "\n";
  return 1;
}

}  // namespace
}  // namespace idid
