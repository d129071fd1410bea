#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "poclm/config.hpp"
#include "poclm/design.hpp"
#include "poclm/errors.hpp"
#include "poclm/kernels.hpp"
#include "poclm/reporting.hpp"

namespace fs = std::filesystem;
using namespace poclm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitFit = 4;
constexpr int kExitExperiment = 5;

struct CommonFlags {
  std::string config_path;
  std::string data_path;
  std::string initial_csv;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double level = 0.0;
  int df = -1;
  std::string kind;
  bool mixture = false;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool need_config = true) {
  auto* c = cmd->add_option("--config", flags.config_path, "JSON configuration file");
  if (need_config) c->required();
  cmd->add_option("--data", flags.data_path, "CSV data file (overrides the config)");
  cmd->add_option("--out", flags.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seed", flags.seed, "random seed (overrides the config)")
      ->each([&](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--level", flags.level, "confidence level, default 0.95");
  cmd->add_option("--df", flags.df, "degrees of freedom for region quantiles");
  cmd->add_option("--kind", flags.kind, "region kind: ucr|uccr|ccr|acr");
  cmd->add_flag("--mixture", flags.mixture, "use 0.5*chi2_r + 0.5*chi2_{r-1} mixture quantiles");
  cmd->add_option("--threads", flags.threads, "worker threads for enumeration/grids/replicates");
  cmd->add_option("--initial", flags.initial_csv, "estimates.csv from a previous fit as starting values");
}

RunConfig merged_run_config(const CommonFlags& flags) {
  RunConfig cfg = parse_run_config(flags.config_path);
  if (!flags.data_path.empty()) cfg.data_path = flags.data_path;
  if (!flags.initial_csv.empty()) cfg.initial_csv = flags.initial_csv;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.level > 0.0) cfg.level = flags.level;
  if (flags.df >= 0) cfg.df = flags.df;
  if (!flags.kind.empty()) cfg.kind = region_kind_from_string(flags.kind);
  if (flags.mixture) cfg.family = QuantileFamily::Mixture;
  if (flags.threads >= 0) cfg.fit.threads = flags.threads;
  if (cfg.data_path.empty()) throw ConfigError("no data file given (config 'data' or --data)");
  return cfg;
}

int predictor_index(const ModelSpec& spec, const std::string& name) {
  for (size_t i = 0; i < spec.predictors.size(); ++i)
    if (spec.predictors[i].name == name) return static_cast<int>(i);
  throw ConfigError("predictor '" + name + "' is not declared in the config");
}

ModelFits load_and_fit(const RunConfig& cfg) {
  RawTable table = read_csv_file(cfg.data_path);
  DesignData data = encode_design(table, cfg.spec);
  FitOptions opts = cfg.fit;
  if (!cfg.initial_csv.empty()) {
    RawTable est = read_csv_file(cfg.initial_csv);
    int ci = est.column_index("umle");
    if (ci < 0) throw ConfigError("initial estimates file has no 'umle' column");
    const auto& col = est.text_column(ci);
    if (static_cast<int>(col.size()) != data.layout.p)
      throw ConfigError("initial estimates have the wrong number of coordinates");
    Eigen::VectorXd gamma(data.layout.p);
    for (int i = 0; i < data.layout.p; ++i) gamma[i] = std::stod(col[static_cast<size_t>(i)]);
    opts.initial = ParameterVector::from_flat(data.layout, gamma);
  }
  return ModelFits::fit(std::move(data), cfg.spec, opts);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir);
}

int run_fit(const CommonFlags& flags) {
  RunConfig cfg = merged_run_config(flags);
  ensure_out_dir(cfg.out_dir);
  ModelFits fits = load_and_fit(cfg);

  {
    std::ofstream rep(fs::path(cfg.out_dir) / "fit_report.txt");
    write_fit_report(rep, fits, cfg.level);
  }
  {
    std::ofstream csv(fs::path(cfg.out_dir) / "estimates.csv");
    write_estimates_csv(csv, fits, cfg.level);
  }
  write_fit_report(std::cout, fits, cfg.level);
  std::cout << "\nkernel: " << kernels::active_kernel_name() << "\n";
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "fit_report.txt").string() << " and "
            << (fs::path(cfg.out_dir) / "estimates.csv").string() << "\n";
  if (!fits.umle.converged || !fits.cmle.converged || fits.umle.quasi_separated ||
      fits.cmle.quasi_separated) {
    std::cerr << "fit did not converge cleanly; see the report flags\n";
    return kExitFit;
  }
  return 0;
}

int run_region(const CommonFlags& flags, const std::string& variable, const std::string& contrast,
               int points) {
  RunConfig cfg = merged_run_config(flags);
  ensure_out_dir(cfg.out_dir);
  ModelFits fits = load_and_fit(cfg);

  RegionSpec rspec;
  rspec.predictor = predictor_index(cfg.spec, variable);
  rspec.level = cfg.level;
  rspec.df = cfg.df;
  rspec.family = cfg.family;
  const auto& block = fits.layout().block_for_predictor(rspec.predictor);
  if (contrast == "auto")
    rspec.style = block.size <= 2 ? ContrastStyle::Coords
                                  : (block.size == 3 ? ContrastStyle::Diffs : ContrastStyle::Pair);
  else if (contrast == "coords")
    rspec.style = ContrastStyle::Coords;
  else if (contrast == "pair")
    rspec.style = ContrastStyle::Pair;
  else if (contrast == "diffs")
    rspec.style = ContrastStyle::Diffs;
  else
    throw ConfigError("unknown contrast style: " + contrast);
  if (points > 0) {
    rspec.axis1.points = points;
    rspec.axis2.points = points;
  }

  RegionGrid grid = cr_grid(fits, rspec);
  fs::path out_path = fs::path(cfg.out_dir) / ("region_" + variable + ".csv");
  {
    std::ofstream csv(out_path);
    write_region_csv(csv, grid);
  }
  std::cout << "region grid for " << variable << " (" << grid.n1 << " x " << grid.n2 << ", level "
            << grid.spec.level << ", df " << grid.spec.df << ")\n";
  std::cout << "  axis1: " << grid.axis1_name << "  axis2: " << grid.axis2_name << "\n";
  for (RegionKind k : {RegionKind::UCR, RegionKind::UCCR, RegionKind::CCR, RegionKind::ACR})
    std::cout << "  " << to_string(k) << " members: " << grid.count(k) << "\n";
  std::cout << "  indeterminate: " << grid.count_indeterminate() << "\n";
  auto cls = classify_case(fits, grid, rspec.predictor);
  std::cout << "  case " << cls.label << ": " << cls.description
            << (cls.low_confidence ? " (low confidence)" : "") << "\n";
  std::cout << "wrote " << out_path.string() << "\n";
  return 0;
}

int run_test(const CommonFlags& flags, const std::string& variable, const std::string& hypothesis,
             const std::string& direction, const std::string& basis) {
  RunConfig cfg = merged_run_config(flags);
  ModelFits fits = load_and_fit(cfg);
  int predictor = predictor_index(cfg.spec, variable);

  TestDecision d;
  bool p_value_defined = false;
  if (hypothesis == "no-effect") {
    EstimatorKind bk = basis == "cmle" ? EstimatorKind::CMLE : EstimatorKind::UMLE;
    d = test_no_effect(fits, predictor, cfg.level, bk, cfg.family);
    p_value_defined = d.has_p_value;
  } else if (hypothesis == "monotonicity") {
    d = test_monotonicity(fits, predictor, cfg.level, cfg.family);
  } else if (hypothesis == "non-monotonicity") {
    d = test_non_monotonicity(fits, predictor, cfg.level, cfg.family);
  } else if (hypothesis == "direction") {
    Direction dir;
    if (direction == "iso" || direction == "isotonic")
      dir = Direction::Iso;
    else if (direction == "anti" || direction == "antitonic")
      dir = Direction::Anti;
    else
      throw ConfigError("direction tests need --direction iso|anti");
    d = test_direction(fits, predictor, dir, cfg.level, cfg.kind, cfg.family);
  } else {
    throw ConfigError("unknown hypothesis: " + hypothesis +
                      " (expected no-effect|monotonicity|non-monotonicity|direction)");
  }

  std::cout << "H0: " << d.hypothesis << "\n";
  std::cout << "decision: " << (d.reject ? "REJECT" : "FAIL TO REJECT") << " at level " << cfg.level
            << "\n";
  std::cout << "statistic: " << d.statistic << "  threshold: " << d.threshold << "  df: " << d.df
            << "  region: " << to_string(d.kind) << "\n";
  if (p_value_defined)
    std::cout << "p-value: " << d.p_value << "\n";
  else
    std::cout << "decision-only (no valid p-value is defined for this hypothesis)\n";
  return 0;
}

int run_simulate(const CommonFlags& flags) {
  ExperimentConfig cfg = parse_experiment_config(flags.config_path);
  if (flags.seed_set) cfg.master_seed = flags.seed;
  if (flags.level > 0.0) cfg.level = flags.level;
  if (flags.mixture) cfg.family = QuantileFamily::Mixture;
  if (flags.threads >= 0) cfg.threads = flags.threads;
  std::string out_dir = flags.out_dir.empty() ? "." : flags.out_dir;
  ensure_out_dir(out_dir);

  try {
    if (cfg.mode == ExperimentMode::Coverage || cfg.mode == ExperimentMode::Both) {
      CoverageReport report = coverage_experiment(cfg);
      std::ofstream csv(fs::path(out_dir) / "coverage.csv");
      write_coverage_csv(csv, report);
      std::ofstream txt(fs::path(out_dir) / "coverage.txt");
      write_coverage_text(txt, report);
      write_coverage_text(std::cout, report);
      std::cout << "wrote " << (fs::path(out_dir) / "coverage.csv").string() << "\n";
    }
    if (cfg.mode == ExperimentMode::Rejection || cfg.mode == ExperimentMode::Both) {
      RejectionReport report = rejection_experiment(cfg);
      std::ofstream csv(fs::path(out_dir) / "rejection.csv");
      write_rejection_csv(csv, report, cfg.truth.model);
      std::ofstream txt(fs::path(out_dir) / "rejection.txt");
      write_rejection_text(txt, report, cfg.truth.model);
      write_rejection_text(std::cout, report, cfg.truth.model);
      std::cout << "wrote " << (fs::path(out_dir) / "rejection.csv").string() << "\n";
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::runtime_error& e) {
    std::cerr << "experiment failed: " << e.what() << "\n";
    return kExitExperiment;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maximum likelihood estimation and inference for the proportional odds cumulative "
               "logit model with monotonicity constraints on ordinal predictors"};
  app.require_subcommand(1);

  CommonFlags fit_flags, region_flags, test_flags, sim_flags;

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit the constrained and unconstrained models");
  add_common(fit_cmd, fit_flags);

  CLI::App* region_cmd = app.add_subcommand("region", "evaluate confidence-region grids");
  add_common(region_cmd, region_flags);
  std::string region_variable, region_contrast = "auto";
  int region_points = 0;
  region_cmd->add_option("--variable", region_variable, "ordinal predictor to map")->required();
  region_cmd->add_option("--contrast", region_contrast, "view: auto|coords|pair|diffs");
  region_cmd->add_option("--points", region_points, "grid points per axis (default 61)");

  CLI::App* test_cmd = app.add_subcommand("test", "hypothesis tests for one predictor");
  add_common(test_cmd, test_flags);
  std::string test_variable, test_hypothesis, test_direction, test_basis = "umle";
  test_cmd->add_option("--variable", test_variable, "predictor to test")->required();
  test_cmd
      ->add_option("--hypothesis", test_hypothesis,
                   "no-effect|monotonicity|non-monotonicity|direction")
      ->required();
  test_cmd->add_option("--direction", test_direction, "iso|anti (direction hypothesis)");
  test_cmd->add_option("--basis", test_basis, "full fit for no-effect: umle|cmle");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "coverage / rejection experiments");
  add_common(sim_cmd, sim_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) return run_fit(fit_flags);
    if (region_cmd->parsed()) return run_region(region_flags, region_variable, region_contrast, region_points);
    if (test_cmd->parsed()) return run_test(test_flags, test_variable, test_hypothesis, test_direction, test_basis);
    if (sim_cmd->parsed()) return run_simulate(sim_flags);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kExitFit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
