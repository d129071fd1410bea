#include "poclm/config.hpp"

#include <fstream>

#include <json.hpp>

#include "poclm/errors.hpp"

namespace poclm {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return j;
}

ConstraintRegime parse_regime(const std::string& s) {
  if (s == "either" || s == "monotone") return ConstraintRegime::EitherMonotone;
  if (s == "isotonic" || s == "iso") return ConstraintRegime::Isotonic;
  if (s == "antitonic" || s == "anti") return ConstraintRegime::Antitonic;
  if (s == "none" || s == "unconstrained") return ConstraintRegime::Unconstrained;
  throw ConfigError("unknown constraint regime: " + s);
}

std::vector<std::string> parse_levels(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty()) throw ConfigError(ctx + ": levels must be a non-empty array");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (v.is_string())
      out.push_back(v.get<std::string>());
    else
      out.push_back(v.dump());
  }
  return out;
}

PredictorSpec parse_predictor(const json& j) {
  if (!j.contains("column")) throw ConfigError("predictor entry without a 'column' name");
  std::string name = j.at("column").get<std::string>();
  std::string role = j.value("role", "numeric");
  if (role == "numeric") {
    if (j.contains("constraint") && parse_regime(j.at("constraint").get<std::string>()) !=
                                        ConstraintRegime::Unconstrained)
      throw ConfigError("numeric predictor " + name + " cannot carry a monotonicity constraint");
    return PredictorSpec::numeric(name);
  }
  if (role == "ordinal") {
    if (j.contains("levels")) {
      auto levels = parse_levels(j.at("levels"), name);
      ConstraintRegime regime =
          j.contains("constraint") ? parse_regime(j.at("constraint").get<std::string>())
                                   : ConstraintRegime::EitherMonotone;
      return PredictorSpec::ordinal(name, levels, regime);
    }
    if (j.contains("categories")) {
      ConstraintRegime regime =
          j.contains("constraint") ? parse_regime(j.at("constraint").get<std::string>())
                                   : ConstraintRegime::EitherMonotone;
      return PredictorSpec::ordinal(name, j.at("categories").get<int>(), regime);
    }
    throw ConfigError("ordinal predictor " + name + " needs 'levels' or 'categories'");
  }
  if (role == "nominal") {
    if (j.contains("levels")) return PredictorSpec::nominal(name, parse_levels(j.at("levels"), name));
    if (j.contains("categories")) return PredictorSpec::nominal(name, j.at("categories").get<int>());
    throw ConfigError("nominal predictor " + name + " needs 'levels' or 'categories'");
  }
  throw ConfigError("unknown predictor role: " + role);
}

ModelSpec parse_model(const json& j) {
  ModelSpec spec;
  if (j.contains("response")) {
    const auto& r = j.at("response");
    spec.response_name = r.value("column", std::string("response"));
    if (r.contains("levels")) {
      spec.response_levels = parse_levels(r.at("levels"), "response");
      spec.k = static_cast<int>(spec.response_levels.size());
    } else if (r.contains("categories") || j.contains("k")) {
      spec.k = r.contains("categories") ? r.at("categories").get<int>() : j.at("k").get<int>();
      spec.response_levels = ModelSpec::numbered_levels(spec.k);
    } else {
      throw ConfigError("response needs 'levels' or 'categories'");
    }
  } else if (j.contains("k")) {
    spec.k = j.at("k").get<int>();
    spec.response_levels = ModelSpec::numbered_levels(spec.k);
  } else {
    throw ConfigError("config needs a 'response' section or 'k'");
  }
  if (!j.contains("predictors") || !j.at("predictors").is_array())
    throw ConfigError("config needs a 'predictors' array");
  for (const auto& p : j.at("predictors")) spec.predictors.push_back(parse_predictor(p));
  spec.validate();
  return spec;
}

void parse_fit_options(const json& j, FitOptions& fit) {
  fit.max_iterations = j.value("max_iterations", fit.max_iterations);
  fit.gradient_tolerance = j.value("gradient_tolerance", fit.gradient_tolerance);
  fit.relative_ll_tolerance = j.value("relative_ll_tolerance", fit.relative_ll_tolerance);
  fit.parameter_cap = j.value("parameter_cap", fit.parameter_cap);
  fit.alpha_gap_floor = j.value("alpha_gap_floor", fit.alpha_gap_floor);
  fit.max_direction_enumeration = j.value("max_direction_enumeration", fit.max_direction_enumeration);
  fit.threads = j.value("threads", fit.threads);
  fit.validate();
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  json j = load_json(path);
  RunConfig cfg;
  cfg.spec = parse_model(j);
  cfg.data_path = j.value("data", std::string());
  if (j.contains("fit")) parse_fit_options(j.at("fit"), cfg.fit);
  if (j.contains("inference")) {
    const auto& inf = j.at("inference");
    cfg.level = inf.value("level", cfg.level);
    cfg.df = inf.value("df", cfg.df);
    if (inf.contains("kind")) cfg.kind = region_kind_from_string(inf.at("kind").get<std::string>());
    cfg.family = inf.value("mixture", false) ? QuantileFamily::Mixture : QuantileFamily::PlainChiSq;
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out", cfg.out_dir);
  if (j.contains("fit")) cfg.initial_csv = j.at("fit").value("initial_estimates", std::string());
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ConfigError("level must lie in (0,1)");
  if (cfg.df < 0) throw ConfigError("df must be nonnegative");
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  json j = load_json(path);
  ExperimentConfig cfg;
  if (!j.contains("model")) throw ConfigError("experiment config needs a 'model' section");
  cfg.truth.model = parse_model(j.at("model"));
  ParameterLayout layout = ParameterLayout::from_spec(cfg.truth.model);

  if (!j.contains("truth")) throw ConfigError("experiment config needs a 'truth' section");
  const auto& t = j.at("truth");
  if (!t.contains("alpha")) throw ConfigError("truth needs 'alpha'");
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
  {
    auto alpha = t.at("alpha").get<std::vector<double>>();
    if (static_cast<int>(alpha.size()) != layout.n_alpha())
      throw ConfigError("truth alpha has wrong length");
    for (int i = 0; i < layout.n_alpha(); ++i) gamma[i] = alpha[static_cast<size_t>(i)];
  }
  if (t.contains("beta")) {
    const auto& betas = t.at("beta");
    for (auto it = betas.begin(); it != betas.end(); ++it) {
      int predictor = -1;
      for (size_t pi = 0; pi < cfg.truth.model.predictors.size(); ++pi)
        if (cfg.truth.model.predictors[pi].name == it.key()) predictor = static_cast<int>(pi);
      if (predictor < 0) throw ConfigError("truth beta for unknown predictor " + it.key());
      const auto& block = layout.block_for_predictor(predictor);
      std::vector<double> values;
      if (it.value().is_number())
        values.push_back(it.value().get<double>());
      else
        values = it.value().get<std::vector<double>>();
      if (static_cast<int>(values.size()) != block.size)
        throw ConfigError("truth beta for " + it.key() + " has wrong length");
      for (int c = 0; c < block.size; ++c)
        gamma[layout.gamma_index(block.beta_start + c)] = values[static_cast<size_t>(c)];
    }
  }
  cfg.truth.truth = ParameterVector::from_flat(layout, gamma);

  cfg.truth.covariates = TruthSpec::default_covariates(cfg.truth.model);
  if (j.contains("covariates")) {
    const auto& cov = j.at("covariates");
    for (auto it = cov.begin(); it != cov.end(); ++it) {
      int predictor = -1;
      for (size_t pi = 0; pi < cfg.truth.model.predictors.size(); ++pi)
        if (cfg.truth.model.predictors[pi].name == it.key()) predictor = static_cast<int>(pi);
      if (predictor < 0) throw ConfigError("covariate law for unknown predictor " + it.key());
      const auto& pred = cfg.truth.model.predictors[static_cast<size_t>(predictor)];
      if (pred.role == Role::Numeric) {
        NormalDist nd;
        nd.mean = it.value().value("mean", 0.0);
        nd.variance = it.value().value("variance", 1.0);
        cfg.truth.covariates[static_cast<size_t>(predictor)] = nd;
      } else {
        auto probs = it.value().at("probs").get<std::vector<double>>();
        CategoricalDist cd;
        cd.probs = Eigen::Map<Eigen::VectorXd>(probs.data(), static_cast<long>(probs.size()));
        cfg.truth.covariates[static_cast<size_t>(predictor)] = cd;
      }
    }
  }

  if (!j.contains("experiment")) throw ConfigError("experiment config needs an 'experiment' section");
  const auto& e = j.at("experiment");
  std::string mode = e.value("mode", std::string("coverage"));
  if (mode == "coverage")
    cfg.mode = ExperimentMode::Coverage;
  else if (mode == "rejection")
    cfg.mode = ExperimentMode::Rejection;
  else if (mode == "both")
    cfg.mode = ExperimentMode::Both;
  else
    throw ConfigError("unknown experiment mode: " + mode);
  cfg.sample_sizes = e.at("sample_sizes").get<std::vector<int>>();
  cfg.replicates = e.value("replicates", cfg.replicates);
  cfg.level = e.value("level", cfg.level);
  if (e.contains("kinds")) {
    cfg.kinds.clear();
    for (const auto& k : e.at("kinds")) cfg.kinds.push_back(region_kind_from_string(k.get<std::string>()));
  }
  cfg.family = e.value("mixture", false) ? QuantileFamily::Mixture : QuantileFamily::PlainChiSq;
  cfg.master_seed = e.value("seed", static_cast<std::uint64_t>(1));
  cfg.threads = e.value("threads", 0);
  if (j.contains("fit")) parse_fit_options(j.at("fit"), cfg.fit);
  cfg.validate();
  return cfg;
}

}  // namespace poclm
