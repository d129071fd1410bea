#pragma once

#include <Eigen/Dense>

#include "poclm/design.hpp"
#include "poclm/likelihood.hpp"
#include "poclm/rng.hpp"
#include "poclm/simulation.hpp"
#include "poclm/types.hpp"

namespace poclm::test {

// Random model instance for property tests: k categories, t ordinal
// predictors with 3..4 categories, optionally a numeric covariate.
inline ModelSpec small_spec(int k, int t, bool with_numeric = true) {
  std::vector<PredictorSpec> preds;
  for (int s = 0; s < t; ++s)
    preds.push_back(PredictorSpec::ordinal("op" + std::to_string(s + 1), 3 + (s % 2)));
  if (with_numeric) preds.push_back(PredictorSpec::numeric("x1"));
  return ModelSpec::make(k, std::move(preds));
}

// Random interior parameter vector: ordered alpha, modest beta values.
inline ParameterVector random_params(const ParameterLayout& layout, Rng& rng) {
  Eigen::VectorXd gamma(layout.p);
  double a = -2.0 + rng.uniform();
  for (int j = 0; j < layout.n_alpha(); ++j) {
    gamma[j] = a;
    a += 0.5 + 2.0 * rng.uniform();
  }
  for (int j = layout.n_alpha(); j < layout.p; ++j) gamma[j] = -1.0 + 2.0 * rng.uniform();
  return ParameterVector::from_flat(layout, gamma);
}

// Random dataset drawn from random truth; guarantees every response
// category appears by resampling the seed.
inline DesignData random_data(const ModelSpec& spec, int n, std::uint64_t seed) {
  TruthSpec truth;
  truth.model = spec;
  truth.covariates = TruthSpec::default_covariates(spec);
  ParameterLayout layout = ParameterLayout::from_spec(spec);
  for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
    Rng rng(derive_stream_seed(seed, 1000 + attempt));
    truth.truth = random_params(layout, rng);
    RawTable table = generate_dataset(truth, n, derive_stream_seed(seed, attempt));
    DesignData data = encode_design(table, spec);
    auto counts = data.category_counts();
    bool ok = true;
    for (int c : counts) ok = ok && c > 0;
    if (ok) return data;
  }
  throw std::runtime_error("could not draw a dataset with all categories present");
}

}  // namespace poclm::test
