// Generates tests/data/school_synthetic.csv: a synthetic dataset with the
// structure of the Chilean school-performance analysis (n = 5333, four
// ordered response categories, an ordinal prior-performance predictor, an
// ordinal funding predictor whose unconstrained estimate is just barely
// non-monotone, and one numeric covariate).
//
// Build & run from the repository root:
//   g++ -std=c++20 -O2 -Iinclude -I/usr/include/eigen3 -Ivendor \
//       scripts/make_school_fixture.cpp build/src/libpoclm.a -pthread \
//       -o build/make_school_fixture && build/make_school_fixture
//
// The committed CSV was produced with the seed printed below; the search
// loop picks the first seed whose unconstrained fit lands in the shape the
// inference walkthrough needs (slightly positive Mixed coefficient, the
// monotonicity constraint active at the constrained fit).

#include <cstdio>
#include <fstream>

#include "poclm/design.hpp"
#include "poclm/estimation.hpp"
#include "poclm/simulation.hpp"

using namespace poclm;

int main() {
  ModelSpec spec;
  spec.k = 4;
  spec.response_name = "perf2019";
  spec.response_levels = {"Insufficient", "Medium-Low", "Medium", "High"};
  spec.predictors = {
      PredictorSpec::ordinal("perf2016", {"Insufficient", "Medium-Low", "Medium", "High"}),
      PredictorSpec::ordinal("funding", {"Public", "Mixed", "Private"}),
      PredictorSpec::numeric("regisRat"),
  };
  spec.validate();
  ParameterLayout layout = ParameterLayout::from_spec(spec);

  Eigen::VectorXd gamma(layout.p);
  gamma << -0.62759, 1.83259, 5.87701,            // intercepts
      -1.23255, -3.20697, -5.81422,               // perf2016: Medium-Low, Medium, High
      0.00609, -0.73117,                          // funding: Mixed, Private
      -0.34234;                                   // regisRat

  TruthSpec truth;
  truth.model = spec;
  truth.truth = ParameterVector::from_flat(layout, gamma);
  truth.covariates = TruthSpec::default_covariates(spec);
  Eigen::VectorXd perf_dist(4), fund_dist(3);
  perf_dist << 0.15, 0.35, 0.35, 0.15;
  fund_dist << 0.47, 0.43, 0.10;
  truth.covariates[0] = CategoricalDist{perf_dist};
  truth.covariates[1] = CategoricalDist{fund_dist};
  truth.covariates[2] = NormalDist{1.0, 0.04};

  const int n = 5333;
  for (std::uint64_t seed = 1; seed < 400; ++seed) {
    RawTable table = generate_dataset(truth, n, seed);
    DesignData data = encode_design(table, spec);
    auto counts = data.category_counts();
    bool complete = true;
    for (int c : counts) complete = complete && c >= 30;
    if (!complete) continue;

    FitResult umle = fit_unconstrained(data, spec, {});
    if (!umle.converged) continue;
    double mixed = umle.estimate.ord[1][0];
    double priv = umle.estimate.ord[1][1];
    bool perf_anti = classify_block(umle.estimate.ord[0]) == BlockClass::Anti;
    if (!(perf_anti && mixed > 0.002 && mixed < 0.05 && priv < -0.5)) continue;

    FitOptions warm;
    warm.initial = umle.estimate;
    FitResult cmle = fit_constrained(data, spec, warm);
    if (!cmle.converged) continue;
    if (std::fabs(cmle.estimate.ord[1][0]) > 1e-9) continue;  // Mixed pinned to 0

    std::printf("seed %llu: Mixed=%.5f Private=%.5f cmle Mixed=%.6f ll_u=%.5f ll_c=%.5f\n",
                static_cast<unsigned long long>(seed), mixed, priv, cmle.estimate.ord[1][0],
                umle.log_likelihood, cmle.log_likelihood);
    write_csv_file("tests/data/school_synthetic.csv", table);
    std::printf("wrote tests/data/school_synthetic.csv (n=%d)\n", n);
    return 0;
  }
  std::fprintf(stderr, "no suitable seed found\n");
  return 1;
}
