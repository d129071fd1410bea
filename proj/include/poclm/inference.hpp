#pragma once

#include <iosfwd>
#include <string>

#include "poclm/estimation.hpp"
#include "poclm/special.hpp"

namespace poclm {

// H0: C gamma = xi with C full row rank r.
struct LinearHypothesis {
  Eigen::MatrixXd C;
  Eigen::VectorXd xi;
};

// R_n = 2[l(full) - l(null)].  Values in [-1e-8, 0) clip to 0; anything
// lower signals that the null fit failed to nest and throws FitError.
double lr_statistic(double loglik_full, double loglik_null);
double lr_statistic(const FitResult& full, const FitResult& null_fit);

// W_n = (C g - xi)' [C F^-1 C']^-1 (C g - xi) at the fitted gamma.
double wald_statistic(const LinearHypothesis& hyp, const FitResult& fit);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// gamma_j +/- z_{1-nu/2} * SE_j with the SE from the inverse Fisher
// information.
Interval wald_ci(const FitResult& fit, int gamma_index, double level);

// ---- confidence regions ---------------------------------------------------

enum class RegionKind { UCR, UCCR, CCR, ACR };
enum class QuantileFamily { PlainChiSq, Mixture };

const char* to_string(RegionKind k);
RegionKind region_kind_from_string(const std::string& s);

double region_quantile(QuantileFamily family, int df, double level);

// Everything fitted once and shared by the inference operations.
struct ModelFits {
  DesignData data;
  ModelSpec spec;
  FitOptions opts;
  FitResult umle;
  FitResult cmle;

  static ModelFits fit(DesignData data, ModelSpec spec, FitOptions opts);
  const ParameterLayout& layout() const { return data.layout; }
  Eigen::VectorXd umle_block(int predictor) const;
  Eigen::VectorXd cmle_block(int predictor) const;
};

struct Membership {
  bool ucr = false, uccr = false, ccr = false, acr = false;
  bool indeterminate = false;
  BlockClass cls = BlockClass::Neither;
  double lr_unconstrained = std::numeric_limits<double>::quiet_NaN();
  double lr_constrained = std::numeric_limits<double>::quiet_NaN();

  bool flag(RegionKind k) const;
};

// Membership of one candidate in all four region kinds at the given
// level/df.  Profiles nuisance parameters unconstrained for the UCR and
// constrained (centered at the CMLE) for the CCR; the CCR is defined false
// for candidates outside the constrained set; ACR = UCCR or CCR.
// next_warm_* receive the profiled optima when available (grid chaining).
Membership cr_membership(const ModelFits& fits, const ProfileTarget& candidate, double level, int df,
                         QuantileFamily family = QuantileFamily::PlainChiSq,
                         const Eigen::VectorXd* warm_u = nullptr, const Eigen::VectorXd* warm_c = nullptr,
                         Eigen::VectorXd* next_warm_u = nullptr, Eigen::VectorXd* next_warm_c = nullptr);

enum class ContrastStyle { Coords, Pair, Diffs };

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;  // 0: default 61 points over estimate +/- 4 SE
};

struct RegionSpec {
  int predictor = -1;
  ContrastStyle style = ContrastStyle::Coords;  // Coords requires block size <= 2
  double level = 0.95;
  int df = 0;  // 0: free parameter count of the target block
  QuantileFamily family = QuantileFamily::PlainChiSq;
  GridAxis axis1, axis2;
  int max_grid_points = 1000000;
};

struct RegionPoint {
  double axis1 = 0.0;
  double axis2 = 0.0;
  Membership m;
};

struct RegionGrid {
  RegionSpec spec;  // with axes and df resolved
  int n1 = 0, n2 = 0;
  std::vector<RegionPoint> points;  // row-major: axis1 outer, axis2 inner
  std::string axis1_name, axis2_name;

  int count(RegionKind k) const;
  int count_indeterminate() const;
};

RegionGrid cr_grid(const ModelFits& fits, const RegionSpec& spec);

// CSV schema:
// axis1,axis2,lr_unconstrained,lr_constrained,ucr,uccr,ccr,acr,direction_class,indeterminate
void write_region_csv(std::ostream& out, const RegionGrid& grid);

// ---- hypothesis tests ------------------------------------------------------

struct TestDecision {
  bool reject = false;
  double statistic = 0.0;
  double threshold = 0.0;
  int df = 0;
  RegionKind kind = RegionKind::UCR;
  std::string hypothesis;
  // Only the no-effect linear hypothesis admits a p-value; the monotonicity
  // and direction decisions are region checks without one.
  bool has_p_value = false;
  double p_value = std::numeric_limits<double>::quiet_NaN();
};

// H0: beta_s = 0, LR test with r = block size; basis selects whether the
// full fit (and the nuisance profile) is unconstrained or constrained.
TestDecision test_no_effect(const ModelFits& fits, int predictor, double level, EstimatorKind basis,
                            QuantileFamily family = QuantileFamily::PlainChiSq);

// H0: predictor s is monotone (either direction): reject iff the CMLE
// block lies outside the UCR.
TestDecision test_monotonicity(const ModelFits& fits, int predictor, double level,
                               QuantileFamily family = QuantileFamily::PlainChiSq);

// Reverse H0: predictor s is NOT monotone: reject iff no point of the
// non-monotone closure lies in the UCR (checked through the cone-face
// maximizers).
TestDecision test_non_monotonicity(const ModelFits& fits, int predictor, double level,
                                   QuantileFamily family = QuantileFamily::PlainChiSq);

// H0: predictor s has the given direction: fit the PMLE with s pinned and
// reject iff its block falls outside the chosen region kind.
TestDecision test_direction(const ModelFits& fits, int predictor, Direction dir, double level,
                            RegionKind kind, QuantileFamily family = QuantileFamily::PlainChiSq);

// ---- case taxonomy ---------------------------------------------------------

struct CaseClassification {
  int label = 0;  // 1..6
  bool low_confidence = false;
  std::string description;
};

// Diagnoses which of the six finite-sample configurations holds for the
// predictor, from UMLE/CMLE equality and the composition of the UCR members
// on the grid.
CaseClassification classify_case(const ModelFits& fits, const RegionGrid& grid, int predictor);

}  // namespace poclm
