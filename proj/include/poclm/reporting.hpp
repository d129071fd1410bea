#pragma once

#include <iosfwd>

#include "poclm/inference.hpp"
#include "poclm/simulation.hpp"

namespace poclm {

// Side-by-side estimate table (UMLE | CMLE) with log-likelihoods,
// convergence diagnostics, chosen directions, active constraints and
// per-coordinate Wald intervals.  Five decimals.
void write_fit_report(std::ostream& out, const ModelFits& fits, double level = 0.95);

// coordinate,predictor,level,umle,cmle,se,wald_lo,wald_hi
void write_estimates_csv(std::ostream& out, const ModelFits& fits, double level);

void write_coverage_text(std::ostream& out, const CoverageReport& report);
void write_coverage_csv(std::ostream& out, const CoverageReport& report);
void write_rejection_text(std::ostream& out, const RejectionReport& report, const ModelSpec& spec);
void write_rejection_csv(std::ostream& out, const RejectionReport& report, const ModelSpec& spec);

}  // namespace poclm
