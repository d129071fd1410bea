#include "poclm/reporting.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace poclm {

namespace {

struct CoordinateName {
  std::string group;
  std::string label;
};

std::vector<CoordinateName> coordinate_names(const ModelSpec& spec, const ParameterLayout& layout) {
  std::vector<CoordinateName> names(static_cast<size_t>(layout.p));
  for (int j = 0; j < layout.n_alpha(); ++j) names[static_cast<size_t>(j)] = {"Intercepts", std::to_string(j + 1)};
  for (const auto& block : layout.blocks) {
    const auto& pred = spec.predictors[static_cast<size_t>(block.predictor)];
    for (int c = 0; c < block.size; ++c) {
      std::string label = pred.role == Role::Numeric ? "" : pred.levels[static_cast<size_t>(c + 1)];
      names[static_cast<size_t>(layout.gamma_index(block.beta_start + c))] = {pred.name, label};
    }
  }
  return names;
}

std::string fmt5(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5f", v);
  return buf;
}

// machine interchange: full precision so a restart lands on the optimum
std::string fmt_full(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt1(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

void write_fit_report(std::ostream& out, const ModelFits& fits, double level) {
  const auto& layout = fits.layout();
  auto names = coordinate_names(fits.spec, layout);
  Eigen::VectorXd u = fits.umle.gamma();
  Eigen::VectorXd c = fits.cmle.gamma();

  out << "Estimates\n";
  out << "  " << std::left << std::setw(14) << "group" << std::setw(14) << "level" << std::right
      << std::setw(12) << "UMLE" << std::setw(12) << "CMLE" << "\n";
  std::string last_group;
  for (int j = 0; j < layout.p; ++j) {
    std::string group = names[static_cast<size_t>(j)].group == last_group ? "" : names[static_cast<size_t>(j)].group;
    last_group = names[static_cast<size_t>(j)].group;
    out << "  " << std::left << std::setw(14) << group << std::setw(14) << names[static_cast<size_t>(j)].label
        << std::right << std::setw(12) << fmt5(u[j]) << std::setw(12) << fmt5(c[j]) << "\n";
  }
  out << "\n";
  out << "log-likelihood  UMLE " << fmt5(fits.umle.log_likelihood) << "   CMLE "
      << fmt5(fits.cmle.log_likelihood) << "\n";
  out << "converged       UMLE " << (fits.umle.converged ? "yes" : "NO") << " ("
      << fits.umle.iterations << " iterations)   CMLE " << (fits.cmle.converged ? "yes" : "NO") << " ("
      << fits.cmle.iterations << " iterations)\n";
  if (fits.umle.quasi_separated || fits.cmle.quasi_separated)
    out << "WARNING: quasi-separation detected; estimates hit the parameter cap\n";
  if (fits.umle.fisher_diag.near_singular)
    out << "WARNING: Fisher information near singular (rcond " << fits.umle.fisher_diag.rcond << ")\n";

  {
    out << "block classes  ";
    auto member = check_membership(fits.umle.estimate, fits.spec, ParameterSet::Unconstrained);
    for (size_t oi = 0; oi < fits.layout().ordinal_blocks.size(); ++oi) {
      const auto& block = fits.layout().ordinal_block(static_cast<int>(oi));
      out << " " << block.name << "=" << to_string(member.block_class[oi]);
    }
    out << "  (unconstrained fit)\n";
  }
  if (fits.cmle.directions) {
    out << "directions     ";
    for (size_t oi = 0; oi < layout.ordinal_blocks.size(); ++oi) {
      const auto& block = layout.ordinal_block(static_cast<int>(oi));
      if (block.regime == ConstraintRegime::Unconstrained) continue;
      out << " " << block.name << "="
          << to_string(fits.cmle.directions->dirs[oi]);
    }
    out << (fits.cmle.direction_tie ? "  (direction tie, broken toward iso)" : "") << "\n";
  }
  bool any_active = false;
  for (size_t oi = 0; oi < fits.cmle.active_constraints.size(); ++oi) {
    const auto& flags = fits.cmle.active_constraints[oi];
    const auto& block = layout.ordinal_block(static_cast<int>(oi));
    const auto& pred = fits.spec.predictors[static_cast<size_t>(block.predictor)];
    for (size_t j = 0; j < flags.size(); ++j) {
      if (!flags[j]) continue;
      if (!any_active) out << "active constraints";
      any_active = true;
      out << " " << block.name << "[" << pred.levels[j + 1] << "]";
    }
  }
  if (any_active) out << "\n";

  char lvl[32];
  std::snprintf(lvl, sizeof(lvl), "%g", 100.0 * level);
  out << "\nWald " << lvl << "% intervals (UMLE)\n";
  for (int j = 0; j < layout.p; ++j) {
    Interval ci = wald_ci(fits.umle, j, level);
    out << "  " << std::left << std::setw(14) << names[static_cast<size_t>(j)].group << std::setw(14)
        << names[static_cast<size_t>(j)].label << std::right << std::setw(12) << fmt5(ci.lo)
        << std::setw(12) << fmt5(ci.hi) << "\n";
  }
}

void write_estimates_csv(std::ostream& out, const ModelFits& fits, double level) {
  const auto& layout = fits.layout();
  auto names = coordinate_names(fits.spec, layout);
  Eigen::VectorXd u = fits.umle.gamma();
  Eigen::VectorXd c = fits.cmle.gamma();
  out << "coordinate,predictor,level,umle,cmle,wald_lo,wald_hi\n";
  for (int j = 0; j < layout.p; ++j) {
    Interval ci = wald_ci(fits.umle, j, level);
    out << j << ',' << names[static_cast<size_t>(j)].group << ',' << names[static_cast<size_t>(j)].label << ','
        << fmt_full(u[j]) << ',' << fmt_full(c[j]) << ',' << fmt_full(ci.lo) << ',' << fmt_full(ci.hi)
        << "\n";
  }
}

void write_coverage_text(std::ostream& out, const CoverageReport& report) {
  // kinds and sizes in report order
  std::vector<int> sizes;
  std::vector<RegionKind> kinds;
  for (const auto& cell : report.cells) {
    if (sizes.empty() || sizes.back() != cell.n) sizes.push_back(cell.n);
    bool seen = false;
    for (RegionKind k : kinds) seen = seen || k == cell.kind;
    if (!seen) kinds.push_back(cell.kind);
  }

  out << "Coverage percentages, level " << report.level << ", df " << report.df
      << (report.family == QuantileFamily::Mixture ? ", mixture quantiles" : ", chi-square quantiles")
      << ", seed " << report.master_seed << "\n\n";
  out << std::left << std::setw(14) << "n";
  for (int n : sizes) {
    std::ostringstream h;
    for (size_t ki = 0; ki < kinds.size(); ++ki) h << (ki ? " " : "") << std::setw(6) << to_string(kinds[ki]);
    out << "| n=" << std::setw(10) << n << " ";
  }
  out << "\n" << std::setw(14) << "CR";
  for (size_t si = 0; si < sizes.size(); ++si) {
    out << "| ";
    for (RegionKind k : kinds) out << std::setw(6) << to_string(k);
  }
  out << "\n";

  auto row = [&](const std::string& label, auto value) {
    out << std::setw(14) << label;
    for (int n : sizes) {
      out << "| ";
      for (RegionKind k : kinds) out << std::setw(6) << value(report.cell(n, k));
    }
    out << "\n";
  };
  row("Same MLE", [](const CoverageCell& c) {
    return c.same_total ? fmt1(c.same_pct()) + " (" + std::to_string(c.same_total) + ")" : std::string("-");
  });
  row("Different MLE", [](const CoverageCell& c) {
    return c.diff_total ? fmt1(c.diff_pct()) : std::string("-");
  });
  row("Total", [](const CoverageCell& c) { return fmt1(c.total_pct()); });
  row("MC SE", [](const CoverageCell& c) { return fmt1(c.mc_se_pct()); });
  row("Excluded", [](const CoverageCell& c) { return std::to_string(c.excluded); });
}

void write_coverage_csv(std::ostream& out, const CoverageReport& report) {
  out << "n,kind,total_pct,same_pct,diff_pct,same_cases,diff_cases,covered,excluded,mc_se_pct\n";
  for (const auto& c : report.cells) {
    out << c.n << ',' << to_string(c.kind) << ',' << fmt5(c.total_pct()) << ','
        << (c.same_total ? fmt5(c.same_pct()) : "") << ',' << (c.diff_total ? fmt5(c.diff_pct()) : "") << ','
        << c.same_total << ',' << c.diff_total << ',' << c.covered() << ',' << c.excluded << ','
        << fmt5(c.mc_se_pct()) << "\n";
  }
}

namespace {

std::string hypothesis_label(NullHypothesis h) {
  switch (h) {
    case NullHypothesis::NoEffect: return "First (all zero)";
    case NullHypothesis::Monotone: return "Second (monotone)";
    case NullHypothesis::DirectionIso: return "Third (isotonic)";
    case NullHypothesis::DirectionAnti: return "Third (antitonic)";
  }
  return "?";
}

}  // namespace

void write_rejection_text(std::ostream& out, const RejectionReport& report, const ModelSpec& spec) {
  std::vector<int> sizes;
  std::vector<int> predictors;
  for (const auto& cell : report.cells) {
    bool seen_n = false;
    for (int n : sizes) seen_n = seen_n || n == cell.n;
    if (!seen_n) sizes.push_back(cell.n);
    bool seen_p = false;
    for (int p : predictors) seen_p = seen_p || p == cell.predictor;
    if (!seen_p) predictors.push_back(cell.predictor);
  }
  out << "Rejection percentages, level " << report.level
      << (report.family == QuantileFamily::Mixture ? ", mixture quantiles" : ", chi-square quantiles")
      << ", seed " << report.master_seed << "\n\n";
  out << std::left << std::setw(12) << "predictor" << std::setw(20) << "H0";
  for (int n : sizes) {
    std::string h = "n=" + std::to_string(n);
    out << "| " << std::setw(13) << h;
  }
  out << "\n" << std::setw(12) << "" << std::setw(20) << "";
  for (size_t i = 0; i < sizes.size(); ++i) out << "| " << std::setw(6) << "UCCR" << std::setw(7) << "CCR";
  out << "\n";
  const NullHypothesis hyps[4] = {NullHypothesis::NoEffect, NullHypothesis::Monotone,
                                  NullHypothesis::DirectionIso, NullHypothesis::DirectionAnti};
  for (int p : predictors) {
    for (const auto& h : hyps) {
      out << std::setw(12) << spec.predictors[static_cast<size_t>(p)].name << std::setw(20)
          << hypothesis_label(h);
      for (int n : sizes) {
        const auto& u = report.cell(n, p, h, RegionKind::UCCR);
        const auto& c = report.cell(n, p, h, RegionKind::CCR);
        out << "| " << std::setw(6) << fmt1(u.pct()) << std::setw(7) << fmt1(c.pct());
      }
      out << "\n";
    }
  }
}

void write_rejection_csv(std::ostream& out, const RejectionReport& report, const ModelSpec& spec) {
  out << "n,predictor,hypothesis,basis,rejected,evaluated,excluded,pct\n";
  for (const auto& c : report.cells) {
    out << c.n << ',' << spec.predictors[static_cast<size_t>(c.predictor)].name << ','
        << to_string(c.hypothesis) << ',' << to_string(c.basis) << ',' << c.rejected << ',' << c.evaluated
        << ',' << c.excluded << ',' << fmt5(c.pct()) << "\n";
  }
}

}  // namespace poclm
