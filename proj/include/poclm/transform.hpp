#pragma once

#include <limits>
#include <vector>

#include "poclm/types.hpp"

namespace poclm {

// Pool-adjacent-violators: least-squares projection onto the nondecreasing
// sequences.  Uniform weights.
Eigen::VectorXd pava_nondecreasing(const Eigen::VectorXd& y);
// Projection of a beta block onto the monotone cone of the given direction
// (nonnegative-nondecreasing for Iso, nonpositive-nonincreasing for Anti).
Eigen::VectorXd project_to_cone(const Eigen::VectorXd& block, Direction d);

// Maps unconstrained-or-box optimizer coordinates psi to the raw parameter
// vector gamma.  Piecewise structure:
//
//  AlphaChain            alpha_1 = psi_0, alpha_j = alpha_{j-1} + eps + exp(psi_j)
//  Free                  identity (optional per-coordinate box)
//  Pinned                no psi, fixed gamma values
//  MonotoneIncrements    gamma = sign * cumsum(inc); free increments are psi
//                        coordinates bounded below by 0, pinned increments
//                        carry fixed values
//  LevelShift            gamma = offsets + psi * 1 (one psi coordinate)
class Parametrization {
 public:
  struct Block {
    enum class Kind { AlphaChain, Free, Pinned, MonotoneIncrements, LevelShift };
    Kind kind = Kind::Free;
    int gamma_start = 0;
    int gamma_len = 0;
    int psi_start = 0;
    int psi_len = 0;
    double sign = 1.0;                    // MonotoneIncrements
    Eigen::VectorXd fixed;                // Pinned: values; MonotoneIncrements: pinned increment values; LevelShift: offsets
    std::vector<bool> pinned_increment;   // MonotoneIncrements
    double lo = -std::numeric_limits<double>::infinity();  // LevelShift / Free box
    double hi = std::numeric_limits<double>::infinity();
  };

  explicit Parametrization(int gamma_dim, double alpha_gap_floor = 1e-8);

  void add_alpha_chain(int gamma_start, int len);
  void add_free(int gamma_start, int len, double lo = -std::numeric_limits<double>::infinity(),
                double hi = std::numeric_limits<double>::infinity());
  void add_pinned(int gamma_start, const Eigen::VectorXd& values);
  // pinned_values only read where pinned[j] is true.
  void add_monotone(int gamma_start, int len, Direction d,
                    const std::vector<bool>& pinned = {}, const Eigen::VectorXd& pinned_values = {});
  void add_level_shift(int gamma_start, const Eigen::VectorXd& offsets, double lo, double hi);
  void finish();  // checks full gamma coverage

  int psi_dim() const { return psi_dim_; }
  int gamma_dim() const { return gamma_dim_; }
  bool has_box() const { return has_box_; }
  const Eigen::VectorXd& lower() const { return lo_; }
  const Eigen::VectorXd& upper() const { return hi_; }

  Eigen::VectorXd to_gamma(const Eigen::VectorXd& psi) const;
  // J = d gamma / d psi, dense gamma_dim x psi_dim.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& psi) const;
  // Feasible starting point approximating gamma0 (cone projections, bound
  // clamps, log-gap inversion for the alpha chain).
  Eigen::VectorXd psi_from_gamma(const Eigen::VectorXd& gamma0) const;

 private:
  int gamma_dim_;
  int psi_dim_ = 0;
  double eps_alpha_;
  bool has_box_ = false;
  bool finished_ = false;
  std::vector<Block> blocks_;
  Eigen::VectorXd lo_, hi_;
};

}  // namespace poclm
