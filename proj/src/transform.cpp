#include "poclm/transform.hpp"

#include <cmath>

#include "poclm/errors.hpp"

namespace poclm {

Eigen::VectorXd pava_nondecreasing(const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size());
  std::vector<double> value(static_cast<size_t>(n));
  std::vector<int> weight(static_cast<size_t>(n));
  std::vector<int> head(static_cast<size_t>(n));
  int m = 0;
  for (int i = 0; i < n; ++i) {
    value[static_cast<size_t>(m)] = y[i];
    weight[static_cast<size_t>(m)] = 1;
    head[static_cast<size_t>(m)] = i;
    while (m > 0 && value[static_cast<size_t>(m - 1)] > value[static_cast<size_t>(m)]) {
      int wa = weight[static_cast<size_t>(m - 1)];
      int wb = weight[static_cast<size_t>(m)];
      value[static_cast<size_t>(m - 1)] =
          (wa * value[static_cast<size_t>(m - 1)] + wb * value[static_cast<size_t>(m)]) / (wa + wb);
      weight[static_cast<size_t>(m - 1)] = wa + wb;
      --m;
    }
    ++m;
  }
  Eigen::VectorXd out(n);
  for (int b = 0; b < m; ++b) {
    int end = b + 1 < m ? head[static_cast<size_t>(b + 1)] : n;
    for (int i = head[static_cast<size_t>(b)]; i < end; ++i) out[i] = value[static_cast<size_t>(b)];
  }
  return out;
}

Eigen::VectorXd project_to_cone(const Eigen::VectorXd& block, Direction d) {
  if (d == Direction::Iso) return pava_nondecreasing(block).cwiseMax(0.0);
  return -pava_nondecreasing((-block).eval()).cwiseMax(0.0);
}

Parametrization::Parametrization(int gamma_dim, double alpha_gap_floor)
    : gamma_dim_(gamma_dim), eps_alpha_(alpha_gap_floor) {}

void Parametrization::add_alpha_chain(int gamma_start, int len) {
  Block b;
  b.kind = Block::Kind::AlphaChain;
  b.gamma_start = gamma_start;
  b.gamma_len = len;
  b.psi_start = psi_dim_;
  b.psi_len = len;
  psi_dim_ += len;
  blocks_.push_back(std::move(b));
}

void Parametrization::add_free(int gamma_start, int len, double lo, double hi) {
  Block b;
  b.kind = Block::Kind::Free;
  b.gamma_start = gamma_start;
  b.gamma_len = len;
  b.psi_start = psi_dim_;
  b.psi_len = len;
  b.lo = lo;
  b.hi = hi;
  if (std::isfinite(lo) || std::isfinite(hi)) has_box_ = true;
  psi_dim_ += len;
  blocks_.push_back(std::move(b));
}

void Parametrization::add_pinned(int gamma_start, const Eigen::VectorXd& values) {
  Block b;
  b.kind = Block::Kind::Pinned;
  b.gamma_start = gamma_start;
  b.gamma_len = static_cast<int>(values.size());
  b.psi_start = psi_dim_;
  b.psi_len = 0;
  b.fixed = values;
  blocks_.push_back(std::move(b));
}

void Parametrization::add_monotone(int gamma_start, int len, Direction d,
                                   const std::vector<bool>& pinned, const Eigen::VectorXd& pinned_values) {
  Block b;
  b.kind = Block::Kind::MonotoneIncrements;
  b.gamma_start = gamma_start;
  b.gamma_len = len;
  b.sign = d == Direction::Iso ? 1.0 : -1.0;
  b.pinned_increment = pinned.empty() ? std::vector<bool>(static_cast<size_t>(len), false) : pinned;
  if (static_cast<int>(b.pinned_increment.size()) != len)
    throw ConfigError("pinned increment mask has wrong length");
  b.fixed = Eigen::VectorXd::Zero(len);
  int free_count = 0;
  for (int j = 0; j < len; ++j) {
    if (b.pinned_increment[static_cast<size_t>(j)]) {
      double v = pinned_values[j];
      if (v < 0.0) throw ConfigError("pinned increment must be nonnegative");
      b.fixed[j] = v;
    } else {
      ++free_count;
    }
  }
  b.psi_start = psi_dim_;
  b.psi_len = free_count;
  if (free_count > 0) has_box_ = true;
  psi_dim_ += free_count;
  blocks_.push_back(std::move(b));
}

void Parametrization::add_level_shift(int gamma_start, const Eigen::VectorXd& offsets, double lo, double hi) {
  Block b;
  b.kind = Block::Kind::LevelShift;
  b.gamma_start = gamma_start;
  b.gamma_len = static_cast<int>(offsets.size());
  b.psi_start = psi_dim_;
  b.psi_len = 1;
  b.fixed = offsets;
  b.lo = lo;
  b.hi = hi;
  if (std::isfinite(lo) || std::isfinite(hi)) has_box_ = true;
  psi_dim_ += 1;
  blocks_.push_back(std::move(b));
}

void Parametrization::finish() {
  std::vector<bool> covered(static_cast<size_t>(gamma_dim_), false);
  for (const auto& b : blocks_)
    for (int j = 0; j < b.gamma_len; ++j) {
      if (b.gamma_start + j >= gamma_dim_) throw ConfigError("parametrization block out of range");
      if (covered[static_cast<size_t>(b.gamma_start + j)])
        throw ConfigError("parametrization blocks overlap");
      covered[static_cast<size_t>(b.gamma_start + j)] = true;
    }
  for (bool c : covered)
    if (!c) throw ConfigError("parametrization does not cover every coordinate");

  lo_ = Eigen::VectorXd::Constant(psi_dim_, -std::numeric_limits<double>::infinity());
  hi_ = Eigen::VectorXd::Constant(psi_dim_, std::numeric_limits<double>::infinity());
  for (const auto& b : blocks_) {
    switch (b.kind) {
      case Block::Kind::Free:
      case Block::Kind::LevelShift:
        for (int j = 0; j < b.psi_len; ++j) {
          lo_[b.psi_start + j] = b.lo;
          hi_[b.psi_start + j] = b.hi;
        }
        break;
      case Block::Kind::MonotoneIncrements:
        for (int j = 0; j < b.psi_len; ++j) lo_[b.psi_start + j] = 0.0;
        break;
      default:
        break;
    }
  }
  finished_ = true;
}

Eigen::VectorXd Parametrization::to_gamma(const Eigen::VectorXd& psi) const {
  Eigen::VectorXd gamma(gamma_dim_);
  for (const auto& b : blocks_) {
    switch (b.kind) {
      case Block::Kind::AlphaChain: {
        double prev = psi[b.psi_start];
        gamma[b.gamma_start] = prev;
        for (int j = 1; j < b.gamma_len; ++j) {
          prev += eps_alpha_ + std::exp(psi[b.psi_start + j]);
          gamma[b.gamma_start + j] = prev;
        }
        break;
      }
      case Block::Kind::Free:
        gamma.segment(b.gamma_start, b.gamma_len) = psi.segment(b.psi_start, b.psi_len);
        break;
      case Block::Kind::Pinned:
        gamma.segment(b.gamma_start, b.gamma_len) = b.fixed;
        break;
      case Block::Kind::MonotoneIncrements: {
        double acc = 0.0;
        int f = 0;
        for (int j = 0; j < b.gamma_len; ++j) {
          double inc = b.pinned_increment[static_cast<size_t>(j)] ? b.fixed[j] : psi[b.psi_start + f++];
          acc += inc;
          gamma[b.gamma_start + j] = b.sign * acc;
        }
        break;
      }
      case Block::Kind::LevelShift:
        gamma.segment(b.gamma_start, b.gamma_len) =
            b.fixed.array() + psi[b.psi_start];
        break;
    }
  }
  return gamma;
}

Eigen::MatrixXd Parametrization::jacobian(const Eigen::VectorXd& psi) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(gamma_dim_, psi_dim_);
  for (const auto& b : blocks_) {
    switch (b.kind) {
      case Block::Kind::AlphaChain:
        for (int row = 0; row < b.gamma_len; ++row) {
          J(b.gamma_start + row, b.psi_start) = 1.0;
          for (int j = 1; j <= row; ++j)
            J(b.gamma_start + row, b.psi_start + j) = std::exp(psi[b.psi_start + j]);
        }
        break;
      case Block::Kind::Free:
        for (int j = 0; j < b.psi_len; ++j) J(b.gamma_start + j, b.psi_start + j) = 1.0;
        break;
      case Block::Kind::Pinned:
        break;
      case Block::Kind::MonotoneIncrements: {
        int f = 0;
        std::vector<int> free_pos;
        for (int j = 0; j < b.gamma_len; ++j)
          if (!b.pinned_increment[static_cast<size_t>(j)]) free_pos.push_back(j);
        for (int col = 0; col < b.psi_len; ++col) {
          for (int row = free_pos[static_cast<size_t>(col)]; row < b.gamma_len; ++row)
            J(b.gamma_start + row, b.psi_start + col) = b.sign;
        }
        (void)f;
        break;
      }
      case Block::Kind::LevelShift:
        for (int row = 0; row < b.gamma_len; ++row) J(b.gamma_start + row, b.psi_start) = 1.0;
        break;
    }
  }
  return J;
}

Eigen::VectorXd Parametrization::psi_from_gamma(const Eigen::VectorXd& gamma0) const {
  if (!finished_) throw ConfigError("parametrization not finished");
  Eigen::VectorXd psi(psi_dim_);
  for (const auto& b : blocks_) {
    switch (b.kind) {
      case Block::Kind::AlphaChain: {
        psi[b.psi_start] = gamma0[b.gamma_start];
        for (int j = 1; j < b.gamma_len; ++j) {
          double gap = gamma0[b.gamma_start + j] - gamma0[b.gamma_start + j - 1] - eps_alpha_;
          psi[b.psi_start + j] = std::log(std::max(gap, 1e-10));
        }
        break;
      }
      case Block::Kind::Free:
        for (int j = 0; j < b.psi_len; ++j)
          psi[b.psi_start + j] = std::min(std::max(gamma0[b.gamma_start + j], b.lo), b.hi);
        break;
      case Block::Kind::Pinned:
        break;
      case Block::Kind::MonotoneIncrements: {
        Eigen::VectorXd block = gamma0.segment(b.gamma_start, b.gamma_len);
        Eigen::VectorXd proj =
            project_to_cone(block, b.sign > 0 ? Direction::Iso : Direction::Anti) * b.sign;
        // increments of the projected block, pinned entries replaced
        int f = 0;
        double prev = 0.0;
        double drift = 0.0;  // accumulated difference caused by pinned increments
        for (int j = 0; j < b.gamma_len; ++j) {
          double inc = proj[j] - prev;
          prev = proj[j];
          if (b.pinned_increment[static_cast<size_t>(j)]) {
            drift += b.fixed[j] - inc;
          } else {
            psi[b.psi_start + f++] = std::max(inc - drift, 0.0);
            drift = 0.0;
          }
        }
        break;
      }
      case Block::Kind::LevelShift: {
        double c = (gamma0.segment(b.gamma_start, b.gamma_len) - b.fixed).mean();
        psi[b.psi_start] = std::min(std::max(c, b.lo), b.hi);
        break;
      }
    }
  }
  return psi;
}

}  // namespace poclm
