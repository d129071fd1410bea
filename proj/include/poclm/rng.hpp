#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace poclm {

// splitmix64 step; used to derive independent stream seeds from
// (master seed, stream index).
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index);

// Deterministic sampling layer: the mt19937_64 bit stream is fixed by the
// standard and all transforms below are explicit, so identical seeds give
// identical draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Box-Muller (no spare caching: two uniforms per draw)
  double normal(double mean, double sd);

  // 1-based index into probs (inverse CDF scan)
  int categorical(const Eigen::VectorXd& probs);

 private:
  std::mt19937_64 gen_;
};

}  // namespace poclm
