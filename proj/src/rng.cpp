#include "poclm/rng.hpp"

#include <cmath>

#include "poclm/errors.hpp"

namespace poclm {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master;
  std::uint64_t a = splitmix64(state);
  state ^= index * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL;
  std::uint64_t b = splitmix64(state);
  return a ^ (b + 0x9E3779B97F4A7C15ULL * (index + 1));
}

double Rng::normal(double mean, double sd) {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
}

int Rng::categorical(const Eigen::VectorXd& probs) {
  double u = uniform();
  double cum = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i + 1;
  }
  return static_cast<int>(probs.size());
}

}  // namespace poclm
