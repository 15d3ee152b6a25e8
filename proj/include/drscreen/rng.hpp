#pragma once

#include <cstdint>
#include <random>

namespace drscreen {

// mt19937_64 with self-contained samplers. The standard library's
// distribution objects have implementation-defined sequences, so sampling is
// done here to keep seeded results stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01();  // [0,1) with 53 bits
  double uniform(double lo, double hi);
  double normal();  // standard normal, Box-Muller
  double gamma(double shape, double scale);  // Marsaglia-Tsang
  double beta(double alpha, double beta);
  double triangular(double lo, double mode, double hi);

 private:
  std::mt19937_64 gen_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic per-draw sub-seed from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace drscreen
