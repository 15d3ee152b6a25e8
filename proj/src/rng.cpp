#include "drscreen/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace drscreen {

double Rng::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal() {
  // 1 - u keeps the log argument in (0,1]
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double Rng::gamma(double shape, double scale) {
  if (shape <= 0.0 || scale <= 0.0)
    throw std::invalid_argument("gamma sampler requires positive shape and scale");
  if (shape < 1.0) {
    // boost: X ~ gamma(shape+1), U^(1/shape) scaling
    double u = 1.0 - uniform01();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

double Rng::beta(double alpha, double beta) {
  double x = gamma(alpha, 1.0);
  double y = gamma(beta, 1.0);
  return x / (x + y);
}

double Rng::triangular(double lo, double mode, double hi) {
  if (!(lo <= mode && mode <= hi))
    throw std::invalid_argument("triangular sampler requires lo <= mode <= hi");
  if (lo == hi) return lo;
  double u = uniform01();
  double cut = (mode - lo) / (hi - lo);
  if (u < cut) return lo + std::sqrt(u * (hi - lo) * (mode - lo));
  return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 1));
}

}  // namespace drscreen
