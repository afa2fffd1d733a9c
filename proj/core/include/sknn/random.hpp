#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sknn {

// Deterministic RNG wrapper. Draw algorithms are implemented here rather
// than via std::*_distribution so that seeded runs reproduce across
// standard libraries (snapshot replay depends on this).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n).
  std::uint64_t integer(std::uint64_t n) {
    // Modulo bias is negligible for n << 2^64.
    return gen_() % n;
  }

  bool coin() { return (gen_() & 1u) != 0; }

  double normal(double mu = 0.0, double sigma = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    return mu + sigma * z;
  }

  // Exponential with the given mean.
  double exponential(double mean) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -mean * std::log(u);
  }

  double laplace(double mu, double b) {
    double mag = exponential(b);
    return coin() ? mu + mag : mu - mag;
  }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

}  // namespace sknn
