#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qmf {

// Deterministic random source: every draw is a fixed transform of
// mt19937_64 output so that equal seeds give bit-identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * kInvSqrt2, im * kInvSqrt2};
  }

  // Index i with probability weights[i] (weights must sum to ~1).
  std::size_t categorical(const std::vector<double>& weights) {
    if (weights.empty()) {
      throw std::invalid_argument("Rng::categorical: empty weight vector");
    }
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  static constexpr double kInvSqrt2 = 0.70710678118654752440;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qmf
