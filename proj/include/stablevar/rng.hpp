#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stablevar {

// Deterministic standard-normal generator.  A fixed seed yields a fixed
// stream on every platform: draws come from mt19937_64 mapped to [0,1) with
// 53 explicit mantissa bits, then through the polar-free Box-Muller transform
// with the second variate cached.  std::normal_distribution is avoided
// because its algorithm (and hence its stream) is implementation-defined.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform draw in [0,1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // One N(0,1) draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0,1], keeps log() finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi() * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static constexpr double pi() { return 3.141592653589793238462643383279502884; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace stablevar
