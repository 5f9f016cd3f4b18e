#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "spectom/types.hpp"

namespace spectom {

//! Deterministic substream RNG: every consumer derives its own engine from
//! (root seed, label, index...), so parallel evaluation order never changes
//! results. Uniform/normal transforms are implemented here rather than with
//! std::*_distribution, whose output is implementation-defined.
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t root_seed, std::string_view label,
               std::uint64_t index = 0) {
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a over the label
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    std::uint64_t s = splitmix(root_seed ^ h);
    s = splitmix(s ^ index);
    engine_.seed(s);
  }

  std::uint64_t next_u64() { return engine_(); }

  //! Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  //! Standard normal via Box-Muller; one cached value per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  //! Circular complex Gaussian with total variance xi (xi/2 per component).
  Complex circular_normal(double xi) {
    double s = std::sqrt(xi / 2.0);
    double re = s * normal();
    double im = s * normal();
    return {re, im};
  }

  //! Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; n here is always small.
    return engine_() % n;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spectom
