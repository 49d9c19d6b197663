#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coopnet {

// splitmix64 finalizer; decorrelates nearby seed inputs.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic per-trial random source. Every (master_seed, stream, trial)
// triple gets an independent engine, so trials can be run in any order or in
// parallel and still produce bit-identical draws. mt19937_64 output is fully
// specified by the standard, making results portable across platforms.
class TrialRng {
 public:
  TrialRng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t trial)
      : gen_(derive_seed(master_seed, stream, trial)) {}

  // Uniform on [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return u01() < p; }

  // Unit-mean exponential; -log1p(-u) never sees a zero argument to log.
  double exponential() { return -std::log1p(-u01()); }

  // Poisson sample: product inversion for small means, Hormann's transformed
  // rejection (PTRS) for large ones.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) {
      return 0;
    }
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      std::uint64_t count = 0;
      double prod = u01();
      while (prod > limit) {
        ++count;
        prod *= u01();
      }
      return count;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = u01() - 0.5;
      const double v = u01();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) {
        return static_cast<std::uint64_t>(kf);
      }
      if (kf < 0.0 || (us < 0.013 && v > us)) {
        continue;
      }
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          -mean + kf * loglam - std::lgamma(kf + 1.0)) {
        return static_cast<std::uint64_t>(kf);
      }
    }
  }

 private:
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t trial) {
    std::uint64_t s = mix64(master + 0x9E3779B97F4A7C15ULL);
    s = mix64(s ^ (stream + 0x9E3779B97F4A7C15ULL) * 0xD1B54A32D192ED03ULL);
    s = mix64(s ^ (trial + 0x9E3779B97F4A7C15ULL) * 0x8CB92BA72F3D8DD7ULL);
    return s;
  }

  std::mt19937_64 gen_;
};

}  // namespace coopnet
