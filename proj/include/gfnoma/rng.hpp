#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace gfnoma {

/// SplitMix64 mixing step. Used both to derive child seeds and as the
/// generator behind every stochastic draw, so all streams are portable
/// and bit-stable across platforms and thread counts.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  return splitmix64(s);
}

/// Independent draw streams inside one trial. Keeping generation streams
/// separate from receiver-side streams makes matched-seed experiments
/// (e.g. CSI error on/off) share identical frames.
enum class Stream : std::uint64_t {
  angles = 1,
  fading = 2,
  activity = 3,
  symbols = 4,
  noise = 5,
  csi = 6,
  signatures = 7,
  clustering = 8,
};

/// Child seed for (master, sweep point, trial, stream).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t sweep_index,
                                 std::uint64_t trial_index, Stream stream) {
  std::uint64_t s = mix_seed(master, sweep_index);
  s = mix_seed(s, trial_index);
  return mix_seed(s, static_cast<std::uint64_t>(stream));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased.
  int uniform_int(int n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~0ull - ~0ull % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gfnoma
