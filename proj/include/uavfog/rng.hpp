#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace uavfog {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seedable random stream with platform-independent distributions.
///
/// The engine is std::mt19937_64 (bit-exact by the standard); every
/// distribution is implemented here because the std:: ones are
/// implementation-defined. Child streams are derived by hashing the parent
/// seed with a stream id, so per-ant / per-particle / per-device streams do
/// not depend on consumption order.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  Rng child(std::uint64_t stream) const { return Rng(derive(seed_, stream)); }
  Rng child(std::uint64_t a, std::uint64_t b) const { return Rng(derive(derive(seed_, a), b)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  /// Poisson draw. Large means are split into chunks (sum of independent
  /// Poissons is Poisson) so Knuth's product method never underflows.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 0.0) {
      const double chunk = mean > 30.0 ? 30.0 : mean;
      mean -= chunk;
      const double limit = std::exp(-chunk);
      double prod = uniform();
      while (prod > limit) {
        ++total;
        prod *= uniform();
      }
    }
    return total;
  }

private:
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace uavfog
