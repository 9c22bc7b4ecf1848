#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tailadapt {

/// Seedable, splittable generator. `Rng::stream(seed, j)` gives the stream
/// for Monte Carlo replication j; streams depend only on (seed, j), so a
/// run's results do not depend on how replications are spread over workers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
  }

  static Rng stream(std::uint64_t seed, std::uint64_t j) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j >> 32), 0x9e3779b9u};
    return Rng(seq);
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  std::vector<double> uniforms(std::size_t n) {
    std::vector<double> u(n);
    for (auto& v : u) v = uniform();
    return u;
  }

 private:
  explicit Rng(std::seed_seq& seq) { engine_.seed(seq); }

  std::mt19937_64 engine_;
};

}  // namespace tailadapt
