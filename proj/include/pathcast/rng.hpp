#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace pathcast {

// Named-stream RNG: every consumer derives its own stream from the single
// global seed plus a purpose label and integer keys, so results do not depend
// on scheduling or evaluation order. Uniform and normal draws are generated
// explicitly (not via std distributions) to keep byte-identical output across
// standard-library implementations.
class Rng {
 public:
  Rng(std::uint64_t global_seed, const std::string& label, std::int64_t k0 = 0,
      std::int64_t k1 = 0, std::int64_t k2 = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  double normal();  // standard normal, Box-Muller

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pathcast
