#include "pathcast/rng.hpp"

#include <cmath>

namespace pathcast {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t global_seed, const std::string& label, std::int64_t k0, std::int64_t k1,
         std::int64_t k2) {
  std::uint64_t state = global_seed;
  state ^= fnv1a(label) + 0x9e3779b97f4a7c15ull;
  splitmix64(state);
  state ^= static_cast<std::uint64_t>(k0) * 0xff51afd7ed558ccdull;
  splitmix64(state);
  state ^= static_cast<std::uint64_t>(k1) * 0xc4ceb9fe1a85ec53ull;
  splitmix64(state);
  state ^= static_cast<std::uint64_t>(k2) * 0x2545f4914f6cdd1dull;
  engine_.seed(splitmix64(state));
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n == 0) return 0;
  // Rejection sampling keeps the draw unbiased.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

}  // namespace pathcast
