//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/rng.hpp"

#include <limits>

namespace polycl {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix64(std::uint64_t seed, std::uint64_t index,
                    std::uint64_t tag) noexcept {
  constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (index * kGolden));
  h = splitmix64(h ^ (tag * kGolden + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
  if (n <= 1)
    return 0;
  // Rejection sampling on the largest multiple of n.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max()
      - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

double uniform_unit(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace polycl
