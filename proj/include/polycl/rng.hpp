//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_RNG_HPP_
#define POLYCL_RNG_HPP_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace polycl {

using Rng = std::mt19937_64;

// Branch tags fed to mix64 so that independent consumers of one seed never
// share a stream.
enum class SeedTag : std::uint64_t {
  kBranchI = 1,
  kBranchJ = 2,
  kShuffle = 3,
  kViews = 4,
  kDropout = 5,
  kInit = 6,
  kEvalPairs = 7,
  kFolds = 8,
  kHead = 9,
  kEvalSample = 10,
};

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Derives a child seed from a parent seed, an index, and a tag:
//   mix64(s, i, t) = splitmix64(splitmix64(splitmix64(s) ^ i) ^ t)
// with every xor operand first passed through the golden-ratio multiply.
std::uint64_t mix64(std::uint64_t seed, std::uint64_t index,
                    std::uint64_t tag) noexcept;

inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t index,
                           SeedTag tag) noexcept {
  return mix64(seed, index, static_cast<std::uint64_t>(tag));
}

// Unbiased integer in [0, n). std::uniform_int_distribution is not
// specified bit-for-bit across standard libraries, so draws go through here.
std::uint64_t uniform_index(Rng &rng, std::uint64_t n);

// Double in [0, 1) with 53 random bits.
double uniform_unit(Rng &rng);

template <class T>
void shuffle(std::vector<T> &v, Rng &rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace polycl

#endif  // POLYCL_RNG_HPP_
