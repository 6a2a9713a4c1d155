//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_AUGMENT_HPP_
#define POLYCL_AUGMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "polycl/tokenizer.hpp"

namespace polycl {

enum class ExplicitMode : std::uint8_t {
  kOriginal,
  kEnumeration,
  kMasking,
  kDrop,
};

std::string_view to_string(ExplicitMode mode);

// Accepts "Original", "Enumeration" (or "Enum"), "Masking", "Drop".
ExplicitMode parse_mode(std::string_view name);

// How the two views of each anchor are built. implicit_dropout is carried
// here but only acted on inside the encoder.
struct AugmentationSpec {
  ExplicitMode branch_i = ExplicitMode::kOriginal;
  ExplicitMode branch_j = ExplicitMode::kOriginal;
  bool implicit_dropout = false;
  double ratio = 0.10;

  // Throws InvalidRatio unless 0 <= ratio < 1.
  void validate() const;

  // Short label such as "Enumeration-Masking+implicit".
  std::string tag() const;

  bool is_baseline() const noexcept {
    return branch_i == ExplicitMode::kOriginal
           && branch_j == ExplicitMode::kOriginal && !implicit_dropout;
  }

  friend bool operator==(const AugmentationSpec &,
                         const AugmentationSpec &) = default;
};

struct PositivePair {
  std::size_t anchor_id;
  TokenSequence view_i;
  TokenSequence view_j;
  std::uint64_t seed_i;
  std::uint64_t seed_j;
};

// Number of tokens touched by Masking/Drop: ratio * len rounded half up.
std::size_t augment_count(std::size_t len, double ratio);

// Replaces augment_count(len, ratio) positions, chosen uniformly without
// replacement, with the MASK special token.
TokenSequence mask_tokens(const TokenSequence &seq, double ratio,
                          std::uint64_t rng_seed);

// Deletes augment_count(len, ratio) positions chosen uniformly without
// replacement; survivors keep their order. Throws EmptyResult if nothing
// would survive.
TokenSequence drop_tokens(const TokenSequence &seq, double ratio,
                          std::uint64_t rng_seed);

TokenSequence make_view(std::string_view anchor, ExplicitMode mode,
                        double ratio, std::uint64_t rng_seed);

// One positive pair per anchor. View seeds are
//   seed_i = mix64(batch_seed, k, kBranchI), seed_j = mix64(batch_seed, k,
//   kBranchJ)
// where k is the anchor's position in `anchors`. anchor_ids, when given,
// supplies the corpus index recorded in each pair (defaults to k).
std::vector<PositivePair> make_pair_batch(
    const std::vector<std::string> &anchors, const AugmentationSpec &spec,
    std::uint64_t batch_seed, const std::vector<std::size_t> &anchor_ids = {});

// The ten unordered explicit combinations (Original-Original first), all
// without implicit dropout.
std::vector<AugmentationSpec> explicit_combinations(double ratio = 0.10);

}  // namespace polycl

#endif  // POLYCL_AUGMENT_HPP_
