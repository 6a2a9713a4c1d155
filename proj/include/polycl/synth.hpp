//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_SYNTH_HPP_
#define POLYCL_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "polycl/transfer.hpp"

namespace polycl {

// Deterministic toy corpus of homopolymer repeat units assembled from a
// fragment library: "[*]" + 1-4 backbone units with optional side groups +
// "[*]". Entries are pairwise non-isomorphic.
std::vector<std::string> synth_polymers(std::size_t count, std::uint64_t seed);

// Toy regression targets computed from graph descriptors plus small
// seeded noise. Known names: "toy_gap" (band-gap-like: falls with aromatic
// and unsaturated content) and "toy_affinity" (electron-affinity-like: rises
// with halogens, carbonyls and nitro groups).
PropertyDataset synth_property_dataset(std::string_view name,
                                       const std::vector<std::string> &smiles,
                                       std::uint64_t seed);

}  // namespace polycl

#endif  // POLYCL_SYNTH_HPP_
