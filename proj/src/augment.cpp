//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/augment.hpp"

#include <cmath>
#include <numeric>

#include "polycl/errors.hpp"
#include "polycl/rng.hpp"
#include "polycl/smiles.hpp"

namespace polycl {
namespace {

void check_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0))
    throw InvalidRatio("augmentation ratio must be in [0, 1), got "
                       + std::to_string(ratio));
}

void check_plain(const TokenSequence &seq) {
  if (seq.empty())
    throw DataError("cannot augment an empty token sequence");
  if (has_special(seq))
    throw DataError("cannot augment a sequence containing special tokens");
}

// First k entries of a uniform random permutation of [0, n).
std::vector<std::size_t> choose_positions(std::size_t n, std::size_t k,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t { 0 });
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

std::string_view to_string(ExplicitMode mode) {
  switch (mode) {
  case ExplicitMode::kOriginal:
    return "Original";
  case ExplicitMode::kEnumeration:
    return "Enumeration";
  case ExplicitMode::kMasking:
    return "Masking";
  case ExplicitMode::kDrop:
    return "Drop";
  }
  return "?";
}

ExplicitMode parse_mode(std::string_view name) {
  if (name == "Original")
    return ExplicitMode::kOriginal;
  if (name == "Enumeration" || name == "Enum")
    return ExplicitMode::kEnumeration;
  if (name == "Masking")
    return ExplicitMode::kMasking;
  if (name == "Drop")
    return ExplicitMode::kDrop;
  throw ConfigError("unknown augmentation mode '" + std::string(name)
                    + "' (expected Original, Enumeration, Masking or Drop)");
}

void AugmentationSpec::validate() const {
  check_ratio(ratio);
}

std::string AugmentationSpec::tag() const {
  std::string t = std::string(to_string(branch_i)) + "-"
                  + std::string(to_string(branch_j));
  if (implicit_dropout)
    t += "+implicit";
  return t;
}

std::size_t augment_count(std::size_t len, double ratio) {
  check_ratio(ratio);
  return static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(len) + 0.5));
}

TokenSequence mask_tokens(const TokenSequence &seq, double ratio,
                          std::uint64_t rng_seed) {
  check_ratio(ratio);
  check_plain(seq);
  TokenSequence out = seq;
  for (std::size_t pos:
       choose_positions(seq.size(), augment_count(seq.size(), ratio), rng_seed))
    out[pos] = Token::special(Special::kMask);
  return out;
}

TokenSequence drop_tokens(const TokenSequence &seq, double ratio,
                          std::uint64_t rng_seed) {
  check_ratio(ratio);
  check_plain(seq);
  const std::size_t k = augment_count(seq.size(), ratio);
  if (k >= seq.size())
    throw EmptyResult("dropping " + std::to_string(k) + " of "
                      + std::to_string(seq.size()) + " tokens leaves nothing");
  std::vector<char> dropped(seq.size(), 0);
  for (std::size_t pos: choose_positions(seq.size(), k, rng_seed))
    dropped[pos] = 1;
  TokenSequence out;
  out.reserve(seq.size() - k);
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (!dropped[i])
      out.push_back(seq[i]);
  return out;
}

TokenSequence make_view(std::string_view anchor, ExplicitMode mode,
                        double ratio, std::uint64_t rng_seed) {
  // Parsing up front rejects malformed anchors in every mode, not only
  // the ones that need the graph.
  const PolymerGraph graph = parse(anchor);
  switch (mode) {
  case ExplicitMode::kOriginal:
    check_ratio(ratio);
    return tokenize(anchor);
  case ExplicitMode::kEnumeration:
    check_ratio(ratio);
    return tokenize(enumerate_random(graph, rng_seed));
  case ExplicitMode::kMasking:
    return mask_tokens(tokenize(anchor), ratio, rng_seed);
  case ExplicitMode::kDrop:
    return drop_tokens(tokenize(anchor), ratio, rng_seed);
  }
  throw DataError("unknown augmentation mode");
}

std::vector<PositivePair> make_pair_batch(
    const std::vector<std::string> &anchors, const AugmentationSpec &spec,
    std::uint64_t batch_seed, const std::vector<std::size_t> &anchor_ids) {
  spec.validate();
  if (anchors.empty())
    throw DataError("pair batch needs at least one anchor");
  if (!anchor_ids.empty() && anchor_ids.size() != anchors.size())
    throw DataError("anchor id list does not match anchor list");

  std::vector<PositivePair> pairs;
  pairs.reserve(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    PositivePair p;
    p.anchor_id = anchor_ids.empty() ? k : anchor_ids[k];
    p.seed_i = mix64(batch_seed, k, SeedTag::kBranchI);
    p.seed_j = mix64(batch_seed, k, SeedTag::kBranchJ);
    try {
      p.view_i = make_view(anchors[k], spec.branch_i, spec.ratio, p.seed_i);
      p.view_j = make_view(anchors[k], spec.branch_j, spec.ratio, p.seed_j);
    } catch (const DataError &e) {
      throw DataError("anchor " + std::to_string(p.anchor_id) + ": "
                      + e.what());
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<AugmentationSpec> explicit_combinations(double ratio) {
  constexpr ExplicitMode kModes[] = {
    ExplicitMode::kOriginal,
    ExplicitMode::kEnumeration,
    ExplicitMode::kMasking,
    ExplicitMode::kDrop,
  };
  std::vector<AugmentationSpec> out;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      out.push_back({ kModes[a], kModes[b], false, ratio });
  return out;
}

}  // namespace polycl
