//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "polycl/augment.hpp"
#include "polycl/errors.hpp"
#include "polycl/rng.hpp"
#include "polycl/smiles.hpp"
#include "polycl/synth.hpp"

using namespace polycl;

namespace {

std::size_t count_masks(const TokenSequence &seq) {
  return static_cast<std::size_t>(
      std::count(seq.begin(), seq.end(), Token::special(Special::kMask)));
}

TokenSequence carbons(std::size_t n) {
  return TokenSequence(n, Token { TokenKind::kAtom, "C" });
}

bool is_subsequence(const TokenSequence &sub, const TokenSequence &full) {
  std::size_t k = 0;
  for (const auto &t: full)
    if (k < sub.size() && sub[k] == t)
      ++k;
  return k == sub.size();
}

}  // namespace

TEST_CASE("replacement count rounds half up") {
  CHECK(augment_count(10, 0.1) == 1);
  CHECK(augment_count(7, 0.1) == 1);
  CHECK(augment_count(4, 0.1) == 0);
  CHECK(augment_count(5, 0.1) == 1);
  CHECK(augment_count(15, 0.1) == 2);
  CHECK(augment_count(20, 0.1) == 2);
  CHECK(augment_count(3, 0.34) == 1);
}

TEST_CASE("masking") {
  const auto ten = carbons(10);
  CHECK(count_masks(mask_tokens(ten, 0.1, 1)) == 1);
  const auto pvc = tokenize("[*]CC([*])Cl");
  CHECK(mask_tokens(pvc, 0.0, 5) == pvc);

  // The seven single-position outcomes are the only legal results.
  std::set<TokenSequence> legal;
  for (std::size_t p = 0; p < pvc.size(); ++p) {
    auto v = pvc;
    v[p] = Token::special(Special::kMask);
    legal.insert(v);
  }
  std::set<TokenSequence> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto m = mask_tokens(pvc, 0.1, seed);
    CHECK(legal.count(m) == 1);
    CHECK(m == mask_tokens(pvc, 0.1, seed));
    seen.insert(m);
  }
  CHECK(seen.size() == legal.size());
  CHECK_THROWS_AS(mask_tokens(pvc, 1.0, 0), InvalidRatio);
  CHECK_THROWS_AS(mask_tokens(pvc, -0.1, 0), InvalidRatio);
}

TEST_CASE("drop") {
  const auto ten = tokenize("CCOCCNCCSC");
  const auto d = drop_tokens(ten, 0.1, 3);
  CHECK(d.size() == 9);
  CHECK(is_subsequence(d, ten));
  CHECK(drop_tokens(ten, 0.0, 3) == ten);

  const auto cco = tokenize("CCO");
  const std::set<TokenSequence> legal { tokenize("CO"), tokenize("CC") };
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    CHECK(legal.count(drop_tokens(cco, 0.34, seed)) == 1);

  CHECK_THROWS_AS(drop_tokens(tokenize("C"), 0.6, 0), EmptyResult);
  CHECK_THROWS_AS(drop_tokens(cco, 1.5, 0), InvalidRatio);
}

TEST_CASE("length laws and determinism on random sequences") {
  Rng rng(17);
  const std::vector<std::string> alphabet { "C", "O", "N", "(", ")", "=", "1", "[*]", "c", "Cl" };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + uniform_index(rng, 60);
    TokenSequence seq;
    for (std::size_t k = 0; k < len; ++k)
      seq.push_back({ TokenKind::kAtom, alphabet[uniform_index(rng, alphabet.size())] });
    const std::uint64_t seed = rng();
    const std::size_t expect = static_cast<std::size_t>(std::floor(0.1 * len + 0.5));
    const auto m = mask_tokens(seq, 0.1, seed);
    CHECK(m.size() == len);
    CHECK(count_masks(m) == expect);
    CHECK(m == mask_tokens(seq, 0.1, seed));
    if (expect < len) {
      const auto d = drop_tokens(seq, 0.1, seed);
      CHECK(d.size() == len - expect);
      CHECK(is_subsequence(d, seq));
      CHECK(d == drop_tokens(seq, 0.1, seed));
    }
  }
}

TEST_CASE("make_view") {
  CHECK(make_view("CCO", ExplicitMode::kOriginal, 0.1, 4) == tokenize("CCO"));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto v = make_view("CCO", ExplicitMode::kEnumeration, 0.1, seed);
    CHECK(canonicalize(detokenize(v)) == canonicalize("CCO"));
  }
  const std::string twenty = "CC(C)CC(C)CCCCCCCCCC";
  REQUIRE(tokenize(twenty).size() == 20);
  CHECK(make_view(twenty, ExplicitMode::kDrop, 0.1, 2).size() == 18);
  CHECK_THROWS_AS(make_view("C(", ExplicitMode::kOriginal, 0.1, 0), SyntaxError);
}

TEST_CASE("pair batches") {
  AugmentationSpec base;
  const auto single = make_pair_batch({ "[*]CC([*])Cl" }, base, 7);
  REQUIRE(single.size() == 1);
  CHECK(single[0].view_i == single[0].view_j);

  const auto anchors = synth_polymers(4, 8);
  AugmentationSpec best { ExplicitMode::kEnumeration, ExplicitMode::kMasking,
                          true, 0.1 };
  const auto a = make_pair_batch(anchors, best, 99);
  const auto b = make_pair_batch(anchors, best, 99);
  REQUIRE(a.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a[k].view_i == b[k].view_i);
    CHECK(a[k].view_j == b[k].view_j);
    CHECK(a[k].seed_i == mix64(99, k, SeedTag::kBranchI));
    CHECK(a[k].seed_j == mix64(99, k, SeedTag::kBranchJ));
    CHECK(a[k].anchor_id == k);
    CHECK(canonicalize(detokenize(a[k].view_i)) == canonicalize(anchors[k]));
    const auto len = tokenize(anchors[k]).size();
    CHECK(count_masks(a[k].view_j) == augment_count(len, 0.1));
    CHECK(count_masks(a[k].view_i) == 0);
    // Reconstructible from the recorded seeds alone.
    CHECK(make_view(anchors[k], ExplicitMode::kMasking, 0.1, a[k].seed_j)
          == a[k].view_j);
  }
  const auto ids = make_pair_batch(anchors, best, 99, { 10, 11, 12, 13 });
  CHECK(ids[2].anchor_id == 12);
  CHECK_THROWS_AS(make_pair_batch({ "CCO", "C(" }, best, 1), DataError);
}

TEST_CASE("explicit combinations") {
  const auto combos = explicit_combinations();
  CHECK(combos.size() == 10);
  CHECK(combos.front().is_baseline());
  std::set<std::pair<int, int>> unordered;
  for (const auto &s: combos) {
    CHECK_FALSE(s.implicit_dropout);
    unordered.insert(std::minmax(static_cast<int>(s.branch_i),
                                 static_cast<int>(s.branch_j)));
  }
  CHECK(unordered.size() == 10);
  CHECK(AugmentationSpec { ExplicitMode::kEnumeration, ExplicitMode::kMasking,
                           true, 0.1 }
            .tag()
        == "Enumeration-Masking+implicit");
  CHECK(parse_mode("Enum") == ExplicitMode::kEnumeration);
  CHECK_THROWS_AS(parse_mode("Shuffle"), ConfigError);
}
