//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "polycl/errors.hpp"
#include "polycl/smiles.hpp"

namespace polycl {
namespace {

using Ranks = std::vector<int>;

// Dense ranks (0..k-1) of atoms under their label and degree. Attachment
// points sort first so canonical strings start at a "[*]" when present.
Ranks initial_ranks(const PolymerGraph &g) {
  using Key = std::tuple<int, std::string, int, int, int, int, int, int>;
  std::vector<Key> keys;
  keys.reserve(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atoms()[i];
    keys.emplace_back(a.attachment ? 0 : 1, a.element, a.aromatic ? 1 : 0,
                      a.isotope, a.charge, a.hcount, a.bracket ? 1 : 0,
                      g.degree(i));
  }
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  Ranks r(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i)
    r[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i])
        - sorted.begin());
  return r;
}

int count_classes(const Ranks &r) {
  std::vector<int> s = r;
  std::sort(s.begin(), s.end());
  return static_cast<int>(std::unique(s.begin(), s.end()) - s.begin());
}

// Iterative refinement: an atom's new class is its old class plus the sorted
// multiset of (neighbor class, bond order). Repeats until stable. The
// resulting ranks are dense and preserve the order of the input classes.
Ranks refine(const PolymerGraph &g, Ranks r) {
  const int n = g.num_atoms();
  int classes = count_classes(r);
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  while (true) {
    std::vector<Key> keys(n);
    for (int i = 0; i < n; ++i) {
      keys[i].first = r[i];
      for (auto [nbr, bi]: g.neighbors(i))
        keys[i].second.emplace_back(r[nbr],
                                    static_cast<int>(g.bonds()[bi].order));
      std::sort(keys[i].second.begin(), keys[i].second.end());
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return keys[a] < keys[b]; });
    Ranks next(n);
    int rank = 0;
    for (int k = 0; k < n; ++k) {
      if (k > 0 && keys[idx[k]] != keys[idx[k - 1]])
        ++rank;
      next[idx[k]] = rank;
    }
    const int next_classes = rank + 1;
    r = std::move(next);
    if (next_classes == classes)
      return r;
    classes = next_classes;
  }
}

// Lowest rank value shared by more than one atom, if any.
std::optional<int> first_tied_rank(const Ranks &r) {
  std::vector<int> counts(r.size(), 0);
  for (int x: r)
    ++counts[x];
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] > 1)
      return static_cast<int>(k);
  return std::nullopt;
}

Ranks individualize(const Ranks &r, int atom) {
  Ranks out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    out[i] = 2 * r[i] + 1;
  out[atom] = 2 * r[atom];
  return out;
}

std::string write_ranked(const PolymerGraph &g, const Ranks &r) {
  const int n = g.num_atoms();
  std::vector<std::vector<int>> order(n);
  for (int a = 0; a < n; ++a) {
    for (auto [nbr, bi]: g.neighbors(a))
      order[a].push_back(nbr);
    std::sort(order[a].begin(), order[a].end(),
              [&](int x, int y) { return r[x] < r[y]; });
  }
  const int start = static_cast<int>(
      std::min_element(r.begin(), r.end()) - r.begin());
  return write_smiles(g, start, order);
}

struct Best {
  std::string smiles;
  Ranks ranks;
  bool found = false;
};

void search(const PolymerGraph &g, const Ranks &r, bool exact, Best &best) {
  const auto tied = first_tied_rank(r);
  if (!tied) {
    std::string s = write_ranked(g, r);
    if (!best.found || s < best.smiles) {
      best.smiles = std::move(s);
      best.ranks = r;
      best.found = true;
    }
    return;
  }
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (r[i] != *tied)
      continue;
    search(g, refine(g, individualize(r, i)), exact, best);
    if (!exact)
      return;
  }
}

Best canonical_search(const PolymerGraph &g) {
  if (g.num_atoms() == 0)
    throw DataError("cannot canonicalize an empty graph");
  Best best;
  const bool exact = g.num_atoms() <= kExactCanonicalLimit;
  search(g, refine(g, initial_ranks(g)), exact, best);
  return best;
}

}  // namespace

std::vector<int> canonical_ranks(const PolymerGraph &g) {
  return canonical_search(g).ranks;
}

std::string write_canonical(const PolymerGraph &g) {
  return canonical_search(g).smiles;
}

}  // namespace polycl
