//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_SMILES_HPP_
#define POLYCL_SMILES_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polycl/tokenizer.hpp"

namespace polycl {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

enum class Chirality : std::uint8_t {
  kNone,
  kCounterClockwise,  // @
  kClockwise,         // @@
};

// Stereo annotations (chirality, '/' and '\') are carried through parsing
// but ignored by canonicalization and never written back out.
struct Atom {
  std::string element;  // "*" for attachment points
  bool aromatic = false;
  int charge = 0;
  int hcount = 0;  // explicit H in brackets; organic-subset atoms carry 0
  int isotope = 0;
  bool bracket = false;
  bool attachment = false;
  Chirality chirality = Chirality::kNone;

  // Attributes that participate in graph identity (everything but stereo).
  bool same_label(const Atom &other) const noexcept;
};

struct Bond {
  int begin;
  int end;
  BondOrder order;
  char stereo = 0;  // '/', '\\' or 0

  int other(int atom) const noexcept { return atom == begin ? end : begin; }
};

struct ParseOptions {
  bool strict_valence = false;
};

// Attributed molecular graph of one repeating unit.
class PolymerGraph {
public:
  PolymerGraph() = default;

  int add_atom(Atom atom);

  // Returns the bond index. Does not check for duplicates.
  int add_bond(int a, int b, BondOrder order, char stereo = 0);

  const std::vector<Atom> &atoms() const noexcept { return atoms_; }
  const std::vector<Bond> &bonds() const noexcept { return bonds_; }

  int num_atoms() const noexcept { return static_cast<int>(atoms_.size()); }
  int num_bonds() const noexcept { return static_cast<int>(bonds_.size()); }

  // (neighbor atom, bond index) pairs in bond-insertion order.
  const std::vector<std::pair<int, int>> &neighbors(int atom) const {
    return adjacency_[atom];
  }

  int degree(int atom) const {
    return static_cast<int>(adjacency_[atom].size());
  }

  // -1 when the atoms are not bonded.
  int bond_between(int a, int b) const;

  int num_attachments() const noexcept;
  int num_heavy_atoms() const noexcept;

  // Throws DataError when a structural invariant is violated: endpoints out
  // of range, self-loops, parallel bonds, attachment degree != 1, or more
  // than one connected component.
  void validate() const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
};

PolymerGraph parse(std::string_view text, ParseOptions opts = {});

// Parses the inside of a bracket atom ("13CH3+" for "[13CH3+]").
// offset is the byte position of the opening '[' and is used for
// diagnostics only.
Atom parse_bracket_atom(std::string_view body, std::size_t offset);

// Standard-valence check used by strict parsing. Throws ValenceError.
void check_valence(const PolymerGraph &g);

// Writes the graph by depth-first traversal from `start`, visiting each
// atom's neighbors in the order given by neighbor_order[atom] (a permutation
// of that atom's neighbor atom indices). Ring closures take the lowest free
// digit; the bond symbol of a ring bond is written at its opening digit.
std::string write_smiles(const PolymerGraph &g, int start,
                         const std::vector<std::vector<int>> &neighbor_order);

// Deterministic canonical form: equal for two graphs iff they are isomorphic
// as attributed graphs (stereo ignored). Exact tie-breaking search for
// graphs up to kExactCanonicalLimit atoms, greedy tie-breaking above.
std::string write_canonical(const PolymerGraph &g);

inline constexpr int kExactCanonicalLimit = 16;

// Canonical atom ranks after invariant refinement and tie-breaking
// (0 = first atom written). Exposed for diagnostics and tests.
std::vector<int> canonical_ranks(const PolymerGraph &g);

// One random non-canonical SMILES for the graph: uniform random start atom,
// uniform random neighbor ordering at every atom.
std::string enumerate_random(const PolymerGraph &g, std::uint64_t rng_seed);

inline std::string canonicalize(std::string_view text) {
  return write_canonical(parse(text));
}

}  // namespace polycl

#endif  // POLYCL_SMILES_HPP_
