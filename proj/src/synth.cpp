//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/synth.hpp"

#include <array>
#include <cmath>
#include <set>

#include "polycl/errors.hpp"
#include "polycl/rng.hpp"
#include "polycl/smiles.hpp"

namespace polycl {
namespace {

// Backbone units. "{R}" marks an optional side-group branch. Backbone rings
// use labels 1-2; side-group rings use 3 so the two never collide.
constexpr std::array<std::string_view, 30> kUnits = {
  "C",
  "CC",
  "C{R}",
  "C{R}{R}",
  "CC{R}",
  "C=C",
  "C(=O)",
  "C(=O)O",
  "C(=O)N",
  "O",
  "N{R}",
  "S",
  "S(=O)(=O)",
  "[Si](C)(C)",
  "[Si](C)(C)O",
  "c1ccc(cc1)",
  "c1cc{R}c(cc1)",
  "c1ccc(s1)",
  "c1ccc(o1)",
  "c1ccc(nc1)",
  "C1CCC(CC1)",
  "C1CC(C1)",
  "c1ccc2cc(ccc2c1)",
  "C#C",
  "OC(=O)",
  "NC(=O)N",
  "C(F)(F)",
  "C(Cl)",
  "CC(C)",
  "COC",
};

constexpr std::array<std::string_view, 22> kSideGroups = {
  "C",
  "CC",
  "CCC",
  "C(C)C",
  "F",
  "Cl",
  "Br",
  "O",
  "OC",
  "N",
  "C#N",
  "C(=O)O",
  "C(=O)OC",
  "C(=O)OCC",
  "c3ccccc3",
  "C(F)(F)F",
  "[N+](=O)[O-]",
  "OC(=O)C",
  "C3CCCCC3",
  "c3ccncc3",
  "S",
  "C=C",
};

std::string fill_unit(std::string_view unit, Rng &rng) {
  std::string out;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    if (unit.substr(i, 3) == "{R}") {
      if (uniform_unit(rng) < 0.5) {
        out += '(';
        out += kSideGroups[uniform_index(rng, kSideGroups.size())];
        out += ')';
      }
      i += 2;
    } else {
      out += unit[i];
    }
  }
  return out;
}

struct Descriptors {
  int heavy = 0;
  int aromatic = 0;
  int unsaturated = 0;  // double + triple bonds
  int halogens = 0;
  int fluorines = 0;
  int carbonyls = 0;
  int nitro = 0;
  int heteroatoms = 0;
  int sulfur = 0;
  int silicon = 0;
  int rings = 0;
};

Descriptors describe(const PolymerGraph &g) {
  Descriptors d;
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atoms()[i];
    if (a.attachment)
      continue;
    ++d.heavy;
    if (a.aromatic)
      ++d.aromatic;
    if (a.element == "F" || a.element == "Cl" || a.element == "Br"
        || a.element == "I")
      ++d.halogens;
    if (a.element == "F")
      ++d.fluorines;
    if (a.element != "C")
      ++d.heteroatoms;
    if (a.element == "S")
      ++d.sulfur;
    if (a.element == "Si")
      ++d.silicon;
    if (a.element == "N" && a.charge == 1)
      ++d.nitro;
  }
  for (const auto &b: g.bonds()) {
    if (b.order == BondOrder::kDouble || b.order == BondOrder::kTriple)
      ++d.unsaturated;
    if (b.order == BondOrder::kDouble) {
      const Atom &x = g.atoms()[b.begin];
      const Atom &y = g.atoms()[b.end];
      if ((x.element == "C" && y.element == "O")
          || (x.element == "O" && y.element == "C"))
        ++d.carbonyls;
    }
  }
  d.rings = g.num_bonds() - g.num_atoms() + 1;
  return d;
}

double gaussian(Rng &rng) {
  // Box-Muller on the portable uniform draw.
  double u1 = uniform_unit(rng);
  double u2 = uniform_unit(rng);
  if (u1 < 1e-300)
    u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

std::vector<std::string> synth_polymers(std::size_t count,
                                        std::uint64_t seed) {
  Rng rng(mix64(seed, 0, 0x5e17));
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > count * 200 + 1000)
      throw DataError("fragment library exhausted before reaching "
                      + std::to_string(count) + " distinct polymers");
    const auto units = 1 + uniform_index(rng, 4);
    std::string s = "[*]";
    for (std::uint64_t k = 0; k < units; ++k)
      s += fill_unit(kUnits[uniform_index(rng, kUnits.size())], rng);
    s += "[*]";
    if (seen.insert(canonicalize(s)).second)
      out.push_back(std::move(s));
  }
  return out;
}

PropertyDataset synth_property_dataset(std::string_view name,
                                       const std::vector<std::string> &smiles,
                                       std::uint64_t seed) {
  PropertyDataset ds;
  ds.name = std::string(name);
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    const Descriptors d = describe(parse(smiles[i]));
    Rng rng(mix64(seed, i, 0x9a0b));
    double value;
    if (name == "toy_gap") {
      value = 7.5 - 0.22 * d.aromatic - 0.55 * d.unsaturated
              + 0.35 * d.fluorines - 0.3 * d.sulfur + 0.4 * d.silicon
              - 0.6 * std::log1p(static_cast<double>(d.rings));
      value += 0.1 * gaussian(rng);
    } else if (name == "toy_affinity") {
      value = 0.4 + 0.09 * d.aromatic + 0.3 * d.halogens + 0.35 * d.carbonyls
              + 0.8 * d.nitro + 0.03 * d.heavy
              + 0.1 * static_cast<double>(d.heteroatoms) / d.heavy;
      value += 0.05 * gaussian(rng);
    } else {
      throw ConfigError("unknown toy property '" + std::string(name) + "'");
    }
    ds.records.push_back({ smiles[i], value });
  }
  return ds;
}

}  // namespace polycl
