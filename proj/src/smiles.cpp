//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/smiles.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "polycl/errors.hpp"
#include "polycl/rng.hpp"

namespace polycl {
namespace {

// clang-format off
constexpr std::array<std::string_view, 118> kElements = {
  "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si",
  "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co",
  "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
  "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",
  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy",
  "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au",
  "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",
  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
  "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};
// clang-format on

bool is_element(std::string_view s) {
  return std::find(kElements.begin(), kElements.end(), s) != kElements.end();
}

bool is_digit(char c) {
  return c >= '0' && c <= '9';
}

bool is_lower(char c) {
  return c >= 'a' && c <= 'z';
}

bool is_upper(char c) {
  return c >= 'A' && c <= 'Z';
}

std::string upper_first(std::string_view s) {
  std::string out(s);
  if (!out.empty())
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

BondOrder default_bond(const Atom &a, const Atom &b) {
  return a.aromatic && b.aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
}

struct BondSymbol {
  BondOrder order;
  char stereo;
  std::size_t offset;
};

BondSymbol bond_from_text(char c, std::size_t offset) {
  switch (c) {
  case '-':
    return { BondOrder::kSingle, 0, offset };
  case '=':
    return { BondOrder::kDouble, 0, offset };
  case '#':
    return { BondOrder::kTriple, 0, offset };
  case ':':
    return { BondOrder::kAromatic, 0, offset };
  case '/':
  case '\\':
    return { BondOrder::kSingle, c, offset };
  default:
    throw SyntaxError(offset, std::string("unknown bond symbol '") + c + "'");
  }
}

Atom organic_atom(std::string_view text) {
  Atom a;
  if (is_lower(text[0])) {
    a.aromatic = true;
    a.element = upper_first(text);
  } else {
    a.element = std::string(text);
  }
  return a;
}

int ring_label_value(std::string_view text) {
  if (text.size() == 1)
    return text[0] - '0';
  return (text[1] - '0') * 10 + (text[2] - '0');
}

std::string ring_label_text(int label) {
  if (label < 10)
    return std::string(1, static_cast<char>('0' + label));
  return "%" + std::to_string(label);
}

}  // namespace

bool Atom::same_label(const Atom &o) const noexcept {
  return element == o.element && aromatic == o.aromatic && charge == o.charge
         && hcount == o.hcount && isotope == o.isotope && bracket == o.bracket
         && attachment == o.attachment;
}

int PolymerGraph::add_atom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return num_atoms() - 1;
}

int PolymerGraph::add_bond(int a, int b, BondOrder order, char stereo) {
  if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
    throw DataError("bond endpoint out of range");
  const int idx = num_bonds();
  bonds_.push_back({ a, b, order, stereo });
  adjacency_[a].emplace_back(b, idx);
  adjacency_[b].emplace_back(a, idx);
  return idx;
}

int PolymerGraph::bond_between(int a, int b) const {
  for (auto [nbr, bi]: adjacency_[a])
    if (nbr == b)
      return bi;
  return -1;
}

int PolymerGraph::num_attachments() const noexcept {
  return static_cast<int>(std::count_if(
      atoms_.begin(), atoms_.end(), [](const Atom &a) { return a.attachment; }));
}

int PolymerGraph::num_heavy_atoms() const noexcept {
  return num_atoms() - num_attachments();
}

void PolymerGraph::validate() const {
  if (atoms_.empty())
    throw DataError("graph has no atoms");
  for (const auto &b: bonds_) {
    if (b.begin < 0 || b.end < 0 || b.begin >= num_atoms()
        || b.end >= num_atoms())
      throw DataError("bond endpoint out of range");
    if (b.begin == b.end)
      throw DataError("self-loop on atom " + std::to_string(b.begin));
  }
  for (int i = 0; i < num_atoms(); ++i) {
    std::vector<int> seen;
    for (auto [nbr, bi]: adjacency_[i]) {
      if (std::find(seen.begin(), seen.end(), nbr) != seen.end())
        throw DataError("parallel bonds between atoms " + std::to_string(i)
                        + " and " + std::to_string(nbr));
      seen.push_back(nbr);
    }
    if (atoms_[i].attachment && degree(i) != 1)
      throw DataError("attachment point " + std::to_string(i)
                      + " must have exactly one bond");
  }

  std::vector<char> visited(atoms_.size(), 0);
  std::vector<int> stack { 0 };
  visited[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int a = stack.back();
    stack.pop_back();
    for (auto [nbr, bi]: adjacency_[a]) {
      if (!visited[nbr]) {
        visited[nbr] = 1;
        ++count;
        stack.push_back(nbr);
      }
    }
  }
  if (count != num_atoms())
    throw DataError("graph is not connected");
}

Atom parse_bracket_atom(std::string_view body, std::size_t offset) {
  // Offsets inside the body are reported relative to the whole string.
  auto at = [offset](std::size_t pos) { return offset + 1 + pos; };

  if (body.empty())
    throw SyntaxError(offset, "empty bracket atom");

  Atom a;
  a.bracket = true;
  std::size_t pos = 0;

  while (pos < body.size() && is_digit(body[pos])) {
    a.isotope = a.isotope * 10 + (body[pos] - '0');
    if (a.isotope > 999)
      throw SyntaxError(at(pos), "isotope out of range");
    ++pos;
  }

  if (pos >= body.size())
    throw SyntaxError(at(pos), "missing element symbol");

  const char c = body[pos];
  if (c == '*') {
    throw SyntaxError(at(pos), "attachment point must be written as [*]");
  } else if (is_lower(c)) {
    static constexpr std::array<std::string_view, 3> kTwo = { "se", "as",
                                                              "te" };
    static constexpr std::string_view kOne = "bcnops";
    std::string_view two = body.substr(pos, 2);
    if (std::find(kTwo.begin(), kTwo.end(), two) != kTwo.end()) {
      a.element = upper_first(two);
      pos += 2;
    } else if (kOne.find(c) != std::string_view::npos) {
      a.element = upper_first(body.substr(pos, 1));
      pos += 1;
    } else {
      throw SyntaxError(at(pos), std::string("unknown aromatic element '") + c
                                     + "'");
    }
    a.aromatic = true;
  } else if (is_upper(c)) {
    if (pos + 1 < body.size() && is_lower(body[pos + 1])
        && is_element(body.substr(pos, 2))) {
      a.element = std::string(body.substr(pos, 2));
      pos += 2;
    } else if (is_element(body.substr(pos, 1))) {
      a.element = std::string(body.substr(pos, 1));
      pos += 1;
    } else {
      throw SyntaxError(at(pos), "unknown element in bracket atom");
    }
  } else {
    throw SyntaxError(at(pos), "missing element symbol");
  }

  if (pos < body.size() && body[pos] == '@') {
    ++pos;
    a.chirality = Chirality::kCounterClockwise;
    if (pos < body.size() && body[pos] == '@') {
      ++pos;
      a.chirality = Chirality::kClockwise;
    }
  }

  if (pos < body.size() && body[pos] == 'H') {
    ++pos;
    a.hcount = 1;
    if (pos < body.size() && is_digit(body[pos])) {
      a.hcount = body[pos] - '0';
      ++pos;
    }
  }

  if (pos < body.size() && (body[pos] == '+' || body[pos] == '-')) {
    const char sign = body[pos];
    const int unit = sign == '+' ? 1 : -1;
    ++pos;
    if (pos < body.size() && is_digit(body[pos])) {
      int mag = 0;
      while (pos < body.size() && is_digit(body[pos])) {
        mag = mag * 10 + (body[pos] - '0');
        ++pos;
      }
      if (mag > 15)
        throw SyntaxError(at(pos), "charge out of range");
      a.charge = unit * mag;
    } else {
      a.charge = unit;
      while (pos < body.size() && body[pos] == sign) {
        a.charge += unit;
        ++pos;
      }
    }
  }

  if (pos != body.size())
    throw SyntaxError(at(pos), std::string("unexpected '") + body[pos]
                                   + "' in bracket atom");
  return a;
}

PolymerGraph parse(std::string_view text, ParseOptions opts) {
  const TokenSequence tokens = tokenize(text);

  PolymerGraph g;
  std::vector<std::size_t> atom_offset;

  struct OpenRing {
    int atom;
    std::optional<BondSymbol> bond;
    std::size_t offset;
  };
  struct OpenBranch {
    int atom;
    std::size_t offset;
    int atoms_before;
  };

  std::map<int, OpenRing> rings;
  std::vector<OpenBranch> branches;
  std::optional<BondSymbol> pending;
  int prev = -1;
  std::optional<TokenKind> last;

  auto connect = [&](int a, int b, const std::optional<BondSymbol> &bond) {
    if (bond) {
      g.add_bond(a, b, bond->order, bond->stereo);
    } else {
      g.add_bond(a, b, default_bond(g.atoms()[a], g.atoms()[b]));
    }
  };

  std::size_t offset = 0;
  for (const Token &tok: tokens) {
    switch (tok.kind) {
    case TokenKind::kAtom:
    case TokenKind::kAttachment: {
      Atom atom;
      if (tok.kind == TokenKind::kAttachment) {
        atom.element = "*";
        atom.bracket = true;
        atom.attachment = true;
      } else if (tok.text[0] == '[') {
        atom = parse_bracket_atom(
            std::string_view(tok.text).substr(1, tok.text.size() - 2), offset);
      } else {
        atom = organic_atom(tok.text);
      }
      const int idx = g.add_atom(std::move(atom));
      atom_offset.push_back(offset);
      if (prev >= 0) {
        connect(prev, idx, pending);
      } else if (pending) {
        throw SyntaxError(pending->offset, "bond without a preceding atom");
      }
      pending.reset();
      prev = idx;
      break;
    }
    case TokenKind::kBond:
      if (prev < 0)
        throw SyntaxError(offset, "bond without a preceding atom");
      if (pending)
        throw SyntaxError(offset, "two consecutive bond symbols");
      pending = bond_from_text(tok.text[0], offset);
      break;
    case TokenKind::kBranchOpen:
      if (prev < 0 || !last || *last == TokenKind::kBranchOpen
          || *last == TokenKind::kBond)
        throw SyntaxError(offset, "branch must follow an atom");
      branches.push_back({ prev, offset, g.num_atoms() });
      break;
    case TokenKind::kBranchClose:
      if (branches.empty())
        throw SyntaxError(offset, "unbalanced ')'");
      if (pending)
        throw SyntaxError(pending->offset, "dangling bond before ')'");
      if (branches.back().atoms_before == g.num_atoms())
        throw SyntaxError(branches.back().offset, "empty branch");
      prev = branches.back().atom;
      branches.pop_back();
      break;
    case TokenKind::kRingDigit: {
      if (prev < 0 || !last || *last == TokenKind::kBranchOpen)
        throw SyntaxError(offset, "ring bond label must follow an atom");
      const int label = ring_label_value(tok.text);
      auto it = rings.find(label);
      if (it == rings.end()) {
        rings.emplace(label, OpenRing { prev, pending, offset });
      } else {
        const OpenRing &open = it->second;
        if (open.atom == prev)
          throw SyntaxError(offset, "ring closure to the same atom");
        if (g.bond_between(open.atom, prev) >= 0)
          throw SyntaxError(offset, "ring closure duplicates an existing bond");
        std::optional<BondSymbol> bond = open.bond;
        if (pending) {
          if (bond && bond->order != pending->order)
            throw SyntaxError(offset, "conflicting ring bond symbols");
          bond = pending;
        }
        connect(open.atom, prev, bond);
        rings.erase(it);
      }
      pending.reset();
      break;
    }
    case TokenKind::kSpecial:
      throw SyntaxError(offset, "special token in SMILES");
    }
    last = tok.kind;
    offset += tok.text.size();
  }

  if (pending)
    throw SyntaxError(pending->offset, "dangling bond");
  if (!branches.empty())
    throw SyntaxError(branches.back().offset, "unbalanced '('");
  if (!rings.empty()) {
    auto first = std::min_element(rings.begin(), rings.end(),
                                  [](const auto &x, const auto &y) {
                                    return x.second.offset < y.second.offset;
                                  });
    throw SyntaxError(first->second.offset, "unmatched ring bond label");
  }

  for (int i = 0; i < g.num_atoms(); ++i)
    if (g.atoms()[i].attachment && g.degree(i) != 1)
      throw SyntaxError(atom_offset[i],
                        "attachment point [*] must have exactly one bond");

  if (opts.strict_valence)
    check_valence(g);
  return g;
}

void check_valence(const PolymerGraph &g) {
  static const std::map<std::string, std::vector<int>> kValences = {
    { "B", { 3 } },       { "C", { 4 } },    { "N", { 3, 5 } },
    { "O", { 2 } },       { "P", { 3, 5 } }, { "S", { 2, 4, 6 } },
    { "F", { 1 } },       { "Cl", { 1 } },   { "Br", { 1 } },
    { "I", { 1 } },
  };

  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atoms()[i];
    if (a.attachment)
      continue;
    auto it = kValences.find(a.element);
    if (it == kValences.end())
      continue;

    int valence = a.hcount;
    bool any_aromatic = false;
    for (auto [nbr, bi]: g.neighbors(i)) {
      const BondOrder order = g.bonds()[bi].order;
      if (order == BondOrder::kAromatic) {
        any_aromatic = true;
        valence += 1;
      } else {
        valence += static_cast<int>(order);
      }
    }
    if (any_aromatic && a.element == "C")
      valence += 1;

    int max_valence = it->second.back();
    if (a.charge != 0) {
      if (a.element == "C")
        max_valence = 3;
      else if (a.element == "B" && a.charge < 0)
        max_valence = 4;
      else if (a.element == "N" || a.element == "P" || a.element == "O"
               || a.element == "S")
        max_valence += a.charge > 0 ? 1 : -1;
    }
    if (valence > max_valence)
      throw ValenceError("atom " + std::to_string(i) + " (" + a.element
                         + ") has valence " + std::to_string(valence)
                         + ", maximum " + std::to_string(max_valence));
  }
}

namespace {

std::string atom_symbol(const Atom &a) {
  if (a.attachment)
    return "[*]";
  std::string sym = a.element;
  if (a.aromatic)
    sym[0] = static_cast<char>(sym[0] - 'A' + 'a');
  if (!a.bracket)
    return sym;

  std::string out = "[";
  if (a.isotope > 0)
    out += std::to_string(a.isotope);
  out += sym;
  if (a.hcount > 0) {
    out += 'H';
    if (a.hcount > 1)
      out += std::to_string(a.hcount);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    const int mag = a.charge > 0 ? a.charge : -a.charge;
    if (mag > 1)
      out += std::to_string(mag);
  }
  out += ']';
  return out;
}

std::string bond_symbol(const PolymerGraph &g, const Bond &b) {
  const bool both_aromatic =
      g.atoms()[b.begin].aromatic && g.atoms()[b.end].aromatic;
  switch (b.order) {
  case BondOrder::kSingle:
    return both_aromatic ? "-" : "";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  case BondOrder::kAromatic:
    return both_aromatic ? "" : ":";
  }
  return "";
}

}  // namespace

std::string write_smiles(const PolymerGraph &g, int start,
                         const std::vector<std::vector<int>> &neighbor_order) {
  const int n = g.num_atoms();
  if (start < 0 || start >= n)
    throw DataError("traversal start atom out of range");
  if (static_cast<int>(neighbor_order.size()) != n)
    throw DataError("neighbor order must list every atom");

  // Pass 1: classify bonds into tree edges and ring closures.
  std::vector<int> visit(n, -1);
  std::vector<std::vector<int>> children(n);
  std::vector<char> is_ring_bond(g.num_bonds(), 0);
  std::vector<char> used_bond(g.num_bonds(), 0);
  int counter = 0;

  std::function<void(int)> dfs = [&](int a) {
    visit[a] = counter++;
    for (int nbr: neighbor_order[a]) {
      const int bi = g.bond_between(a, nbr);
      if (bi < 0)
        throw DataError("neighbor order lists a non-neighbor");
      if (used_bond[bi])
        continue;
      used_bond[bi] = 1;
      if (visit[nbr] < 0) {
        children[a].push_back(nbr);
        dfs(nbr);
      } else {
        is_ring_bond[bi] = 1;
      }
    }
  };
  dfs(start);
  if (counter != n)
    throw DataError("graph is not connected");

  // Pass 2: emit.
  std::vector<int> ring_label(g.num_bonds(), -1);
  std::vector<char> label_busy;
  std::string out;

  std::function<void(int)> emit = [&](int a) {
    out += atom_symbol(g.atoms()[a]);

    std::vector<int> to_free;
    for (int nbr: neighbor_order[a]) {
      const int bi = g.bond_between(a, nbr);
      if (!is_ring_bond[bi])
        continue;
      if (visit[nbr] < visit[a]) {
        // closing end
        out += ring_label_text(ring_label[bi]);
        to_free.push_back(ring_label[bi]);
      } else {
        int label = 1;
        while (label < static_cast<int>(label_busy.size()) && label_busy[label])
          ++label;
        if (label >= static_cast<int>(label_busy.size()))
          label_busy.resize(label + 1, 0);
        if (label > 99)
          throw DataError("more than 99 simultaneously open rings");
        label_busy[label] = 1;
        ring_label[bi] = label;
        out += bond_symbol(g, g.bonds()[bi]);
        out += ring_label_text(label);
      }
    }
    for (int label: to_free)
      label_busy[label] = 0;

    const auto &kids = children[a];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const int c = kids[k];
      const bool branch = k + 1 < kids.size();
      if (branch)
        out += '(';
      out += bond_symbol(g, g.bonds()[g.bond_between(a, c)]);
      emit(c);
      if (branch)
        out += ')';
    }
  };
  emit(start);
  return out;
}

std::string enumerate_random(const PolymerGraph &g, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  const int n = g.num_atoms();
  const int start = static_cast<int>(uniform_index(rng, n));
  std::vector<std::vector<int>> order(n);
  for (int a = 0; a < n; ++a) {
    for (auto [nbr, bi]: g.neighbors(a))
      order[a].push_back(nbr);
    shuffle(order[a], rng);
  }
  return write_smiles(g, start, order);
}

}  // namespace polycl
