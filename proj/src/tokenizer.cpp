//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/tokenizer.hpp"

#include <array>
#include <fstream>
#include <string>

#include "polycl/errors.hpp"
#include "polycl/smiles.hpp"

namespace polycl {
namespace {

constexpr std::array<std::string_view, kNumSpecialTokens> kSpecialText = {
  "[PAD]", "[CLS]", "[SEP]", "[MASK]", "[UNK]",
};

bool is_organic(char c) {
  switch (c) {
  case 'B':
  case 'C':
  case 'N':
  case 'O':
  case 'P':
  case 'S':
  case 'F':
  case 'I':
  case 'b':
  case 'c':
  case 'n':
  case 'o':
  case 'p':
  case 's':
    return true;
  default:
    return false;
  }
}

bool is_bond(char c) {
  return c == '-' || c == '=' || c == '#' || c == ':' || c == '/'
         || c == '\\';
}

bool is_digit(char c) {
  return c >= '0' && c <= '9';
}

// clang-format off
const std::vector<std::string> &builtin_table() {
  static const std::vector<std::string> table = {
    "[PAD]", "[CLS]", "[SEP]", "[MASK]", "[UNK]",
    "[*]",
    "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I",
    "b", "c", "n", "o", "p", "s",
    "-", "=", "#", ":", "/", "\\",
    "(", ")",
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
    "%10", "%11", "%12", "%13", "%14", "%15", "%16", "%17", "%18", "%19",
    "[nH]", "[NH]", "[NH2]", "[NH+]", "[NH2+]", "[NH3+]", "[N+]", "[N-]",
    "[n+]", "[nH+]", "[n-]", "[O-]", "[O+]", "[OH]", "[S+]", "[S-]", "[s+]",
    "[C-]", "[CH]", "[CH2]", "[C]", "[C@H]", "[C@@H]", "[C@]", "[C@@]",
    "[B-]", "[BH]", "[BH2]", "[BH3-]", "[P+]", "[PH]", "[P@]", "[P@@]",
    "[Si]", "[SiH]", "[SiH2]", "[SiH3]", "[Ge]", "[GeH2]", "[Sn]", "[SnH2]",
    "[Se]", "[se]", "[Te]", "[te]", "[As]", "[as]", "[Sb]", "[Bi]", "[Pb]",
    "[Al]", "[Ti]", "[Zn]", "[Fe]", "[Cu]", "[Pt]", "[Pd]", "[Hg]", "[Cd]",
    "[Ga]", "[In]", "[Na+]", "[K+]", "[Li+]", "[Cl-]", "[Br-]", "[I-]",
    "[F-]", "[2H]", "[13C]", "[H]",
  };
  return table;
}
// clang-format on

}  // namespace

Token Token::special(Special s) {
  return { TokenKind::kSpecial, std::string(special_text(s)) };
}

std::string_view special_text(Special s) {
  return kSpecialText[static_cast<std::size_t>(s)];
}

TokenSequence tokenize(std::string_view text) {
  if (text.empty())
    throw SyntaxError(0, "empty SMILES");

  TokenSequence out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (c == '[') {
      const std::size_t close = text.find(']', i + 1);
      if (close == std::string_view::npos)
        throw SyntaxError(i, "unclosed bracket atom");
      std::string_view body = text.substr(i + 1, close - i - 1);
      if (body.find('[') != std::string_view::npos)
        throw SyntaxError(i, "nested '[' in bracket atom");
      if (body == "*") {
        out.push_back({ TokenKind::kAttachment, "[*]" });
      } else {
        parse_bracket_atom(body, i);
        out.push_back({ TokenKind::kAtom,
                        std::string(text.substr(i, close - i + 1)) });
      }
      i = close + 1;
    } else if (c == 'C' && i + 1 < n && text[i + 1] == 'l') {
      out.push_back({ TokenKind::kAtom, "Cl" });
      i += 2;
    } else if (c == 'B' && i + 1 < n && text[i + 1] == 'r') {
      out.push_back({ TokenKind::kAtom, "Br" });
      i += 2;
    } else if (is_organic(c)) {
      out.push_back({ TokenKind::kAtom, std::string(1, c) });
      ++i;
    } else if (is_bond(c)) {
      out.push_back({ TokenKind::kBond, std::string(1, c) });
      ++i;
    } else if (c == '(') {
      out.push_back({ TokenKind::kBranchOpen, "(" });
      ++i;
    } else if (c == ')') {
      out.push_back({ TokenKind::kBranchClose, ")" });
      ++i;
    } else if (is_digit(c)) {
      out.push_back({ TokenKind::kRingDigit, std::string(1, c) });
      ++i;
    } else if (c == '%') {
      if (i + 2 >= n || !is_digit(text[i + 1]) || !is_digit(text[i + 2]))
        throw SyntaxError(i, "'%' must be followed by two digits");
      out.push_back({ TokenKind::kRingDigit, std::string(text.substr(i, 3)) });
      i += 3;
    } else if (c == '*') {
      throw SyntaxError(i, "bare '*' is not supported; write \"[*]\"");
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw SyntaxError(i, "whitespace in SMILES");
    } else if (c == '.') {
      throw SyntaxError(i, "disconnected structures ('.') are not supported");
    } else if (c == ']') {
      throw SyntaxError(i, "unbalanced ']'");
    } else {
      throw SyntaxError(i, std::string("unknown element or symbol '") + c
                               + "'");
    }
  }
  return out;
}

bool has_special(const TokenSequence &seq) {
  for (const auto &t: seq)
    if (t.is_special())
      return true;
  return false;
}

std::string detokenize(const TokenSequence &seq) {
  std::string out;
  for (const auto &t: seq) {
    if (t.is_special() && t.text != special_text(Special::kMask))
      throw DataError("cannot detokenize special token " + t.text);
    out += t.text;
  }
  return out;
}

const Vocabulary &Vocabulary::builtin() {
  static const Vocabulary vocab = from_lines(builtin_table());
  return vocab;
}

Vocabulary Vocabulary::from_lines(const std::vector<std::string> &lines) {
  if (lines.size() < kNumSpecialTokens)
    throw DataError("vocabulary has fewer than 5 entries");
  Vocabulary v;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto &s = lines[i];
    if (i < kNumSpecialTokens && s != kSpecialText[i])
      throw DataError("vocabulary line " + std::to_string(i + 1)
                      + ": expected " + std::string(kSpecialText[i]));
    if (s.empty())
      throw DataError("vocabulary line " + std::to_string(i + 1)
                      + ": empty token");
    if (!v.index_.emplace(s, static_cast<int>(i)).second)
      throw DataError("vocabulary line " + std::to_string(i + 1)
                      + ": duplicate token " + s);
    v.tokens_.push_back(s);
  }
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open vocabulary file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(line);
  }
  try {
    return from_lines(lines);
  } catch (const DataError &e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void Vocabulary::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write vocabulary file " + path.string());
  for (const auto &t: tokens_)
    out << t << '\n';
}

int Vocabulary::id(std::string_view text) const {
  auto it = index_.find(std::string(text));
  return it == index_.end() ? static_cast<int>(Special::kUnk) : it->second;
}

int Vocabulary::id(const Token &tok) const {
  return id(tok.text);
}

const std::string &Vocabulary::text(int id) const {
  return tokens_.at(static_cast<std::size_t>(id));
}

std::vector<int> Vocabulary::encode(const TokenSequence &seq) const {
  std::vector<int> ids;
  ids.reserve(seq.size());
  for (const auto &t: seq)
    ids.push_back(id(t));
  return ids;
}

}  // namespace polycl
