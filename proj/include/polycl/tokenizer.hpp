//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_TOKENIZER_HPP_
#define POLYCL_TOKENIZER_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace polycl {

enum class TokenKind : std::uint8_t {
  kAtom,
  kBond,
  kBranchOpen,
  kBranchClose,
  kRingDigit,
  kAttachment,
  kSpecial,
};

// Reserved vocabulary ids. The order is part of the vocabulary file format.
enum class Special : int {
  kPad = 0,
  kCls = 1,
  kSep = 2,
  kMask = 3,
  kUnk = 4,
};

inline constexpr int kNumSpecialTokens = 5;

struct Token {
  TokenKind kind;
  std::string text;

  static Token special(Special s);

  bool is_special() const noexcept { return kind == TokenKind::kSpecial; }

  friend bool operator==(const Token &, const Token &) = default;
  friend auto operator<=>(const Token &, const Token &) = default;
};

using TokenSequence = std::vector<Token>;

// Longest-match lexing of a polymer-SMILES string. Bracket atoms, "[*]",
// two-letter organic atoms (Cl, Br), and "%nn" ring labels are single tokens.
// Throws SyntaxError (with byte offset) on anything outside the grammar.
TokenSequence tokenize(std::string_view text);

// Surface concatenation. MASK renders as "[MASK]"; other specials are
// rejected.
std::string detokenize(const TokenSequence &seq);

bool has_special(const TokenSequence &seq);

std::string_view special_text(Special s);

// Token surface form <-> id table. Ids 0-4 are PAD, CLS, SEP, MASK, UNK.
class Vocabulary {
public:
  // The frozen built-in table (also shipped as data/vocab.txt).
  static const Vocabulary &builtin();

  static Vocabulary from_lines(const std::vector<std::string> &lines);

  // One surface form per line; line number (0-based) is the id.
  static Vocabulary load(const std::filesystem::path &path);

  void save(const std::filesystem::path &path) const;

  int size() const noexcept { return static_cast<int>(tokens_.size()); }

  // Unknown surface forms map to UNK.
  int id(const Token &tok) const;
  int id(std::string_view text) const;

  const std::string &text(int id) const;

  std::vector<int> encode(const TokenSequence &seq) const;

  const std::vector<std::string> &tokens() const noexcept { return tokens_; }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace polycl

#endif  // POLYCL_TOKENIZER_HPP_
