//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retro/molgraph.h"

namespace retro {
namespace {

struct PendingBond {
  BondOrder order = BondOrder::kSingle;
  BondStereo stereo = BondStereo::kNone;
  std::size_t offset = 0;
};

struct RingOpening {
  int atom = -1;
  std::optional<PendingBond> bond;
  std::size_t offset = 0;
};

BondStereo flip(BondStereo s) {
  switch (s) {
  case BondStereo::kUp:
    return BondStereo::kDown;
  case BondStereo::kDown:
    return BondStereo::kUp;
  default:
    return BondStereo::kNone;
  }
}

bool is_upper(char c) {
  return c >= 'A' && c <= 'Z';
}
bool is_lower(char c) {
  return c >= 'a' && c <= 'z';
}
bool is_digit(char c) {
  return c >= '0' && c <= '9';
}

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text): text_(text) { }

  MolGraph run() {
    if (text_.empty())
      throw ParseError("empty SMILES", 0);

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      switch (c) {
      case '(':
        open_branch();
        break;
      case ')':
        close_branch();
        break;
      case '.':
        dot();
        break;
      case '-':
      case '=':
      case '#':
      case ':':
      case '/':
      case '\\':
        bond_symbol(c);
        break;
      case '%':
      case '0':
      case '1':
      case '2':
      case '3':
      case '4':
      case '5':
      case '6':
      case '7':
      case '8':
      case '9':
        ring_bond();
        break;
      case '[':
        bracket_atom();
        break;
      default:
        organic_atom();
        break;
      }
    }

    if (pending_)
      throw ParseError("dangling bond at end of input", pending_->offset);
    if (!branches_.empty())
      throw ParseError("unbalanced parenthesis", branches_.back().offset);
    for (const RingOpening &r: rings_) {
      if (r.atom >= 0)
        throw ParseError("unclosed ring bond", r.offset);
    }
    if (prev_ < 0)
      throw ParseError("trailing '.'", text_.size());

    return { std::move(atoms_), std::move(bonds_) };
  }

private:
  struct Branch {
    int atom;
    std::size_t atoms_at_open;
    std::size_t offset;
  };

  void open_branch() {
    if (prev_ < 0)
      throw ParseError("branch without a preceding atom", pos_);
    if (pending_)
      throw ParseError("bond symbol before '('", pending_->offset);
    branches_.push_back({ prev_, atoms_.size(), pos_ });
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty())
      throw ParseError("unbalanced parenthesis", pos_);
    if (pending_)
      throw ParseError("dangling bond before ')'", pending_->offset);
    if (branches_.back().atoms_at_open == atoms_.size())
      throw ParseError("empty branch", pos_);
    prev_ = branches_.back().atom;
    branches_.pop_back();
    ++pos_;
  }

  void dot() {
    if (pending_)
      throw ParseError("bond symbol before '.'", pending_->offset);
    if (prev_ < 0)
      throw ParseError("misplaced '.'", pos_);
    if (!branches_.empty())
      throw ParseError("'.' inside a branch", pos_);
    prev_ = -1;
    ++pos_;
  }

  void bond_symbol(char c) {
    if (prev_ < 0)
      throw ParseError("bond without a preceding atom", pos_);
    if (pending_)
      throw ParseError("consecutive bond symbols", pos_);
    PendingBond b;
    b.offset = pos_;
    switch (c) {
    case '=':
      b.order = BondOrder::kDouble;
      break;
    case '#':
      b.order = BondOrder::kTriple;
      break;
    case ':':
      b.order = BondOrder::kAromatic;
      break;
    case '/':
      b.stereo = BondStereo::kUp;
      break;
    case '\\':
      b.stereo = BondStereo::kDown;
      break;
    default:
      break;
    }
    pending_ = b;
    ++pos_;
  }

  void ring_bond() {
    const std::size_t start = pos_;
    if (prev_ < 0)
      throw ParseError("ring bond without a preceding atom", pos_);
    int number;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !is_digit(text_[pos_ + 1])
          || !is_digit(text_[pos_ + 2]))
        throw ParseError("'%' must be followed by two digits", pos_);
      number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      number = text_[pos_] - '0';
      ++pos_;
    }

    RingOpening &slot = rings_[number];
    if (slot.atom < 0) {
      slot.atom = prev_;
      slot.bond = pending_;
      slot.offset = start;
      pending_.reset();
      return;
    }

    const int partner = slot.atom;
    if (partner == prev_)
      throw ParseError("ring bond closes on its own atom", start);

    Bond bond { partner, prev_, BondOrder::kSingle, BondStereo::kNone };
    if (slot.bond && pending_) {
      if (slot.bond->order != pending_->order)
        throw ParseError("conflicting ring bond orders", start);
      bond.order = slot.bond->order;
      bond.stereo = slot.bond->stereo;
    } else if (slot.bond) {
      bond.order = slot.bond->order;
      bond.stereo = slot.bond->stereo;
    } else if (pending_) {
      // Written at the closing atom: direction runs closer -> opener.
      bond.order = pending_->order;
      bond.stereo = flip(pending_->stereo);
    } else {
      bond.order = implicit_order(partner, prev_);
    }
    add_bond(bond, start);
    slot = RingOpening {};
    pending_.reset();
  }

  BondOrder implicit_order(int a, int b) const {
    return atoms_[a].aromatic && atoms_[b].aromatic ? BondOrder::kAromatic
                                                    : BondOrder::kSingle;
  }

  void add_bond(const Bond &bond, std::size_t offset) {
    for (const Bond &b: bonds_) {
      if ((b.begin == bond.begin && b.end == bond.end)
          || (b.begin == bond.end && b.end == bond.begin))
        throw ParseError("duplicate bond", offset);
    }
    bonds_.push_back(bond);
  }

  void attach(int idx) {
    if (prev_ >= 0) {
      Bond bond { prev_, idx, BondOrder::kSingle, BondStereo::kNone };
      if (pending_) {
        bond.order = pending_->order;
        bond.stereo = pending_->stereo;
      } else {
        bond.order = implicit_order(prev_, idx);
      }
      bonds_.push_back(bond);
    } else if (pending_) {
      throw ParseError("bond without a preceding atom", pending_->offset);
    }
    pending_.reset();
    prev_ = idx;
  }

  void organic_atom() {
    const std::size_t start = pos_;
    Atom atom;
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    std::size_t len = 1;
    switch (c) {
    case 'B':
      if (next == 'r') {
        atom.atomic_number = 35;
        len = 2;
      } else {
        atom.atomic_number = 5;
      }
      break;
    case 'C':
      if (next == 'l') {
        atom.atomic_number = 17;
        len = 2;
      } else {
        atom.atomic_number = 6;
      }
      break;
    case 'N':
      atom.atomic_number = 7;
      break;
    case 'O':
      atom.atomic_number = 8;
      break;
    case 'P':
      atom.atomic_number = 15;
      break;
    case 'S':
      atom.atomic_number = 16;
      break;
    case 'F':
      atom.atomic_number = 9;
      break;
    case 'I':
      atom.atomic_number = 53;
      break;
    case '*':
      atom.atomic_number = 0;
      break;
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's': {
      static constexpr std::string_view kAromatic = "bcnops";
      static constexpr std::array<std::uint8_t, 6> kNumbers = { 5,  6,  7,
                                                                8, 15, 16 };
      atom.atomic_number = kNumbers[kAromatic.find(c)];
      atom.aromatic = true;
      break;
    }
    default:
      throw ParseError(is_upper(c) || is_lower(c) ? "unknown element"
                                                  : "unexpected character",
                       start);
    }
    pos_ += len;
    atoms_.push_back(atom);
    attach(static_cast<int>(atoms_.size()) - 1);
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_; // '['
    Atom atom;

    if (pos_ < text_.size() && is_digit(text_[pos_])) {
      int iso = 0;
      int ndigits = 0;
      while (pos_ < text_.size() && is_digit(text_[pos_])) {
        if (++ndigits > 3)
          throw ParseError("isotope too long", pos_);
        iso = iso * 10 + (text_[pos_] - '0');
        ++pos_;
      }
      atom.isotope = iso;
    }

    parse_bracket_symbol(atom);
    parse_chirality(atom);

    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      int h = 1;
      if (pos_ < text_.size() && is_digit(text_[pos_])) {
        h = text_[pos_] - '0';
        ++pos_;
        if (pos_ < text_.size() && is_digit(text_[pos_]))
          throw ParseError("hydrogen count too large", pos_);
      }
      atom.hydrogens = static_cast<std::uint8_t>(h);
    }

    parse_charge(atom);

    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      if (pos_ >= text_.size() || !is_digit(text_[pos_]))
        throw ParseError("atom class requires digits", pos_);
      int ndigits = 0;
      while (pos_ < text_.size() && is_digit(text_[pos_])) {
        if (++ndigits > 6)
          throw ParseError("atom class too long", pos_);
        ++pos_;
      }
    }

    if (pos_ >= text_.size())
      throw ParseError("unterminated bracket atom", start);
    if (text_[pos_] != ']')
      throw ParseError("unexpected character in bracket atom", pos_);
    ++pos_;

    atoms_.push_back(atom);
    attach(static_cast<int>(atoms_.size()) - 1);
  }

  void parse_bracket_symbol(Atom &atom) {
    if (pos_ >= text_.size())
      throw ParseError("unterminated bracket atom", pos_);
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';

    if (c == '*') {
      atom.atomic_number = 0;
      ++pos_;
      return;
    }

    if (is_upper(c)) {
      if (is_lower(next)) {
        const char two[2] = { c, next };
        int z = atomic_number_of(std::string_view(two, 2));
        if (z > 0) {
          atom.atomic_number = static_cast<std::uint8_t>(z);
          pos_ += 2;
          return;
        }
      }
      int z = atomic_number_of(std::string_view(&c, 1));
      if (z <= 0)
        throw ParseError("unknown element", pos_);
      atom.atomic_number = static_cast<std::uint8_t>(z);
      ++pos_;
      return;
    }

    if (is_lower(c)) {
      if (next == 'e' && c == 's') {
        atom.atomic_number = 34;
      } else if (next == 's' && c == 'a') {
        atom.atomic_number = 33;
      } else if (next == 'e' && c == 't') {
        atom.atomic_number = 52;
      } else {
        static constexpr std::string_view kAromatic = "bcnops";
        static constexpr std::array<std::uint8_t, 6> kNumbers = { 5,  6,  7,
                                                                  8, 15, 16 };
        std::size_t i = kAromatic.find(c);
        if (i == std::string_view::npos)
          throw ParseError("unknown element", pos_);
        atom.atomic_number = kNumbers[i];
        atom.aromatic = true;
        ++pos_;
        return;
      }
      atom.aromatic = true;
      pos_ += 2;
      return;
    }

    throw ParseError("expected element symbol", pos_);
  }

  void parse_chirality(Atom &atom) {
    if (pos_ >= text_.size() || text_[pos_] != '@')
      return;
    const std::size_t start = pos_;
    std::string tag = "@";
    ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '@') {
      tag = "@@";
      ++pos_;
    } else if (pos_ + 1 < text_.size() && is_upper(text_[pos_])
               && is_upper(text_[pos_ + 1])) {
      tag.append(text_.substr(pos_, 2));
      pos_ += 2;
      int ndigits = 0;
      while (pos_ < text_.size() && is_digit(text_[pos_]) && ndigits < 2) {
        tag.push_back(text_[pos_]);
        ++pos_;
        ++ndigits;
      }
    }
    auto tags = chirality_tags();
    for (std::size_t i = 1; i < tags.size(); ++i) {
      if (tags[i] == tag) {
        atom.chirality = static_cast<std::uint8_t>(i);
        return;
      }
    }
    throw ParseError("unknown chirality tag", start);
  }

  void parse_charge(Atom &atom) {
    if (pos_ >= text_.size())
      return;
    const char sign = text_[pos_];
    if (sign != '+' && sign != '-')
      return;
    const std::size_t start = pos_;
    ++pos_;
    int magnitude = 1;
    if (pos_ < text_.size() && is_digit(text_[pos_])) {
      magnitude = text_[pos_] - '0';
      ++pos_;
      if (pos_ < text_.size() && is_digit(text_[pos_])) {
        magnitude = magnitude * 10 + (text_[pos_] - '0');
        ++pos_;
      }
    } else {
      while (pos_ < text_.size() && text_[pos_] == sign) {
        ++magnitude;
        ++pos_;
      }
    }
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
      throw ParseError("invalid charge syntax", pos_);
    if (magnitude > 15)
      throw ParseError("invalid charge syntax", start);
    atom.charge = static_cast<std::int8_t>(sign == '+' ? magnitude
                                                       : -magnitude);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<Branch> branches_;
  std::array<RingOpening, 100> rings_ {};
};

} // namespace

MolGraph parse_smiles(std::string_view text) {
  return SmilesParser(text).run();
}

std::optional<CanonicalKey> try_canonicalize(std::string_view smiles) {
  try {
    return canonicalize(smiles);
  } catch (const ParseError &) {
    return std::nullopt;
  }
}

CanonicalKey canonicalize(std::string_view smiles) {
  return canonical_key(parse_smiles(smiles));
}

} // namespace retro
