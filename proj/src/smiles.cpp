//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "forge/common.hpp"

namespace forge {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ParseErrorKind::UnbalancedParenthesis: return "UnbalancedParenthesis";
    case ParseErrorKind::UnclosedRing: return "UnclosedRing";
    case ParseErrorKind::BadBracketAtom: return "BadBracketAtom";
    case ParseErrorKind::ValenceOverflow: return "ValenceOverflow";
    case ParseErrorKind::EmptyInput: return "EmptyInput";
    case ParseErrorKind::DisconnectedParts: return "DisconnectedParts";
  }
  return "UnknownSymbol";
}

namespace {

[[noreturn]] void fail(ParseErrorKind kind, size_t pos) {
  std::ostringstream msg;
  msg << "SMILES parse error: " << to_string(kind) << " at position " << pos;
  throw SmilesParseError(ParseError{pos, kind}, msg.str());
}

int default_valence(uint8_t element) {
  switch (element) {
    case 5: return 3;
    case 6: return 4;
    case 7: return 3;
    case 8: return 2;
    case 15: return 3;
    case 16: return 2;
    case 9:
    case 17:
    case 35:
    case 53: return 1;
    default: return 0;
  }
}

int half_order(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 2;
    case BondOrder::Double: return 4;
    case BondOrder::Triple: return 6;
    case BondOrder::Aromatic: return 3;
  }
  return 2;
}

// Element symbol tables. Two-letter symbols are matched greedily.
struct ElementEntry {
  const char* symbol;
  uint8_t number;
};

constexpr ElementEntry kElements[] = {
    {"He", 2},   {"Li", 3},   {"Be", 4},   {"Ne", 10},  {"Na", 11},
    {"Mg", 12},  {"Al", 13},  {"Si", 14},  {"Cl", 17},  {"Ar", 18},
    {"Ca", 20},  {"Sc", 21},  {"Ti", 22},  {"Cr", 24},  {"Mn", 25},
    {"Fe", 26},  {"Co", 27},  {"Ni", 28},  {"Cu", 29},  {"Zn", 30},
    {"Ga", 31},  {"Ge", 32},  {"As", 33},  {"Se", 34},  {"Br", 35},
    {"Kr", 36},  {"Rb", 37},  {"Sr", 38},  {"Zr", 40},  {"Nb", 41},
    {"Mo", 42},  {"Tc", 43},  {"Ru", 44},  {"Rh", 45},  {"Pd", 46},
    {"Ag", 47},  {"Cd", 48},  {"In", 49},  {"Sn", 50},  {"Sb", 51},
    {"Te", 52},  {"Xe", 54},  {"Cs", 55},  {"Ba", 56},  {"Pt", 78},
    {"Au", 79},  {"Hg", 80},  {"Tl", 81},  {"Pb", 82},  {"Bi", 83},
    {"B", 5},    {"C", 6},    {"N", 7},    {"O", 8},    {"F", 9},
    {"P", 15},   {"S", 16},   {"K", 19},   {"V", 23},   {"Y", 39},
    {"I", 53},   {"W", 74},   {"U", 92},   {"H", 1},
};

struct PendingBond {
  std::optional<BondOrder> order;
  int8_t updown = 0;
};

struct RingEntry {
  int atom;
  PendingBond bond;
  size_t position;
};

class Parser {
 public:
  Parser(std::string_view text, ParseOptions opts)
      : text_(text), opts_(opts) {}

  MolGraph run() {
    if (text_.empty()) fail(ParseErrorKind::EmptyInput, 0);
    while (pos_ < text_.size()) step();
    finish();
    return std::move(graph_);
  }

 private:
  std::string_view text_;
  ParseOptions opts_;
  size_t pos_ = 0;
  MolGraph graph_;
  int prev_atom_ = -1;
  PendingBond pending_;
  std::vector<std::pair<int, size_t>> branch_stack_;  // (atom, '(' position)
  std::map<int, RingEntry> open_rings_;
  std::vector<size_t> atom_pos_;      // token position per atom
  std::vector<bool> from_bracket_;

  size_t last_pos() const { return text_.empty() ? 0 : text_.size() - 1; }

  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const {
    return text_.substr(pos_, s.size()) == s;
  }

  void step() {
    const char c = peek();
    if (std::isspace(static_cast<unsigned char>(c)))
      fail(ParseErrorKind::UnknownSymbol, pos_);
    switch (c) {
      case '.': fail(ParseErrorKind::DisconnectedParts, pos_);
      case '(': open_branch(); return;
      case ')': close_branch(); return;
      case '-': set_bond(BondOrder::Single, 0); return;
      case '=': set_bond(BondOrder::Double, 0); return;
      case '#': set_bond(BondOrder::Triple, 0); return;
      case ':': set_bond(BondOrder::Aromatic, 0); return;
      case '/': set_bond(BondOrder::Single, +1); return;
      case '\\': set_bond(BondOrder::Single, -1); return;
      case '%': ring_two_digit(); return;
      case '[': bracket_atom(); return;
      default: break;
    }
    if (c >= '1' && c <= '9') {
      ring_closure(c - '0', pos_);
      ++pos_;
      return;
    }
    organic_atom();
  }

  void open_branch() {
    if (prev_atom_ < 0 || pending_.order)
      fail(ParseErrorKind::UnknownSymbol, pos_);
    branch_stack_.emplace_back(prev_atom_, pos_);
    ++pos_;
  }

  void close_branch() {
    if (pending_.order) fail(ParseErrorKind::UnknownSymbol, pos_);
    if (branch_stack_.empty())
      fail(ParseErrorKind::UnbalancedParenthesis, pos_);
    prev_atom_ = branch_stack_.back().first;
    branch_stack_.pop_back();
    ++pos_;
  }

  void set_bond(BondOrder order, int8_t updown) {
    if (prev_atom_ < 0 || pending_.order)
      fail(ParseErrorKind::UnknownSymbol, pos_);
    pending_.order = order;
    pending_.updown = updown;
    ++pos_;
  }

  void ring_two_digit() {
    if (pos_ + 2 >= text_.size() ||
        !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
        !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])))
      fail(ParseErrorKind::UnknownSymbol, pos_);
    const int number =
        (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
    ring_closure(number, pos_);
    pos_ += 3;
  }

  void ring_closure(int number, size_t at) {
    if (prev_atom_ < 0) fail(ParseErrorKind::UnknownSymbol, at);
    auto it = open_rings_.find(number);
    if (it == open_rings_.end()) {
      open_rings_[number] = RingEntry{prev_atom_, pending_, at};
      pending_ = {};
      return;
    }
    const RingEntry entry = it->second;
    open_rings_.erase(it);
    if (entry.atom == prev_atom_) fail(ParseErrorKind::UnclosedRing, at);
    BondOrder order;
    if (entry.bond.order && pending_.order) {
      if (*entry.bond.order != *pending_.order)
        fail(ParseErrorKind::UnclosedRing, at);
      order = *pending_.order;
    } else if (entry.bond.order) {
      order = *entry.bond.order;
    } else if (pending_.order) {
      order = *pending_.order;
    } else {
      order = (graph_.atoms[entry.atom].aromatic &&
               graph_.atoms[prev_atom_].aromatic)
                  ? BondOrder::Aromatic
                  : BondOrder::Single;
    }
    int bond = -1;
    try {
      bond = graph_.add_bond(entry.atom, prev_atom_, order);
    } catch (const ValidationError&) {
      fail(ParseErrorKind::UnclosedRing, at);  // duplicate ring bond
    }
    graph_.bonds[bond].updown =
        pending_.updown ? pending_.updown : entry.bond.updown;
    pending_ = {};
  }

  void attach(int atom, size_t at, bool bracket) {
    atom_pos_.push_back(at);
    from_bracket_.push_back(bracket);
    if (prev_atom_ >= 0) {
      BondOrder order;
      if (pending_.order) {
        order = *pending_.order;
      } else {
        order = (graph_.atoms[prev_atom_].aromatic &&
                 graph_.atoms[atom].aromatic)
                    ? BondOrder::Aromatic
                    : BondOrder::Single;
      }
      const int bond = graph_.add_bond(prev_atom_, atom, order);
      graph_.bonds[bond].updown = pending_.updown;
    }
    pending_ = {};
    prev_atom_ = atom;
  }

  void organic_atom() {
    const size_t at = pos_;
    Atom atom;
    if (starts_with("Cl")) {
      atom.element = 17;
      pos_ += 2;
    } else if (starts_with("Br")) {
      atom.element = 35;
      pos_ += 2;
    } else {
      const char c = peek();
      switch (c) {
        case 'B': atom.element = 5; break;
        case 'C': atom.element = 6; break;
        case 'N': atom.element = 7; break;
        case 'O': atom.element = 8; break;
        case 'P': atom.element = 15; break;
        case 'S': atom.element = 16; break;
        case 'F': atom.element = 9; break;
        case 'I': atom.element = 53; break;
        case 'b': atom.element = 5; atom.aromatic = true; break;
        case 'c': atom.element = 6; atom.aromatic = true; break;
        case 'n': atom.element = 7; atom.aromatic = true; break;
        case 'o': atom.element = 8; atom.aromatic = true; break;
        case 'p': atom.element = 15; atom.aromatic = true; break;
        case 's': atom.element = 16; atom.aromatic = true; break;
        default: fail(ParseErrorKind::UnknownSymbol, pos_);
      }
      ++pos_;
    }
    attach(graph_.add_atom(atom), at, /*bracket=*/false);
  }

  void bracket_atom() {
    const size_t open = pos_;
    ++pos_;
    Atom atom;

    std::optional<uint16_t> isotope;
    size_t digits = 0;
    uint32_t iso = 0;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(peek())) && digits < 3) {
      iso = iso * 10 + (peek() - '0');
      ++digits;
      ++pos_;
    }
    if (digits > 0) isotope = static_cast<uint16_t>(iso);
    if (pos_ >= text_.size()) fail(ParseErrorKind::BadBracketAtom, open);

    if (peek() == '*') {
      if (!opts_.allow_wildcard) fail(ParseErrorKind::BadBracketAtom, pos_);
      atom.element = 0;
      ++pos_;
    } else if (std::islower(static_cast<unsigned char>(peek()))) {
      switch (peek()) {
        case 'b': atom.element = 5; break;
        case 'c': atom.element = 6; break;
        case 'n': atom.element = 7; break;
        case 'o': atom.element = 8; break;
        case 'p': atom.element = 15; break;
        case 's': atom.element = 16; break;
        default: fail(ParseErrorKind::BadBracketAtom, pos_);
      }
      atom.aromatic = true;
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(peek()))) {
      uint8_t element = 0;
      for (const auto& e : kElements) {
        if (starts_with(e.symbol)) {
          element = e.number;
          pos_ += std::string_view(e.symbol).size();
          break;
        }
      }
      if (element == 0) fail(ParseErrorKind::BadBracketAtom, pos_);
      // The graph is hydrogen-depleted; a bracketed hydrogen atom has no
      // representation in it.
      if (element == 1) fail(ParseErrorKind::BadBracketAtom, open);
      atom.element = element;
    } else {
      fail(ParseErrorKind::BadBracketAtom, pos_);
    }

    atom.isotope = isotope;

    if (pos_ < text_.size() && peek() == '@') {
      ++pos_;
      if (pos_ < text_.size() && peek() == '@') {
        atom.stereo = Chirality::CW;
        ++pos_;
      } else {
        atom.stereo = Chirality::CCW;
      }
    }

    if (pos_ < text_.size() && peek() == 'H') {
      ++pos_;
      uint32_t h = 1;
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(peek()))) {
        h = peek() - '0';
        ++pos_;
      }
      if (h > 8) fail(ParseErrorKind::BadBracketAtom, open);
      atom.h_count = static_cast<uint8_t>(h);
    }

    if (pos_ < text_.size() && (peek() == '+' || peek() == '-')) {
      const char sign = peek();
      ++pos_;
      int magnitude = 1;
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = peek() - '0';
        ++pos_;
      } else {
        while (pos_ < text_.size() && peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      if (magnitude > 4) fail(ParseErrorKind::BadBracketAtom, open);
      atom.formal_charge =
          static_cast<int8_t>(sign == '+' ? magnitude : -magnitude);
    }

    if (pos_ >= text_.size() || peek() != ']')
      fail(ParseErrorKind::BadBracketAtom, open);
    ++pos_;
    attach(graph_.add_atom(atom), open, /*bracket=*/true);
  }

  void finish() {
    if (pending_.order) fail(ParseErrorKind::UnknownSymbol, last_pos());
    if (!branch_stack_.empty())
      fail(ParseErrorKind::UnbalancedParenthesis, branch_stack_.back().second);
    if (!open_rings_.empty()) {
      size_t earliest = text_.size();
      for (const auto& [number, entry] : open_rings_)
        earliest = std::min(earliest, entry.position);
      fail(ParseErrorKind::UnclosedRing, earliest);
    }
    if (graph_.atom_count() == 0)
      fail(ParseErrorKind::UnknownSymbol, 0);

    // Implicit hydrogens for bare organic-subset atoms; aromatic bonds
    // count 1.5 toward used valence and the count clamps at zero (fused
    // aromatics exceed the nominal valence by half a unit). Overflow is an
    // error only when the number of explicit neighbors alone exceeds the
    // default valence.
    for (int v = 0; v < graph_.atom_count(); ++v) {
      if (from_bracket_[v]) continue;
      int half_sum = 0;
      for (const auto& [nbr, bond] : graph_.neighbors(v)) {
        (void)nbr;
        half_sum += half_order(graph_.bonds[bond].order);
      }
      const int used = (half_sum + 1) / 2;
      const int valence = default_valence(graph_.atoms[v].element);
      if (graph_.degree(v) > valence)
        fail(ParseErrorKind::ValenceOverflow, atom_pos_[v]);
      graph_.atoms[v].h_count =
          static_cast<uint8_t>(std::max(0, valence - used));
    }
    perceive_rings(graph_);
  }
};

}  // namespace

MolGraph parse_smiles(std::string_view text, ParseOptions opts) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end &&
         std::isspace(static_cast<unsigned char>(text[begin])))
    ++begin;
  while (end > begin &&
         std::isspace(static_cast<unsigned char>(text[end - 1])))
    --end;
  return Parser(text.substr(begin, end - begin), opts).run();
}

}  // namespace forge
