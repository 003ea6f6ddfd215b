//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "forge/molgraph.hpp"

namespace forge {

enum class ParseErrorKind {
  UnknownSymbol,
  UnbalancedParenthesis,
  UnclosedRing,
  BadBracketAtom,
  ValenceOverflow,
  EmptyInput,
  DisconnectedParts,
};

struct ParseError {
  size_t position = 0;  // 0-based character index into the trimmed input
  ParseErrorKind kind = ParseErrorKind::UnknownSymbol;
};

const char* to_string(ParseErrorKind kind);

class SmilesParseError : public std::runtime_error {
 public:
  SmilesParseError(ParseError err, const std::string& what)
      : std::runtime_error(what), error_(err) {}
  const ParseError& error() const { return error_; }

 private:
  ParseError error_;
};

struct ParseOptions {
  // [*] attachment atoms are an internal notation of the MMP fragmenter;
  // user input rejects them unless this is set.
  bool allow_wildcard = false;
};

// Parses the supported SMILES subset into a hydrogen-depleted molecular
// graph with ring flags perceived. Grammar: organic subset B C N O P S F
// Cl Br I, aromatic b c n o p s, bracket atoms
// [<isotope?><symbol><chirality?><Hn?><charge?>], bonds - = # : / \,
// branches ( ), ring closures 1-9 and %nn. Multi-fragment input ('.') is
// a hard error. Throws SmilesParseError.
MolGraph parse_smiles(std::string_view text, ParseOptions opts = {});

}  // namespace forge
