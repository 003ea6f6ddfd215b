//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace forge {

enum class BondOrder : uint8_t {
  Single = 1,
  Double = 2,
  Triple = 3,
  Aromatic = 4,
};

enum class Chirality : uint8_t { None = 0, CW = 1, CCW = 2 };

// Element 0 is the wildcard attachment atom used by MMP fragmentation;
// it never appears in parsed user input.
struct Atom {
  uint8_t element = 6;
  int8_t formal_charge = 0;
  uint8_t h_count = 0;
  bool aromatic = false;
  std::optional<uint16_t> isotope;
  Chirality stereo = Chirality::None;
};

// updown records a '/' (+1) or '\' (-1) marker seen on the bond; it is
// stored but takes no part in any invariant.
struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
  bool in_ring = false;
  int8_t updown = 0;
};

// Hydrogen-depleted molecular graph. Connected, undirected, no self-loops,
// no duplicate bonds. Ring flags are valid once perceive_rings has run
// (the parser and the fragmenter both do this before returning a graph).
class MolGraph {
 public:
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<bool> ring_atom;

  int add_atom(Atom a);
  // Throws ValidationError on self-loops or duplicate bonds.
  int add_bond(int a, int b, BondOrder order);

  int atom_count() const { return static_cast<int>(atoms.size()); }
  int bond_count() const { return static_cast<int>(bonds.size()); }
  int heavy_atom_count() const;

  // (neighbor atom index, bond index) pairs.
  const std::vector<std::pair<int, int>>& neighbors(int atom) const {
    return adj_[atom];
  }
  int degree(int atom) const { return static_cast<int>(adj_[atom].size()); }
  bool connected() const;

 private:
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

// Marks every bond that lies on a cycle (= is not a bridge) and every atom
// incident to such a bond.
void perceive_rings(MolGraph& g);

// (atomic number, heavy-atom degree, h_count, formal_charge + 4,
//  isotope or 0, in-ring flag)
std::array<uint32_t, 6> standard_invariant(const MolGraph& g, int atom);

// (H-bond acceptor, H-bond donor, negatively ionisable,
//  positively ionisable, aromatic, halogen), each 0/1
std::array<uint32_t, 6> pharmacophoric_invariant(const MolGraph& g, int atom);

// Bijective rank per atom, 0..n-1, canonical under relabeling for graphs
// that iterated neighborhood refinement can distinguish. Ties surviving
// refinement are broken by distinguishing the smallest current index in the
// lowest tied rank class, then re-refining.
std::vector<int> canonical_ranks(const MolGraph& g);

// Deterministic SMILES writer driven by an arbitrary bijective atom order;
// canonical_smiles() uses canonical_ranks. Stereo markers are not emitted.
std::string write_smiles(const MolGraph& g, const std::vector<int>& ranks);
std::string canonical_smiles(const MolGraph& g);

}  // namespace forge
