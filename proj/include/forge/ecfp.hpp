//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "forge/molgraph.hpp"

namespace forge {

// Circular-substructure identifier. Values live in 0..2^32-1; the usual
// 1..2^32 index-set convention maps onto this range with a +1 offset.
using SubstructureId = uint32_t;

// FNV-1a over the little-endian 4-byte encodings of the sequence.
// Bit-exact and platform-independent.
SubstructureId hash32(std::span<const uint32_t> seq);

enum class AtomInvariants { Standard, Pharmacophoric };

struct EnumerationConfig {
  int radius = 2;
  AtomInvariants invariants = AtomInvariants::Standard;
  // Reserved: appends the chirality code to the atom invariant tuple.
  bool use_chirality = false;
};

// One detected circular subgraph: its center, radius and the sorted bond
// indices it covers. bond_set at radius r contains the bond_set of the
// same center at radius r-1.
struct Occurrence {
  int center = 0;
  int radius = 0;
  std::vector<int> bond_set;
};

struct FingerprintSet {
  std::vector<SubstructureId> ids;  // sorted ascending, unique
  std::map<SubstructureId, std::vector<Occurrence>> occurrences;

  bool contains(SubstructureId id) const {
    return occurrences.count(id) != 0;
  }
};

std::vector<SubstructureId> initial_identifiers(const MolGraph& g,
                                                const EnumerationConfig& cfg);

// Full enumeration: initial identifiers, cfg.radius neighborhood-hash
// updates, then structural-duplicate removal.
FingerprintSet enumerate_substructures(const MolGraph& g,
                                       const EnumerationConfig& cfg);

// Enumeration without duplicate removal; every (center, radius) occurrence
// is present.
FingerprintSet enumerate_substructures_raw(const MolGraph& g,
                                           const EnumerationConfig& cfg);

// Drops occurrences covering a circular subgraph another occurrence also
// covers (equal non-empty bond_set, or equal center when the bond_set is
// empty), keeping the smaller (radius, id, center). An id is dropped only
// when all its occurrences are.
FingerprintSet remove_structural_duplicates(const FingerprintSet& fp);

// Line-delimited JSON: {"id": <row>, "fp": [ascending u32 ids]}.
void write_fingerprint_line(std::ostream& os, int64_t row,
                            const FingerprintSet& fp);
std::vector<std::pair<int64_t, std::vector<SubstructureId>>>
read_fingerprint_lines(std::istream& is);

}  // namespace forge
