//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <string>
#include <vector>

#include "forge/molgraph.hpp"

namespace forge {

// One single-cut fragmentation: both fragments carry a [*] attachment atom
// in their canonical strings; heavy-atom counts exclude the wildcard. The
// designated core is the fragment with at least as many heavy atoms, and
// the cut passed the size constraints (variable part <= 13 heavy atoms,
// core at least twice the variable part).
struct CutFragmentation {
  std::string core;
  std::string variable;
  int core_heavy = 0;
  int var_heavy = 0;
};

enum class AcClass { AC = 0, HalfAC = 1, NonAC = 2 };

const char* to_string(AcClass c);

// Potency direction: Left (= 1) means compound i is more active.
enum class PdLabel { Right = 0, Left = 1 };

struct Mmp {
  int i = 0;  // i < j
  int j = 0;
  std::string core;
  std::string var_i;
  std::string var_j;
  AcClass ac_label = AcClass::NonAC;
  PdLabel pd_label = PdLabel::Right;
};

// Cuts every exocyclic single (non-aromatic) bond once, applying the size
// constraints; ring flags must be perceived.
std::vector<CutFragmentation> enumerate_single_cuts(const MolGraph& g);

// Indexes fragmentations by core string and emits one MMP per unordered
// compound pair sharing a core with distinct variable parts no more than
// 8 heavy atoms apart; ambiguity resolves toward the core with the most
// heavy atoms, then the lexicographically smallest string. Activities are
// in -log10 units.
std::vector<Mmp> find_mmps(std::span<const MolGraph> dataset,
                           std::span<const double> activities);

// |d| >= 2 -> AC, |d| <= 1 -> NonAC, otherwise HalfAC (boundaries
// inclusive).
AcClass label_ac(double act_i, double act_j);

// Left iff act_i > act_j; exact ties go Right.
PdLabel label_pd(double act_i, double act_j);

struct CleanedRecord {
  std::string smiles;
  double activity = 0.0;     // raw units, geometric-averaged over duplicates
  size_t source_index = 0;   // first surviving input row of the group
};

struct DroppedRecord {
  size_t index = 0;
  std::string smiles;
  std::string reason;
};

struct CleanResult {
  std::vector<CleanedRecord> records;
  std::vector<DroppedRecord> dropped;
};

// Deduplicates by canonical SMILES: groups whose raw activities span at
// most a factor of 10 collapse to their geometric mean, wider groups are
// dropped, and unparseable or multi-fragment entries are dropped with a
// reason. Raw activities must be positive to survive.
CleanResult clean_dataset(
    std::span<const std::pair<std::string, double>> records);

}  // namespace forge
