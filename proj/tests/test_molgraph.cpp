//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/molgraph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "forge/common.hpp"
#include "forge/smiles.hpp"

using namespace forge;

namespace {

// Brute-force cycle membership: a bond lies on a cycle iff removing it
// leaves its endpoints connected.
bool on_cycle(const MolGraph& g, int bond) {
  const int skip = bond;
  std::vector<bool> seen(g.atom_count(), false);
  std::vector<int> stack{g.bonds[bond].a};
  seen[g.bonds[bond].a] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& [nbr, b] : g.neighbors(v)) {
      if (b == skip || seen[nbr]) continue;
      seen[nbr] = true;
      stack.push_back(nbr);
    }
  }
  return seen[g.bonds[bond].b];
}

// Writes the molecule with a random atom order, producing an equivalent
// but differently laid-out SMILES string.
std::string random_rewrite(const MolGraph& g, Xoshiro256& rng) {
  std::vector<int> order(g.atom_count());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return write_smiles(g, order);
}

}  // namespace

TEST_CASE("ring flags on a chain and a substituted ring") {
  const MolGraph chain = parse_smiles("CCC");
  for (const auto& b : chain.bonds) CHECK_FALSE(b.in_ring);

  const MolGraph ring = parse_smiles("C1CC1C");
  int ring_bonds = 0;
  for (const auto& b : ring.bonds) ring_bonds += b.in_ring;
  CHECK(ring_bonds == 3);
  int ring_atoms = 0;
  for (int v = 0; v < ring.atom_count(); ++v) ring_atoms += ring.ring_atom[v];
  CHECK(ring_atoms == 3);
}

TEST_CASE("ring flags match brute-force cycle membership on small graphs") {
  const char* corpus[] = {
      "CCC",     "C1CC1",     "C1CC1C",   "C1CCC1",    "C1CC2CCC12",
      "CC(C)C",  "C1CCCCC1",  "CC1CC1C",  "C12CC1C2",  "OC1CC1",
  };
  for (const char* s : corpus) {
    const MolGraph g = parse_smiles(s);
    for (int b = 0; b < g.bond_count(); ++b)
      CHECK_MESSAGE(g.bonds[b].in_ring == on_cycle(g, b), s);
  }
}

TEST_CASE("standard invariant reads off the atom environment") {
  const MolGraph g = parse_smiles("CCO");
  CHECK(standard_invariant(g, 1) ==
        std::array<uint32_t, 6>{6, 2, 2, 4, 0, 0});
  CHECK(standard_invariant(g, 2) ==
        std::array<uint32_t, 6>{8, 1, 1, 4, 0, 0});

  const MolGraph ring = parse_smiles("C1CC1");
  CHECK(standard_invariant(ring, 0) ==
        std::array<uint32_t, 6>{6, 2, 2, 4, 0, 1});
}

TEST_CASE("pharmacophoric invariant bits") {
  const MolGraph ethanol = parse_smiles("CCO");
  CHECK(pharmacophoric_invariant(ethanol, 2) ==
        std::array<uint32_t, 6>{1, 1, 0, 0, 0, 0});

  const MolGraph chloride = parse_smiles("CCl");
  CHECK(pharmacophoric_invariant(chloride, 1) ==
        std::array<uint32_t, 6>{0, 0, 0, 0, 0, 1});

  const MolGraph benzene = parse_smiles("c1ccccc1");
  CHECK(pharmacophoric_invariant(benzene, 0) ==
        std::array<uint32_t, 6>{0, 0, 0, 0, 1, 0});

  // Carboxylic acid: the hydroxyl oxygen is negatively ionisable.
  const MolGraph acid = parse_smiles("CC(=O)O");
  CHECK(pharmacophoric_invariant(acid, 3)[2] == 1);
  CHECK(pharmacophoric_invariant(acid, 2)[2] == 0);

  // Aliphatic amine nitrogen is positively ionisable; nitrile is not.
  const MolGraph amine = parse_smiles("CCN");
  CHECK(pharmacophoric_invariant(amine, 2)[3] == 1);
  const MolGraph nitrile = parse_smiles("CC#N");
  CHECK(pharmacophoric_invariant(nitrile, 2)[3] == 0);
}

TEST_CASE("canonical smiles is stable across input atom orders") {
  CHECK(canonical_smiles(parse_smiles("OCC")) ==
        canonical_smiles(parse_smiles("CCO")));
  CHECK(canonical_smiles(parse_smiles("C(C)O")) ==
        canonical_smiles(parse_smiles("CCO")));

  // Every relabeling of the cyclopropane ring collapses to one string.
  const MolGraph ring = parse_smiles("C1CC1");
  std::set<std::string> outputs;
  std::vector<int> perm{0, 1, 2};
  do {
    outputs.insert(write_smiles(ring, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::set<std::string> canon;
  for (const auto& s : outputs) canon.insert(canonical_smiles(parse_smiles(s)));
  CHECK(canon.size() == 1);
}

TEST_CASE("canonical smiles distinguishes distinct molecules") {
  const char* molecules[] = {
      "CCO", "CCN", "CCC", "CC=O", "C1CC1", "c1ccccc1", "CC(C)O", "COC",
  };
  std::set<std::string> outputs;
  for (const char* s : molecules) outputs.insert(canonical_smiles(parse_smiles(s)));
  CHECK(outputs.size() == 8);
}

TEST_CASE("canonical smiles survives randomized relabeling of a corpus") {
  const char* corpus[] = {
      "CC(C)CC",     "c1ccccc1CC",  "CC(=O)NC",   "C1CCC(O)C1",
      "N#Cc1ccccc1", "OCC(O)CO",    "CC(C)(C)C",  "c1ccc2ccccc2c1",
      "CC1CCC1",     "[O-]C(=O)CC", "CSC",         "FC(F)F",
  };
  Xoshiro256 rng(7);
  for (const char* s : corpus) {
    const MolGraph g = parse_smiles(s);
    const std::string expected = canonical_smiles(g);
    for (int trial = 0; trial < 20; ++trial) {
      const std::string rewritten = random_rewrite(g, rng);
      const MolGraph h = parse_smiles(rewritten);
      CHECK_MESSAGE(canonical_smiles(h) == expected, s, " via ", rewritten);
    }
  }
}

TEST_CASE("invariants are invariant under relabeling") {
  Xoshiro256 rng(11);
  const char* corpus[] = {"CC(C)CO", "c1ccncc1", "CC(=O)O", "C1CC1Cl"};
  for (const char* s : corpus) {
    const MolGraph g = parse_smiles(s);
    std::multiset<std::array<uint32_t, 6>> std_ref, pharm_ref;
    for (int v = 0; v < g.atom_count(); ++v) {
      std_ref.insert(standard_invariant(g, v));
      pharm_ref.insert(pharmacophoric_invariant(g, v));
    }
    for (int trial = 0; trial < 10; ++trial) {
      const MolGraph h = parse_smiles(random_rewrite(g, rng));
      std::multiset<std::array<uint32_t, 6>> std_got, pharm_got;
      for (int v = 0; v < h.atom_count(); ++v) {
        std_got.insert(standard_invariant(h, v));
        pharm_got.insert(pharmacophoric_invariant(h, v));
      }
      CHECK(std_got == std_ref);
      CHECK(pharm_got == pharm_ref);
    }
  }
}

TEST_CASE("canonical ranks are bijective") {
  const char* corpus[] = {"CCO", "C1CC1", "c1ccccc1", "CC(C)(C)C"};
  for (const char* s : corpus) {
    const MolGraph g = parse_smiles(s);
    std::vector<int> ranks = canonical_ranks(g);
    std::sort(ranks.begin(), ranks.end());
    for (int i = 0; i < g.atom_count(); ++i) CHECK(ranks[i] == i);
  }
}
