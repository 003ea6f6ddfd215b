//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/ecfp.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "forge/common.hpp"
#include "forge/smiles.hpp"

using namespace forge;

namespace {

std::set<std::vector<int>> bfs_oracle_bond_sets(const MolGraph& g,
                                                int max_radius) {
  // Independent expansion of the circular-subgraph recursion:
  // A_0 = {a}, B_0 = {}; A_r/B_r grow by the neighborhoods of A_{r-1}.
  std::set<std::vector<int>> sets;
  for (int center = 0; center < g.atom_count(); ++center) {
    std::set<int> atoms{center};
    std::set<int> bonds;
    for (int r = 1; r <= max_radius; ++r) {
      const std::set<int> frontier = atoms;
      for (int v : frontier) {
        for (const auto& [nbr, bond] : g.neighbors(v)) {
          atoms.insert(nbr);
          bonds.insert(bond);
        }
      }
      if (!bonds.empty())
        sets.insert(std::vector<int>(bonds.begin(), bonds.end()));
    }
  }
  return sets;
}

std::set<std::vector<int>> retained_bond_sets(const FingerprintSet& fp) {
  std::set<std::vector<int>> sets;
  for (const auto& [id, occs] : fp.occurrences) {
    (void)id;
    for (const auto& occ : occs)
      if (!occ.bond_set.empty()) sets.insert(occ.bond_set);
  }
  return sets;
}

int radius0_occurrences(const FingerprintSet& fp) {
  int n = 0;
  for (const auto& [id, occs] : fp.occurrences) {
    (void)id;
    for (const auto& occ : occs) n += occ.radius == 0;
  }
  return n;
}

}  // namespace

TEST_CASE("hash32 matches the FNV-1a reference values") {
  const uint32_t zero[] = {0};
  CHECK(hash32(zero) == 1268118805u);  // FNV-1a of bytes 00 00 00 00

  // Canonical FNV-1a test vectors, fed through the byte path directly:
  // "a" = 0x61 and hash32 of a word whose bytes are 61 00 00 00 must agree
  // with hashing those four bytes.
  const uint32_t a_word[] = {0x61};
  uint32_t expect = 2166136261u;
  for (const uint8_t byte : {0x61, 0x00, 0x00, 0x00}) {
    expect ^= byte;
    expect *= 16777619u;
  }
  CHECK(hash32(a_word) == expect);

  const uint32_t ab[] = {1, 2};
  const uint32_t ba[] = {2, 1};
  CHECK(hash32(ab) == hash32(ab));
  CHECK(hash32(ab) != hash32(ba));
}

TEST_CASE("initial identifiers collapse symmetric atoms") {
  EnumerationConfig cfg;
  const MolGraph ethane = parse_smiles("CC");
  const auto ids = initial_identifiers(ethane, cfg);
  CHECK(ids[0] == ids[1]);

  const MolGraph ethanol = parse_smiles("CCO");
  const auto ids3 = initial_identifiers(ethanol, cfg);
  CHECK(std::set<SubstructureId>(ids3.begin(), ids3.end()).size() == 3);

  const auto rev = initial_identifiers(parse_smiles("OCC"), cfg);
  CHECK(std::multiset<SubstructureId>(ids3.begin(), ids3.end()) ==
        std::multiset<SubstructureId>(rev.begin(), rev.end()));
}

TEST_CASE("methane yields a single identifier at any radius") {
  EnumerationConfig cfg;
  for (int radius : {0, 1, 3}) {
    cfg.radius = radius;
    const FingerprintSet fp =
        enumerate_substructures(parse_smiles("C"), cfg);
    CHECK(fp.ids.size() == 1);
  }
}

TEST_CASE("ethane at radius 1 keeps one shared radius-1 id") {
  EnumerationConfig cfg;
  cfg.radius = 1;
  const FingerprintSet fp = enumerate_substructures(parse_smiles("CC"), cfg);
  CHECK(fp.ids.size() == 2);
  // The two radius-1 occurrences coincide on bond set {0}; one survives.
  int radius1 = 0;
  for (const auto& [id, occs] : fp.occurrences)
    for (const auto& occ : occs) radius1 += occ.radius == 1;
  CHECK(radius1 == 1);
}

TEST_CASE("ethanol at radius 1 yields six identifiers") {
  EnumerationConfig cfg;
  cfg.radius = 1;
  const FingerprintSet fp = enumerate_substructures(parse_smiles("CCO"), cfg);
  CHECK(fp.ids.size() == 6);
  CHECK(retained_bond_sets(fp).size() == 3);
}

TEST_CASE("symmetric ring keeps one id with all three occurrences") {
  EnumerationConfig cfg;
  cfg.radius = 1;
  const FingerprintSet fp =
      enumerate_substructures(parse_smiles("C1CC1"), cfg);
  CHECK(fp.ids.size() == 2);  // one radius-0 id, one radius-1 id
  for (const auto& [id, occs] : fp.occurrences) {
    (void)id;
    if (!occs.front().bond_set.empty()) {
      CHECK(occs.size() == 3);
      std::set<std::vector<int>> distinct;
      for (const auto& occ : occs) {
        CHECK(occ.bond_set.size() == 2);
        distinct.insert(occ.bond_set);
      }
      CHECK(distinct.size() == 3);
    }
  }
}

TEST_CASE("duplicate removal is a no-op without coinciding bond sets") {
  EnumerationConfig cfg;
  cfg.radius = 1;
  const FingerprintSet raw =
      enumerate_substructures_raw(parse_smiles("CCO"), cfg);
  const FingerprintSet deduped = remove_structural_duplicates(raw);
  CHECK(raw.ids == deduped.ids);
}

TEST_CASE("occurrence bond sets grow with radius") {
  EnumerationConfig cfg;
  cfg.radius = 3;
  const MolGraph g = parse_smiles("CC(C)CCO");
  const FingerprintSet raw = enumerate_substructures_raw(g, cfg);
  // Per center, radius-r bond set contains the radius-(r-1) one.
  std::map<std::pair<int, int>, std::vector<int>> by_center;
  for (const auto& [id, occs] : raw.occurrences) {
    (void)id;
    for (const auto& occ : occs)
      by_center[{occ.center, occ.radius}] = occ.bond_set;
  }
  for (int v = 0; v < g.atom_count(); ++v) {
    for (int r = 1; r <= cfg.radius; ++r) {
      const auto& small = by_center[{v, r - 1}];
      const auto& big = by_center[{v, r}];
      CHECK(std::includes(big.begin(), big.end(), small.begin(),
                          small.end()));
    }
  }
}

TEST_CASE("id sets are monotone in the radius before duplicate removal") {
  EnumerationConfig cfg;
  const MolGraph g = parse_smiles("CC(C)c1ccccc1O");
  std::vector<std::set<SubstructureId>> by_radius;
  for (int r = 0; r <= 3; ++r) {
    cfg.radius = r;
    const FingerprintSet raw = enumerate_substructures_raw(g, cfg);
    by_radius.emplace_back(raw.ids.begin(), raw.ids.end());
  }
  for (int r = 1; r <= 3; ++r)
    CHECK(std::includes(by_radius[r].begin(), by_radius[r].end(),
                        by_radius[r - 1].begin(), by_radius[r - 1].end()));
}

TEST_CASE("enumeration is deterministic and permutation invariant") {
  EnumerationConfig cfg;
  const char* corpus[] = {"CC(C)CO", "c1ccc(CC)cc1", "CC(=O)OC", "C1CC1CN"};
  Xoshiro256 rng(3);
  for (const char* s : corpus) {
    const MolGraph g = parse_smiles(s);
    const FingerprintSet ref = enumerate_substructures(g, cfg);
    const FingerprintSet again = enumerate_substructures(g, cfg);
    CHECK(ref.ids == again.ids);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> order(g.atom_count());
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      const MolGraph h = parse_smiles(write_smiles(g, order));
      const FingerprintSet got = enumerate_substructures(h, cfg);
      CHECK_MESSAGE(got.ids == ref.ids, s);
    }
  }
}

TEST_CASE("retained occurrences match the BFS expansion oracle") {
  const char* corpus[] = {"CCO",    "C1CC1",  "CC(C)O", "C1CC1C",
                          "CCCCC",  "OC1CC1", "CNC",    "C1CCC1"};
  EnumerationConfig cfg;
  cfg.radius = 3;
  for (const char* s : corpus) {
    const MolGraph g = parse_smiles(s);
    const FingerprintSet fp = enumerate_substructures(g, cfg);
    CHECK_MESSAGE(
        retained_bond_sets(fp) == bfs_oracle_bond_sets(g, cfg.radius), s);
    CHECK(radius0_occurrences(fp) == g.atom_count());
  }
}

TEST_CASE("pharmacophoric invariants change the identifier sets") {
  EnumerationConfig standard;
  EnumerationConfig pharm;
  pharm.invariants = AtomInvariants::Pharmacophoric;
  const MolGraph g = parse_smiles("CCO");
  const auto a = enumerate_substructures(g, standard);
  const auto b = enumerate_substructures(g, pharm);
  CHECK(a.ids != b.ids);
  // All three carbons of propane share a pharmacophoric tuple while the
  // standard tuples distinguish the central atom.
  const MolGraph propane = parse_smiles("CCC");
  CHECK(initial_identifiers(propane, pharm)[0] ==
        initial_identifiers(propane, pharm)[1]);
  CHECK(initial_identifiers(propane, standard)[0] !=
        initial_identifiers(propane, standard)[1]);
}

TEST_CASE("fingerprint lines round-trip through the ndjson format") {
  EnumerationConfig cfg;
  std::stringstream buffer;
  const FingerprintSet a = enumerate_substructures(parse_smiles("CCO"), cfg);
  const FingerprintSet b =
      enumerate_substructures(parse_smiles("c1ccccc1"), cfg);
  write_fingerprint_line(buffer, 0, a);
  write_fingerprint_line(buffer, 1, b);
  const auto rows = read_fingerprint_lines(buffer);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first == 0);
  CHECK(rows[0].second == a.ids);
  CHECK(rows[1].second == b.ids);
  CHECK(std::is_sorted(rows[1].second.begin(), rows[1].second.end()));
}
