//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/ecfp.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <string>
#include <tuple>

#include "forge/common.hpp"
#include "json.hpp"

namespace forge {

SubstructureId hash32(std::span<const uint32_t> seq) {
  uint32_t state = 2166136261u;
  for (const uint32_t word : seq) {
    for (int byte = 0; byte < 4; ++byte) {
      state ^= (word >> (8 * byte)) & 0xffu;
      state *= 16777619u;
    }
  }
  return state;
}

std::vector<SubstructureId> initial_identifiers(
    const MolGraph& g, const EnumerationConfig& cfg) {
  std::vector<SubstructureId> ids(g.atom_count());
  for (int v = 0; v < g.atom_count(); ++v) {
    const auto tuple = cfg.invariants == AtomInvariants::Standard
                           ? standard_invariant(g, v)
                           : pharmacophoric_invariant(g, v);
    std::vector<uint32_t> seq(tuple.begin(), tuple.end());
    if (cfg.use_chirality)
      seq.push_back(static_cast<uint32_t>(g.atoms[v].stereo));
    ids[v] = hash32(seq);
  }
  return ids;
}

namespace {

// Bond sets of the circular subgraphs around one center: a bond belongs to
// radius r iff one of its endpoints lies within distance r-1 of the center.
std::vector<std::vector<int>> circular_bond_sets(const MolGraph& g,
                                                 int center, int max_radius) {
  std::vector<int> dist(g.atom_count(), -1);
  std::queue<int> queue;
  dist[center] = 0;
  queue.push(center);
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    for (const auto& [nbr, bond] : g.neighbors(v)) {
      (void)bond;
      if (dist[nbr] == -1) {
        dist[nbr] = dist[v] + 1;
        queue.push(nbr);
      }
    }
  }
  std::vector<std::vector<int>> sets(max_radius + 1);
  for (int r = 1; r <= max_radius; ++r) {
    for (int b = 0; b < g.bond_count(); ++b) {
      const int da = dist[g.bonds[b].a];
      const int db = dist[g.bonds[b].b];
      const int nearer = std::min(da == -1 ? INT32_MAX : da,
                                  db == -1 ? INT32_MAX : db);
      if (nearer <= r - 1) sets[r].push_back(b);
    }
  }
  return sets;
}

}  // namespace

FingerprintSet enumerate_substructures_raw(const MolGraph& g,
                                           const EnumerationConfig& cfg) {
  if (cfg.radius < 0 || cfg.radius > 10)
    throw ValidationError("fingerprint radius out of range");
  const int n = g.atom_count();
  FingerprintSet fp;

  std::vector<SubstructureId> current = initial_identifiers(g, cfg);
  for (int v = 0; v < n; ++v)
    fp.occurrences[current[v]].push_back(Occurrence{v, 0, {}});

  std::vector<std::vector<std::vector<int>>> bond_sets(n);
  for (int v = 0; v < n; ++v)
    bond_sets[v] = circular_bond_sets(g, v, cfg.radius);

  for (int r = 1; r <= cfg.radius; ++r) {
    std::vector<SubstructureId> next(n);
    for (int v = 0; v < n; ++v) {
      // (r, current id, then (bond type, neighbor id) sorted ascending)
      std::vector<std::pair<uint32_t, uint32_t>> nbrs;
      for (const auto& [nbr, bond] : g.neighbors(v))
        nbrs.emplace_back(static_cast<uint32_t>(g.bonds[bond].order),
                          current[nbr]);
      std::sort(nbrs.begin(), nbrs.end());
      std::vector<uint32_t> seq;
      seq.reserve(2 + 2 * nbrs.size());
      seq.push_back(static_cast<uint32_t>(r));
      seq.push_back(current[v]);
      for (const auto& [order, id] : nbrs) {
        seq.push_back(order);
        seq.push_back(id);
      }
      next[v] = hash32(seq);
      fp.occurrences[next[v]].push_back(Occurrence{v, r, bond_sets[v][r]});
    }
    current = std::move(next);
  }

  fp.ids.reserve(fp.occurrences.size());
  for (const auto& [id, occs] : fp.occurrences) {
    (void)occs;
    fp.ids.push_back(id);
  }
  return fp;
}

FingerprintSet remove_structural_duplicates(const FingerprintSet& fp) {
  // Two occurrences are structural duplicates iff they cover the same
  // circular subgraph: equal non-empty bond sets, or equal centers when the
  // bond set is empty (the subgraph is then just the center atom). The
  // winner of a group is the smallest (radius, id, center).
  struct Entry {
    SubstructureId id;
    const Occurrence* occ;
  };
  using GroupKey = std::pair<int, std::vector<int>>;
  std::map<GroupKey, std::vector<Entry>> groups;
  FingerprintSet out;
  for (const auto& [id, occs] : fp.occurrences) {
    for (const auto& occ : occs) {
      const int center_key = occ.bond_set.empty() ? occ.center : -1;
      groups[GroupKey{center_key, occ.bond_set}].push_back(Entry{id, &occ});
    }
  }
  for (const auto& [key, entries] : groups) {
    (void)key;
    const Entry* winner = &entries.front();
    for (const auto& e : entries) {
      const auto key = std::make_tuple(e.occ->radius, e.id, e.occ->center);
      const auto best =
          std::make_tuple(winner->occ->radius, winner->id, winner->occ->center);
      if (key < best) winner = &e;
    }
    out.occurrences[winner->id].push_back(*winner->occ);
  }
  for (auto& [id, occs] : out.occurrences) {
    (void)id;
    std::sort(occs.begin(), occs.end(), [](const Occurrence& x,
                                           const Occurrence& y) {
      return std::tie(x.radius, x.center) < std::tie(y.radius, y.center);
    });
  }
  out.ids.reserve(out.occurrences.size());
  for (const auto& [id, occs] : out.occurrences) {
    (void)occs;
    out.ids.push_back(id);
  }
  return out;
}

FingerprintSet enumerate_substructures(const MolGraph& g,
                                       const EnumerationConfig& cfg) {
  return remove_structural_duplicates(enumerate_substructures_raw(g, cfg));
}

void write_fingerprint_line(std::ostream& os, int64_t row,
                            const FingerprintSet& fp) {
  nlohmann::ordered_json line;
  line["id"] = row;
  line["fp"] = fp.ids;
  os << line.dump() << '\n';
}

std::vector<std::pair<int64_t, std::vector<SubstructureId>>>
read_fingerprint_lines(std::istream& is) {
  std::vector<std::pair<int64_t, std::vector<SubstructureId>>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("bad fingerprint line: ") + e.what());
    }
    if (!parsed.contains("id") || !parsed.contains("fp"))
      throw IoError("fingerprint line missing id/fp field");
    rows.emplace_back(parsed["id"].get<int64_t>(),
                      parsed["fp"].get<std::vector<SubstructureId>>());
  }
  return rows;
}

}  // namespace forge
