//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/mmp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "forge/common.hpp"
#include "forge/smiles.hpp"

namespace forge {

const char* to_string(AcClass c) {
  switch (c) {
    case AcClass::AC: return "AC";
    case AcClass::HalfAC: return "half-AC";
    case AcClass::NonAC: return "non-AC";
  }
  return "non-AC";
}

namespace {

constexpr int kMaxVariableHeavy = 13;
constexpr int kMaxVariableDiff = 8;

// Extracts the fragment containing `keep_side` after deleting bond `cut`,
// with a wildcard atom bonded at the cut site.
MolGraph cut_fragment(const MolGraph& g, int cut, int keep_side) {
  std::vector<int> mapping(g.atom_count(), -1);
  MolGraph frag;
  std::vector<int> stack{keep_side};
  mapping[keep_side] = frag.add_atom(g.atoms[keep_side]);
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& [nbr, bond] : g.neighbors(v)) {
      if (bond == cut) continue;
      if (mapping[nbr] == -1) {
        mapping[nbr] = frag.add_atom(g.atoms[nbr]);
        stack.push_back(nbr);
      }
    }
  }
  for (int idx = 0; idx < g.bond_count(); ++idx) {
    if (idx == cut) continue;
    const Bond& b = g.bonds[idx];
    if (mapping[b.a] != -1 && mapping[b.b] != -1)
      frag.add_bond(mapping[b.a], mapping[b.b], b.order);
  }
  Atom wildcard;
  wildcard.element = 0;
  wildcard.h_count = 0;
  const int star = frag.add_atom(wildcard);
  frag.add_bond(mapping[keep_side], star, BondOrder::Single);
  perceive_rings(frag);
  return frag;
}

}  // namespace

std::vector<CutFragmentation> enumerate_single_cuts(const MolGraph& g) {
  std::vector<CutFragmentation> cuts;
  std::set<std::pair<std::string, std::string>> seen;
  for (int bond = 0; bond < g.bond_count(); ++bond) {
    const Bond& b = g.bonds[bond];
    if (b.in_ring || b.order != BondOrder::Single) continue;
    const MolGraph side_a = cut_fragment(g, bond, b.a);
    const MolGraph side_b = cut_fragment(g, bond, b.b);
    const int heavy_a = side_a.heavy_atom_count();
    const int heavy_b = side_b.heavy_atom_count();

    CutFragmentation cut;
    if (heavy_a >= heavy_b) {
      cut.core = canonical_smiles(side_a);
      cut.variable = canonical_smiles(side_b);
      cut.core_heavy = heavy_a;
      cut.var_heavy = heavy_b;
    } else {
      cut.core = canonical_smiles(side_b);
      cut.variable = canonical_smiles(side_a);
      cut.core_heavy = heavy_b;
      cut.var_heavy = heavy_a;
    }
    if (cut.var_heavy > kMaxVariableHeavy) continue;
    if (cut.core_heavy < 2 * cut.var_heavy) continue;
    if (seen.insert({cut.core, cut.variable}).second)
      cuts.push_back(std::move(cut));
  }
  return cuts;
}

AcClass label_ac(double act_i, double act_j) {
  const double d = std::abs(act_i - act_j);
  if (d >= 2.0) return AcClass::AC;
  if (d <= 1.0) return AcClass::NonAC;
  return AcClass::HalfAC;
}

PdLabel label_pd(double act_i, double act_j) {
  return act_i > act_j ? PdLabel::Left : PdLabel::Right;
}

std::vector<Mmp> find_mmps(std::span<const MolGraph> dataset,
                           std::span<const double> activities) {
  if (dataset.size() != activities.size())
    throw ValidationError("find_mmps: dataset/activity length mismatch");

  struct IndexEntry {
    int mol;
    std::string variable;
    int var_heavy;
    int core_heavy;
  };
  std::map<std::string, std::vector<IndexEntry>> by_core;
  for (size_t mol = 0; mol < dataset.size(); ++mol) {
    for (const CutFragmentation& cut : enumerate_single_cuts(dataset[mol]))
      by_core[cut.core].push_back(IndexEntry{static_cast<int>(mol),
                                             cut.variable, cut.var_heavy,
                                             cut.core_heavy});
  }

  // Best (core_heavy desc, core asc, var_i asc, var_j asc) per pair.
  struct Choice {
    int core_heavy;
    std::string core;
    std::string var_i;
    std::string var_j;
  };
  std::map<std::pair<int, int>, Choice> best;
  for (const auto& [core, entries] : by_core) {
    for (size_t x = 0; x < entries.size(); ++x) {
      for (size_t y = x + 1; y < entries.size(); ++y) {
        const IndexEntry* first = &entries[x];
        const IndexEntry* second = &entries[y];
        if (first->mol == second->mol) continue;
        if (first->mol > second->mol) std::swap(first, second);
        if (first->variable == second->variable) continue;
        if (std::abs(first->var_heavy - second->var_heavy) >
            kMaxVariableDiff)
          continue;
        const Choice candidate{first->core_heavy, core, first->variable,
                               second->variable};
        const auto key = std::make_pair(first->mol, second->mol);
        auto it = best.find(key);
        if (it == best.end()) {
          best.emplace(key, candidate);
          continue;
        }
        const auto as_tuple = [](const Choice& c) {
          return std::make_tuple(-c.core_heavy, c.core, c.var_i, c.var_j);
        };
        if (as_tuple(candidate) < as_tuple(it->second))
          it->second = candidate;
      }
    }
  }

  std::vector<Mmp> mmps;
  mmps.reserve(best.size());
  for (const auto& [key, choice] : best) {
    Mmp mmp;
    mmp.i = key.first;
    mmp.j = key.second;
    mmp.core = choice.core;
    mmp.var_i = choice.var_i;
    mmp.var_j = choice.var_j;
    mmp.ac_label = label_ac(activities[mmp.i], activities[mmp.j]);
    mmp.pd_label = label_pd(activities[mmp.i], activities[mmp.j]);
    mmps.push_back(std::move(mmp));
  }
  return mmps;
}

CleanResult clean_dataset(
    std::span<const std::pair<std::string, double>> records) {
  CleanResult result;
  struct Group {
    std::vector<size_t> members;
  };
  std::map<std::string, Group> groups;
  std::vector<std::string> group_order;
  for (size_t i = 0; i < records.size(); ++i) {
    std::string canonical;
    try {
      canonical = canonical_smiles(parse_smiles(records[i].first));
    } catch (const SmilesParseError& e) {
      result.dropped.push_back(
          DroppedRecord{i, records[i].first,
                        std::string("parse error: ") + e.what()});
      continue;
    }
    if (records[i].second <= 0.0) {
      result.dropped.push_back(DroppedRecord{
          i, records[i].first, "non-positive raw activity"});
      continue;
    }
    auto it = groups.find(canonical);
    if (it == groups.end()) {
      groups[canonical].members.push_back(i);
      group_order.push_back(canonical);
    } else {
      it->second.members.push_back(i);
    }
  }

  for (const std::string& canonical : group_order) {
    const Group& group = groups[canonical];
    double low = records[group.members.front()].second;
    double high = low;
    for (const size_t idx : group.members) {
      low = std::min(low, records[idx].second);
      high = std::max(high, records[idx].second);
    }
    if (high / low > 10.0) {
      for (const size_t idx : group.members)
        result.dropped.push_back(DroppedRecord{
            idx, records[idx].first,
            "duplicate group spans more than one order of magnitude"});
      continue;
    }
    double log_sum = 0.0;
    for (const size_t idx : group.members)
      log_sum += std::log(records[idx].second);
    const double unified =
        group.members.size() == 1
            ? records[group.members.front()].second
            : std::exp(log_sum / static_cast<double>(group.members.size()));
    result.records.push_back(CleanedRecord{
        records[group.members.front()].first, unified,
        group.members.front()});
  }
  return result;
}

}  // namespace forge
