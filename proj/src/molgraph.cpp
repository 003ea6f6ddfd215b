//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/molgraph.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "forge/common.hpp"

namespace forge {

namespace {

constexpr const char* kElementSymbols[] = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Standard organic-subset valences; 0 for everything else.
int default_valence(uint8_t element) {
  switch (element) {
    case 5: return 3;   // B
    case 6: return 4;   // C
    case 7: return 3;   // N
    case 8: return 2;   // O
    case 15: return 3;  // P
    case 16: return 2;  // S
    case 9:
    case 17:
    case 35:
    case 53: return 1;  // halogens
    default: return 0;
  }
}

bool in_organic_subset(uint8_t element) {
  return default_valence(element) > 0;
}

// Bond order in half-units so that aromatic counts as 1.5.
int half_order(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 2;
    case BondOrder::Double: return 4;
    case BondOrder::Triple: return 6;
    case BondOrder::Aromatic: return 3;
  }
  return 2;
}

}  // namespace

int MolGraph::add_atom(Atom a) {
  atoms.push_back(a);
  adj_.emplace_back();
  return static_cast<int>(atoms.size()) - 1;
}

int MolGraph::add_bond(int a, int b, BondOrder order) {
  if (a == b) throw ValidationError("self-loop bond");
  if (a < 0 || b < 0 || a >= atom_count() || b >= atom_count())
    throw ValidationError("bond endpoint out of range");
  for (const auto& [nbr, bond] : adj_[a]) {
    (void)bond;
    if (nbr == b) throw ValidationError("duplicate bond");
  }
  bonds.push_back(Bond{a, b, order, false, 0});
  const int idx = static_cast<int>(bonds.size()) - 1;
  adj_[a].emplace_back(b, idx);
  adj_[b].emplace_back(a, idx);
  return idx;
}

int MolGraph::heavy_atom_count() const {
  int n = 0;
  for (const auto& a : atoms)
    if (a.element != 0) ++n;
  return n;
}

bool MolGraph::connected() const {
  if (atoms.empty()) return true;
  std::vector<bool> seen(atoms.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  int visited = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& [nbr, bond] : adj_[v]) {
      (void)bond;
      if (!seen[nbr]) {
        seen[nbr] = true;
        ++visited;
        stack.push_back(nbr);
      }
    }
  }
  return visited == atom_count();
}

void perceive_rings(MolGraph& g) {
  const int n = g.atom_count();
  for (auto& b : g.bonds) b.in_ring = true;
  // Iterative Tarjan bridge finding; a bond is a ring bond iff it is not
  // a bridge.
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  struct Frame {
    int v;
    int parent_bond;
    size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.edge < g.neighbors(f.v).size()) {
        const auto [to, bond] = g.neighbors(f.v)[f.edge++];
        if (bond == f.parent_bond) continue;
        if (disc[to] == -1) {
          disc[to] = low[to] = timer++;
          stack.push_back({to, bond, 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[to]);
        }
      } else {
        stack.pop_back();
        if (!stack.empty()) {
          Frame& p = stack.back();
          low[p.v] = std::min(low[p.v], low[f.v]);
          if (low[f.v] > disc[p.v]) g.bonds[f.parent_bond].in_ring = false;
        }
      }
    }
  }
  g.ring_atom.assign(n, false);
  for (const auto& b : g.bonds) {
    if (b.in_ring) {
      g.ring_atom[b.a] = true;
      g.ring_atom[b.b] = true;
    }
  }
}

std::array<uint32_t, 6> standard_invariant(const MolGraph& g, int atom) {
  const Atom& a = g.atoms[atom];
  return {static_cast<uint32_t>(a.element),
          static_cast<uint32_t>(g.degree(atom)),
          static_cast<uint32_t>(a.h_count),
          static_cast<uint32_t>(a.formal_charge + 4),
          static_cast<uint32_t>(a.isotope.value_or(0)),
          static_cast<uint32_t>(g.ring_atom.empty() ? 0
                                                    : g.ring_atom[atom])};
}

std::array<uint32_t, 6> pharmacophoric_invariant(const MolGraph& g,
                                                 int atom) {
  const Atom& a = g.atoms[atom];
  const bool no = a.element == 7 || a.element == 8;
  const uint32_t hba = no && a.formal_charge <= 0;
  const uint32_t hbd = no && a.h_count >= 1;

  // Carboxyl-like pattern (O or S analog): an O/S bearing a hydrogen,
  // single-bonded to an atom that is double-bonded to another O/S.
  uint32_t neg = 0;
  if ((a.element == 8 || a.element == 16) && a.h_count >= 1) {
    for (const auto& [nbr, bond] : g.neighbors(atom)) {
      if (g.bonds[bond].order != BondOrder::Single) continue;
      for (const auto& [nbr2, bond2] : g.neighbors(nbr)) {
        if (nbr2 == atom) continue;
        const uint8_t z = g.atoms[nbr2].element;
        if (g.bonds[bond2].order == BondOrder::Double &&
            (z == 8 || z == 16)) {
          neg = 1;
        }
      }
    }
  }

  uint32_t pos = 0;
  if (a.element == 7 && !a.aromatic && a.formal_charge >= 0) {
    pos = 1;
    for (const auto& [nbr, bond] : g.neighbors(atom)) {
      (void)nbr;
      const BondOrder o = g.bonds[bond].order;
      if (o == BondOrder::Double || o == BondOrder::Triple) pos = 0;
    }
  }

  const uint32_t halogen = a.element == 9 || a.element == 17 ||
                           a.element == 35 || a.element == 53;
  return {hba, hbd, neg, pos, a.aromatic ? 1u : 0u, halogen};
}

namespace {

using RankKey = std::vector<int64_t>;

std::vector<int> dense_ranks(const std::vector<RankKey>& keys) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return keys[x] < keys[y];
  });
  std::vector<int> ranks(n, 0);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && keys[order[i]] != keys[order[i - 1]]) ++r;
    ranks[order[i]] = r;
  }
  return ranks;
}

int rank_class_count(const std::vector<int>& ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

// One refinement sweep: new key = (rank, sorted (bond order, neighbor rank)).
std::vector<int> refine_to_fixpoint(const MolGraph& g,
                                    std::vector<int> ranks) {
  const int n = g.atom_count();
  int classes = rank_class_count(ranks);
  while (classes < n) {
    std::vector<RankKey> keys(n);
    for (int v = 0; v < n; ++v) {
      RankKey key{ranks[v]};
      std::vector<std::pair<int, int>> nbrs;
      for (const auto& [nbr, bond] : g.neighbors(v))
        nbrs.emplace_back(static_cast<int>(g.bonds[bond].order), ranks[nbr]);
      std::sort(nbrs.begin(), nbrs.end());
      for (const auto& [o, r] : nbrs) {
        key.push_back(o);
        key.push_back(r);
      }
      keys[v] = std::move(key);
    }
    std::vector<int> next = dense_ranks(keys);
    const int next_classes = rank_class_count(next);
    if (next_classes == classes) return next;
    ranks = std::move(next);
    classes = next_classes;
  }
  return ranks;
}

}  // namespace

std::vector<int> canonical_ranks(const MolGraph& g) {
  const int n = g.atom_count();
  if (n == 0) return {};
  std::vector<RankKey> keys(n);
  for (int v = 0; v < n; ++v) {
    const auto inv = standard_invariant(g, v);
    RankKey key(inv.begin(), inv.end());
    key.push_back(g.atoms[v].aromatic ? 1 : 0);
    keys[v] = std::move(key);
  }
  std::vector<int> ranks = refine_to_fixpoint(g, dense_ranks(keys));
  while (rank_class_count(ranks) < n) {
    // Distinguish the smallest atom index within the lowest tied class.
    int tied_rank = -1;
    for (int r = 0; tied_rank == -1; ++r) {
      int count = 0;
      for (int v = 0; v < n; ++v) count += ranks[v] == r;
      if (count > 1) tied_rank = r;
    }
    int chosen = -1;
    for (int v = 0; v < n && chosen == -1; ++v)
      if (ranks[v] == tied_rank) chosen = v;
    std::vector<RankKey> split(n);
    for (int v = 0; v < n; ++v)
      split[v] = {ranks[v], v == chosen ? 0 : 1};
    ranks = refine_to_fixpoint(g, dense_ranks(split));
  }
  return ranks;
}

namespace {

// Would a reader of the given bond emit/expect an explicit symbol? The
// default order between two aromatic atoms is aromatic, otherwise single.
BondOrder default_order(const Atom& a, const Atom& b) {
  return (a.aromatic && b.aromatic) ? BondOrder::Aromatic
                                    : BondOrder::Single;
}

char bond_symbol(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return '-';
    case BondOrder::Double: return '=';
    case BondOrder::Triple: return '#';
    case BondOrder::Aromatic: return ':';
  }
  return '-';
}

// H count the parser would infer for a bare organic-subset token with the
// given incident bonds.
int inferred_h(const Atom& a, int half_bond_sum) {
  const int valence = default_valence(a.element);
  const int used = (half_bond_sum + 1) / 2;
  return std::max(0, valence - used);
}

void append_atom_token(std::string& out, const MolGraph& g, int v) {
  const Atom& a = g.atoms[v];
  int half_sum = 0;
  for (const auto& [nbr, bond] : g.neighbors(v)) {
    (void)nbr;
    half_sum += half_order(g.bonds[bond].order);
  }
  std::string symbol = kElementSymbols[a.element];
  if (a.aromatic)
    for (auto& c : symbol) c = static_cast<char>(std::tolower(c));

  const bool aromatic_ok =
      !a.aromatic || a.element == 5 || a.element == 6 || a.element == 7 ||
      a.element == 8 || a.element == 15 || a.element == 16;
  const bool bare_ok = a.element != 0 && in_organic_subset(a.element) &&
                       aromatic_ok && a.formal_charge == 0 && !a.isotope &&
                       g.degree(v) <= default_valence(a.element) &&
                       inferred_h(a, half_sum) == a.h_count;
  if (bare_ok) {
    out += symbol;
    return;
  }
  out += '[';
  if (a.isotope) out += std::to_string(*a.isotope);
  out += symbol;
  if (a.h_count == 1) {
    out += 'H';
  } else if (a.h_count > 1) {
    out += 'H';
    out += std::to_string(static_cast<int>(a.h_count));
  }
  if (a.formal_charge > 0) {
    out += '+';
    if (a.formal_charge > 1) out += std::to_string(int(a.formal_charge));
  } else if (a.formal_charge < 0) {
    out += '-';
    if (a.formal_charge < -1) out += std::to_string(-int(a.formal_charge));
  }
  out += ']';
}

struct WriterPlan {
  std::vector<int> parent_bond;          // bond to DFS parent, -1 at root
  std::vector<int> visit_order;          // atoms in DFS pre-order
  std::vector<std::vector<int>> children;  // tree children per atom
  std::vector<std::vector<int>> opens;     // ring bonds opened at atom
  std::vector<std::vector<int>> closes;    // ring bonds closed at atom
};

WriterPlan plan_dfs(const MolGraph& g, const std::vector<int>& ranks) {
  const int n = g.atom_count();
  WriterPlan plan;
  plan.parent_bond.assign(n, -1);
  plan.children.assign(n, {});
  plan.opens.assign(n, {});
  plan.closes.assign(n, {});

  int root = 0;
  for (int v = 0; v < n; ++v)
    if (ranks[v] < ranks[root]) root = v;

  std::vector<bool> visited(n, false);
  std::vector<bool> bond_used(g.bonds.size(), false);
  struct Frame {
    int v;
    size_t next = 0;
    std::vector<int> nbrs;
  };
  auto sorted_neighbors = [&](int v) {
    std::vector<int> idx;
    for (size_t i = 0; i < g.neighbors(v).size(); ++i)
      idx.push_back(static_cast<int>(i));
    std::sort(idx.begin(), idx.end(), [&](int x, int y) {
      return ranks[g.neighbors(v)[x].first] < ranks[g.neighbors(v)[y].first];
    });
    return idx;
  };

  std::vector<Frame> stack;
  stack.push_back({root, 0, sorted_neighbors(root)});
  visited[root] = true;
  plan.visit_order.push_back(root);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next >= f.nbrs.size()) {
      stack.pop_back();
      continue;
    }
    const auto [to, bond] = g.neighbors(f.v)[f.nbrs[f.next++]];
    if (bond_used[bond]) continue;
    bond_used[bond] = true;
    if (!visited[to]) {
      visited[to] = true;
      plan.parent_bond[to] = bond;
      plan.children[f.v].push_back(to);
      plan.visit_order.push_back(to);
      stack.push_back({to, 0, sorted_neighbors(to)});
    } else {
      // Back edge: opens at the earlier-visited endpoint, closes here.
      plan.opens[to].push_back(bond);
      plan.closes[f.v].push_back(bond);
    }
  }
  return plan;
}

}  // namespace

std::string write_smiles(const MolGraph& g, const std::vector<int>& ranks) {
  if (g.atom_count() == 0) return "";
  if (static_cast<int>(ranks.size()) != g.atom_count())
    throw ValidationError("rank vector size mismatch");

  WriterPlan plan = plan_dfs(g, ranks);

  // Assign ring-closure digits by simulating emission order: digits free
  // again once both endpoints have been written.
  std::vector<int> digit_of(g.bonds.size(), 0);
  std::vector<bool> digit_taken(100, false);
  std::vector<int> visit_pos(g.atom_count(), 0);
  for (size_t i = 0; i < plan.visit_order.size(); ++i)
    visit_pos[plan.visit_order[i]] = static_cast<int>(i);
  for (auto& opens : plan.opens) {
    std::sort(opens.begin(), opens.end(), [&](int x, int y) {
      const Bond& bx = g.bonds[x];
      const Bond& by = g.bonds[y];
      const int cx = std::max(visit_pos[bx.a], visit_pos[bx.b]);
      const int cy = std::max(visit_pos[by.a], visit_pos[by.b]);
      return cx < cy;
    });
  }
  for (int v : plan.visit_order) {
    std::sort(plan.closes[v].begin(), plan.closes[v].end(),
              [&](int x, int y) { return digit_of[x] < digit_of[y]; });
    for (int bond : plan.closes[v]) digit_taken[digit_of[bond]] = false;
    for (int bond : plan.opens[v]) {
      int d = 1;
      while (d < 100 && digit_taken[d]) ++d;
      if (d >= 100) throw ValidationError("ring closure digits exhausted");
      digit_of[bond] = d;
      digit_taken[d] = true;
    }
  }

  std::string out;
  auto digit_token = [](int d) {
    return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
  };

  struct EmitFrame {
    int v;
    size_t child = 0;
  };
  std::vector<EmitFrame> stack;
  auto emit_atom = [&](int v) {
    append_atom_token(out, g, v);
    for (int bond : plan.closes[v]) {
      const Bond& b = g.bonds[bond];
      if (b.order != default_order(g.atoms[b.a], g.atoms[b.b]))
        out += bond_symbol(b.order);
      out += digit_token(digit_of[bond]);
    }
    for (int bond : plan.opens[v]) out += digit_token(digit_of[bond]);
  };

  const int root = plan.visit_order.front();
  emit_atom(root);
  stack.push_back({root, 0});
  while (!stack.empty()) {
    EmitFrame& f = stack.back();
    if (f.child >= plan.children[f.v].size()) {
      stack.pop_back();
      if (!stack.empty() &&
          stack.back().child < plan.children[stack.back().v].size())
        out += ')';
      continue;
    }
    const int to = plan.children[f.v][f.child++];
    const bool last = f.child == plan.children[f.v].size();
    if (!last) out += '(';
    const Bond& b = g.bonds[plan.parent_bond[to]];
    if (b.order != default_order(g.atoms[b.a], g.atoms[b.b]))
      out += bond_symbol(b.order);
    emit_atom(to);
    stack.push_back({to, 0});
  }
  return out;
}

std::string canonical_smiles(const MolGraph& g) {
  return write_smiles(g, canonical_ranks(g));
}

}  // namespace forge
