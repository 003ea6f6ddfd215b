//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "forge/common.hpp"
#include "json.hpp"

namespace forge {

const char* to_string(PoolMethod method) {
  switch (method) {
    case PoolMethod::Hash: return "hash";
    case PoolMethod::SortSlice: return "sortslice";
    case PoolMethod::Filter: return "filter";
    case PoolMethod::Mim: return "mim";
  }
  return "hash";
}

PoolMethod pool_method_from_string(const std::string& name) {
  if (name == "hash") return PoolMethod::Hash;
  if (name == "sortslice") return PoolMethod::SortSlice;
  if (name == "filter") return PoolMethod::Filter;
  if (name == "mim") return PoolMethod::Mim;
  throw ValidationError("unknown pooling method: " + name);
}

std::string PoolSpec::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = forge::to_string(method);
  j["dim"] = dim;
  j["slots"] = slots;
  return j.dump();
}

PoolSpec PoolSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad pool spec: ") + e.what());
  }
  PoolSpec spec;
  spec.method = pool_method_from_string(j.at("method").get<std::string>());
  spec.dim = j.at("dim").get<int>();
  spec.slots = j.at("slots").get<std::vector<SubstructureId>>();
  return spec;
}

double entropy(double p) {
  if (p < 0.0 || p > 1.0)
    throw ValidationError("entropy argument outside [0, 1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double mutual_information(std::span<const int> c_sample,
                          std::span<const int> g_sample) {
  if (c_sample.size() != g_sample.size())
    throw ValidationError("mutual_information: length mismatch");
  if (c_sample.empty())
    throw ValidationError("mutual_information: empty samples");
  const double n = static_cast<double>(c_sample.size());
  double joint[2][2] = {{0, 0}, {0, 0}};
  for (size_t i = 0; i < c_sample.size(); ++i)
    joint[c_sample[i] ? 1 : 0][g_sample[i] ? 1 : 0] += 1.0;
  const double pc = (joint[1][0] + joint[1][1]) / n;
  const double pg = (joint[0][1] + joint[1][1]) / n;
  double joint_entropy = 0.0;
  for (const auto& row : joint)
    for (const double count : row)
      if (count > 0.0) {
        const double p = count / n;
        joint_entropy -= p * std::log2(p);
      }
  return std::max(0.0, entropy(pc) + entropy(pg) - joint_entropy);
}

double chi2_pvalue(const std::array<std::array<long, 2>, 2>& table) {
  const double a = static_cast<double>(table[0][0]);
  const double b = static_cast<double>(table[0][1]);
  const double c = static_cast<double>(table[1][0]);
  const double d = static_cast<double>(table[1][1]);
  const double n = a + b + c + d;
  if (n < 1.0) throw ValidationError("chi2_pvalue: empty table");
  const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
  if (r1 == 0.0 || r2 == 0.0 || c1 == 0.0 || c2 == 0.0) return 1.0;
  const double diff = a * d - b * c;
  const double statistic = n * diff * diff / (r1 * r2 * c1 * c2);
  // Survival function of the 1-dof chi-squared distribution.
  return std::erfc(std::sqrt(statistic / 2.0));
}

std::vector<int> binarize_labels(std::span<const double> labels) {
  if (labels.empty()) throw ValidationError("binarize_labels: empty input");
  std::vector<double> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double median = n % 2 == 1
                            ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = labels[i] <= median ? 0 : 1;
  return out;
}

namespace {

struct IdStats {
  std::vector<int> support;  // compound indices, ascending
};

std::map<SubstructureId, IdStats> collect_stats(
    std::span<const FingerprintSet> fps) {
  std::map<SubstructureId, IdStats> stats;
  for (size_t i = 0; i < fps.size(); ++i)
    for (const SubstructureId id : fps[i].ids)
      stats[id].support.push_back(static_cast<int>(i));
  return stats;
}

std::vector<int> binarized_or_passthrough(std::span<const double> labels) {
  const bool already_binary =
      std::all_of(labels.begin(), labels.end(),
                  [](double v) { return v == 0.0 || v == 1.0; });
  if (already_binary) {
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i)
      out[i] = labels[i] == 1.0 ? 1 : 0;
    return out;
  }
  return binarize_labels(labels);
}

void require_labels(const FitContext& ctx) {
  if (ctx.labels.empty())
    throw ValidationError("pooling method requires training labels");
  if (ctx.labels.size() != ctx.train_fps.size())
    throw ValidationError("labels/compound count mismatch");
}

void require_training(const FitContext& ctx) {
  if (ctx.train_fps.empty())
    throw ValidationError("empty training set");
}

}  // namespace

PoolSpec fit_hash(int dim) {
  if (dim < 1) throw ValidationError("pool dimension must be positive");
  return PoolSpec{PoolMethod::Hash, dim, {}};
}

PoolSpec fit_sort_and_slice(const FitContext& ctx, int dim) {
  if (dim < 1) throw ValidationError("pool dimension must be positive");
  require_training(ctx);
  const auto stats = collect_stats(ctx.train_fps);
  std::vector<std::pair<size_t, SubstructureId>> order;
  order.reserve(stats.size());
  for (const auto& [id, s] : stats) order.emplace_back(s.support.size(), id);
  // Frequency descending, ties to the larger id.
  std::sort(order.begin(), order.end(),
            [](const auto& x, const auto& y) { return x > y; });
  PoolSpec spec{PoolMethod::SortSlice, dim, {}};
  const size_t keep = std::min<size_t>(dim, order.size());
  for (size_t i = 0; i < keep; ++i) spec.slots.push_back(order[i].second);
  return spec;
}

namespace {

// Shared scaffolding for Filter and MIM: candidate set manipulation with
// early stop at the target dimension.
struct Candidates {
  std::set<SubstructureId> ids;
  size_t target;

  bool at_target() const { return ids.size() <= target; }
};

}  // namespace

PoolSpec fit_filter(const FitContext& ctx, int dim) {
  if (dim < 1) throw ValidationError("pool dimension must be positive");
  require_training(ctx);
  require_labels(ctx);
  const std::vector<int> labels = binarized_or_passthrough(ctx.labels);
  const auto stats = collect_stats(ctx.train_fps);

  Candidates cand;
  cand.target = static_cast<size_t>(dim);
  for (const auto& [id, s] : stats) {
    (void)s;
    cand.ids.insert(id);
  }

  // Step 1: drop ids appearing in at most one compound, largest id first.
  while (!cand.at_target()) {
    SubstructureId victim = 0;
    bool found = false;
    for (auto it = cand.ids.rbegin(); it != cand.ids.rend(); ++it) {
      if (stats.at(*it).support.size() <= 1) {
        victim = *it;
        found = true;
        break;
      }
    }
    if (!found) break;
    cand.ids.erase(victim);
  }

  // Step 2: drop non-closed ids, largest first. An id J is non-closed if
  // some J' with identical support has, within one shared compound, an
  // occurrence whose bond set is strictly contained in one of J's.
  auto strictly_contains = [](const std::vector<int>& big,
                              const std::vector<int>& small) {
    return small.size() < big.size() &&
           std::includes(big.begin(), big.end(), small.begin(), small.end());
  };
  auto non_closed = [&](SubstructureId id) {
    const auto& support = stats.at(id).support;
    for (const SubstructureId other : cand.ids) {
      if (other == id || stats.at(other).support != support) continue;
      for (const int compound : support) {
        const auto& mine = ctx.train_fps[compound].occurrences.at(id);
        const auto& theirs = ctx.train_fps[compound].occurrences.at(other);
        for (const auto& occ : mine)
          for (const auto& sub : theirs)
            if (strictly_contains(occ.bond_set, sub.bond_set)) return true;
      }
    }
    return false;
  };
  while (!cand.at_target()) {
    SubstructureId victim = 0;
    bool found = false;
    for (auto it = cand.ids.rbegin(); it != cand.ids.rend(); ++it) {
      if (non_closed(*it)) {
        victim = *it;
        found = true;
        break;
      }
    }
    if (!found) break;
    cand.ids.erase(victim);
  }

  // Step 3: keep the ids most dependent on the label (smallest chi-squared
  // p-value); on equal p the smaller id ranks higher.
  std::vector<std::pair<double, SubstructureId>> ranked;
  const long n = static_cast<long>(ctx.train_fps.size());
  const long positives =
      std::count(labels.begin(), labels.end(), 1);
  for (const SubstructureId id : cand.ids) {
    const auto& support = stats.at(id).support;
    long present_pos = 0;
    for (const int compound : support) present_pos += labels[compound];
    const long present = static_cast<long>(support.size());
    const std::array<std::array<long, 2>, 2> table{{
        {n - present - (positives - present_pos), positives - present_pos},
        {present - present_pos, present_pos},
    }};
    ranked.emplace_back(chi2_pvalue(table), id);
  }
  std::sort(ranked.begin(), ranked.end());
  PoolSpec spec{PoolMethod::Filter, dim, {}};
  const size_t keep = std::min<size_t>(dim, ranked.size());
  for (size_t i = 0; i < keep; ++i) spec.slots.push_back(ranked[i].second);
  return spec;
}

PoolSpec fit_mim(const FitContext& ctx, int dim) {
  if (dim < 1) throw ValidationError("pool dimension must be positive");
  require_training(ctx);
  require_labels(ctx);
  const std::vector<int> labels = binarized_or_passthrough(ctx.labels);
  const auto stats = collect_stats(ctx.train_fps);

  Candidates cand;
  cand.target = static_cast<size_t>(dim);
  for (const auto& [id, s] : stats) {
    (void)s;
    cand.ids.insert(id);
  }

  // Step 1: deduplicate identical support sets keeping the smallest id,
  // i.e. removing the largest duplicate first.
  {
    std::map<std::vector<int>, std::vector<SubstructureId>> by_support;
    for (const SubstructureId id : cand.ids)
      by_support[stats.at(id).support].push_back(id);
    std::vector<SubstructureId> removable;
    for (const auto& [support, ids] : by_support) {
      (void)support;
      for (size_t i = 1; i < ids.size(); ++i) removable.push_back(ids[i]);
    }
    std::sort(removable.rbegin(), removable.rend());
    for (const SubstructureId id : removable) {
      // Deduplication stops only when the candidate count falls exactly to
      // the target; below it the dimension bound can no longer bind.
      if (cand.ids.size() == cand.target) break;
      cand.ids.erase(id);
    }
  }

  // Step 2: keep the top-dim ids by mutual information descending, ties to
  // the larger id.
  std::vector<std::pair<double, SubstructureId>> ranked;
  for (const SubstructureId id : cand.ids) {
    std::vector<int> presence(ctx.train_fps.size(), 0);
    for (const int compound : stats.at(id).support) presence[compound] = 1;
    ranked.emplace_back(mutual_information(labels, presence), id);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& x, const auto& y) { return x > y; });
  PoolSpec spec{PoolMethod::Mim, dim, {}};
  const size_t keep = std::min<size_t>(dim, ranked.size());
  for (size_t i = 0; i < keep; ++i) spec.slots.push_back(ranked[i].second);
  return spec;
}

std::vector<double> transform(const PoolSpec& spec, const FingerprintSet& fp) {
  if (spec.dim < 1) throw ValidationError("pool spec not fitted");
  std::vector<double> out(spec.dim, 0.0);
  if (spec.method == PoolMethod::Hash) {
    for (const SubstructureId id : fp.ids)
      out[id % static_cast<SubstructureId>(spec.dim)] = 1.0;
    return out;
  }
  for (size_t slot = 0; slot < spec.slots.size(); ++slot)
    if (fp.contains(spec.slots[slot])) out[slot] = 1.0;
  return out;
}

std::vector<std::vector<double>> transform_all(
    const PoolSpec& spec, std::span<const FingerprintSet> fps) {
  std::vector<std::vector<double>> out(fps.size());
  for (size_t i = 0; i < fps.size(); ++i) out[i] = transform(spec, fps[i]);
  return out;
}

}  // namespace forge
