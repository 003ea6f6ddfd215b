//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/split.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "forge/common.hpp"
#include "json.hpp"

namespace forge {

std::string SplitPlan::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["fold"] = fold;
  j["d_train"] = d_train;
  j["d_test"] = d_test;
  j["m_train"] = m_train;
  j["m_inter"] = m_inter;
  j["m_test"] = m_test;
  j["m_cores"] = m_cores;
  j["c_train"] = std::vector<std::string>(c_train.begin(), c_train.end());
  return j.dump();
}

SplitPlan SplitPlan::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad split plan: ") + e.what());
  }
  SplitPlan plan;
  plan.seed = j.at("seed").get<uint64_t>();
  plan.fold = j.at("fold").get<int>();
  plan.d_train = j.at("d_train").get<std::vector<int>>();
  plan.d_test = j.at("d_test").get<std::vector<int>>();
  plan.m_train = j.at("m_train").get<std::vector<int>>();
  plan.m_inter = j.at("m_inter").get<std::vector<int>>();
  plan.m_test = j.at("m_test").get<std::vector<int>>();
  plan.m_cores = j.at("m_cores").get<std::vector<int>>();
  for (const auto& core : j.at("c_train"))
    plan.c_train.insert(core.get<std::string>());
  return plan;
}

std::vector<std::vector<int>> random_kfold(int n, int k, uint64_t seed) {
  if (k < 2) throw ValidationError("random_kfold: k must be at least 2");
  if (n < k) throw ValidationError("random_kfold: n must be at least k");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Xoshiro256 rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> folds(k);
  const int base = n / k;
  const int remainder = n % k;
  int cursor = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < remainder ? 1 : 0);
    folds[f].assign(order.begin() + cursor, order.begin() + cursor + size);
    std::sort(folds[f].begin(), folds[f].end());
    cursor += size;
  }
  return folds;
}

std::vector<std::vector<int>> stratified_kfold(std::span<const int> labels,
                                               int k, uint64_t seed) {
  if (k < 2) throw ValidationError("stratified_kfold: k must be at least 2");
  if (static_cast<int>(labels.size()) < k)
    throw ValidationError("stratified_kfold: n must be at least k");
  std::map<int, std::vector<int>> by_class;
  for (size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(static_cast<int>(i));
  Xoshiro256 rng(seed);
  // Shuffle within each class and deal every class round-robin across the
  // folds, so each class splits as evenly as its size allows.
  std::vector<std::vector<int>> folds(k);
  int offset = 0;
  for (auto& [label, members] : by_class) {
    (void)label;
    rng.shuffle(members);
    for (size_t m = 0; m < members.size(); ++m)
      folds[(offset + m) % k].push_back(members[m]);
    offset = (offset + static_cast<int>(members.size())) % k;
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

SplitPlan build_split(std::vector<int> d_train, std::vector<int> d_test,
                      std::span<const Mmp> mmps) {
  SplitPlan plan;
  plan.d_train = std::move(d_train);
  plan.d_test = std::move(d_test);
  std::sort(plan.d_train.begin(), plan.d_train.end());
  std::sort(plan.d_test.begin(), plan.d_test.end());

  auto in_train = [&](int compound) {
    return std::binary_search(plan.d_train.begin(), plan.d_train.end(),
                              compound);
  };
  for (size_t m = 0; m < mmps.size(); ++m) {
    const bool i_train = in_train(mmps[m].i);
    const bool j_train = in_train(mmps[m].j);
    if (i_train && j_train) {
      plan.m_train.push_back(static_cast<int>(m));
      plan.c_train.insert(mmps[m].core);
    } else if (!i_train && !j_train) {
      plan.m_test.push_back(static_cast<int>(m));
    } else {
      plan.m_inter.push_back(static_cast<int>(m));
      plan.c_train.insert(mmps[m].core);
    }
  }
  for (const int m : plan.m_test)
    if (plan.c_train.count(mmps[m].core) == 0)
      plan.m_cores.push_back(m);
  return plan;
}

std::vector<SplitPlan> repeated_cv(int n, std::span<const Mmp> mmps, int k,
                                   std::span<const uint64_t> seeds) {
  std::vector<SplitPlan> plans;
  plans.reserve(seeds.size() * static_cast<size_t>(k));
  for (const uint64_t seed : seeds) {
    const auto folds = random_kfold(n, k, seed);
    for (int f = 0; f < k; ++f) {
      std::vector<int> train;
      for (int other = 0; other < k; ++other) {
        if (other == f) continue;
        train.insert(train.end(), folds[other].begin(), folds[other].end());
      }
      SplitPlan plan = build_split(std::move(train), folds[f], mmps);
      plan.seed = seed;
      plan.fold = f;
      plans.push_back(std::move(plan));
    }
  }
  return plans;
}

}  // namespace forge
