//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/split.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "forge/common.hpp"

using namespace forge;

namespace {

Mmp make_mmp(int i, int j, std::string core) {
  Mmp m;
  m.i = i;
  m.j = j;
  m.core = std::move(core);
  return m;
}

void check_invariants(const SplitPlan& plan, int n,
                      const std::vector<Mmp>& mmps) {
  std::set<int> compounds(plan.d_train.begin(), plan.d_train.end());
  for (const int c : plan.d_test) CHECK(compounds.insert(c).second);
  CHECK(compounds.size() == static_cast<size_t>(n));

  std::set<int> assigned;
  for (const int m : plan.m_train) CHECK(assigned.insert(m).second);
  for (const int m : plan.m_inter) CHECK(assigned.insert(m).second);
  for (const int m : plan.m_test) CHECK(assigned.insert(m).second);
  CHECK(assigned.size() == mmps.size());

  const std::set<int> test_set(plan.m_test.begin(), plan.m_test.end());
  for (const int m : plan.m_cores) {
    CHECK(test_set.count(m) == 1);
    CHECK(plan.c_train.count(mmps[m].core) == 0);
  }
  const std::set<int> train_compounds(plan.d_train.begin(),
                                      plan.d_train.end());
  for (const int m : plan.m_train) {
    CHECK(train_compounds.count(mmps[m].i) == 1);
    CHECK(train_compounds.count(mmps[m].j) == 1);
  }
  for (const int m : plan.m_test) {
    CHECK(train_compounds.count(mmps[m].i) == 0);
    CHECK(train_compounds.count(mmps[m].j) == 0);
  }
  for (const int m : plan.m_inter) {
    const int in_train = train_compounds.count(mmps[m].i) +
                         train_compounds.count(mmps[m].j);
    CHECK(in_train == 1);
  }
}

}  // namespace

TEST_CASE("kfold produces balanced disjoint covering folds") {
  const auto folds = random_kfold(4, 2, 0);
  REQUIRE(folds.size() == 2);
  CHECK(folds[0].size() == 2);
  CHECK(folds[1].size() == 2);
  std::set<int> all;
  for (const auto& fold : folds)
    for (const int idx : fold) CHECK(all.insert(idx).second);
  CHECK(all == std::set<int>{0, 1, 2, 3});

  const auto uneven = random_kfold(5, 2, 1);
  std::multiset<size_t> sizes{uneven[0].size(), uneven[1].size()};
  CHECK(sizes == std::multiset<size_t>{2, 3});

  CHECK_THROWS_AS(random_kfold(5, 1, 0), ValidationError);
  CHECK_THROWS_AS(random_kfold(1, 2, 0), ValidationError);
}

TEST_CASE("kfold is deterministic in the seed") {
  const auto a = random_kfold(100, 3, 42);
  const auto b = random_kfold(100, 3, 42);
  CHECK(a == b);
  const auto c = random_kfold(100, 3, 43);
  CHECK(a != c);
}

TEST_CASE("stratified folds balance the classes") {
  std::vector<int> labels(40, 0);
  for (int i = 0; i < 8; ++i) labels[i] = 1;
  const auto folds = stratified_kfold(labels, 2, 7);
  for (const auto& fold : folds) {
    int positives = 0;
    for (const int idx : fold) positives += labels[idx];
    CHECK(positives == 4);
  }
}

TEST_CASE("split assignment follows compound membership") {
  const std::vector<Mmp> mmps{
      make_mmp(0, 1, "core-a"),
      make_mmp(0, 2, "core-a"),
      make_mmp(2, 3, "core-b"),
      make_mmp(4, 5, "core-c"),
  };

  SUBCASE("all compounds in training") {
    const SplitPlan plan = build_split({0, 1, 2, 3, 4, 5}, {}, mmps);
    CHECK(plan.m_train.size() == 4);
    CHECK(plan.m_test.empty());
    CHECK(plan.m_inter.empty());
    CHECK(plan.m_cores.empty());
  }

  SUBCASE("one endpoint out puts the pair in the inter set") {
    const SplitPlan plan = build_split({0, 2, 3, 4, 5}, {1}, mmps);
    CHECK(plan.m_inter == std::vector<int>{0});
    CHECK(plan.m_train == std::vector<int>{1, 2, 3});
  }

  SUBCASE("a core seen only among test-test pairs lands in m_cores") {
    const SplitPlan plan = build_split({0, 1, 2, 3}, {4, 5}, mmps);
    CHECK(plan.m_test == std::vector<int>{3});
    CHECK(plan.m_cores == std::vector<int>{3});
    // Same plan but the core also appears in an inter pair: not novel.
    const std::vector<Mmp> extra{
        make_mmp(0, 1, "core-a"), make_mmp(4, 5, "core-c"),
        make_mmp(3, 4, "core-c")};
    const SplitPlan plan2 = build_split({0, 1, 2, 3}, {4, 5}, extra);
    CHECK(plan2.m_cores.empty());
  }
}

TEST_CASE("repeated cv emits one plan per seed and fold") {
  const std::vector<Mmp> mmps{make_mmp(0, 1, "x"), make_mmp(2, 3, "y")};
  const std::vector<uint64_t> seeds{0, 1, 2};
  const auto plans = repeated_cv(10, mmps, 2, seeds);
  REQUIRE(plans.size() == 6);
  for (const auto& plan : plans) check_invariants(plan, 10, mmps);

  const auto again = repeated_cv(10, mmps, 2, seeds);
  for (size_t i = 0; i < plans.size(); ++i)
    CHECK(plans[i].to_json() == again[i].to_json());
}

TEST_CASE("plan invariants hold over randomized mmp graphs") {
  Xoshiro256 rng(79);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 6 + static_cast<int>(rng.next_below(30));
    std::vector<Mmp> mmps;
    const int pair_count = static_cast<int>(rng.next_below(40));
    for (int p = 0; p < pair_count; ++p) {
      const int i = static_cast<int>(rng.next_below(n));
      int j = static_cast<int>(rng.next_below(n));
      if (i == j) continue;
      mmps.push_back(make_mmp(std::min(i, j), std::max(i, j),
                              "core-" + std::to_string(rng.next_below(6))));
    }
    const int k = 2 + static_cast<int>(rng.next_below(3));
    const std::vector<uint64_t> seeds{rng.next()};
    for (const auto& plan : repeated_cv(n, mmps, k, seeds))
      check_invariants(plan, n, mmps);
  }
}

TEST_CASE("two-fold splitting approaches the 1:2:1 mmp ratio") {
  Xoshiro256 rng(83);
  const int n = 500;
  std::vector<Mmp> mmps;
  while (mmps.size() < 2000) {
    const int i = static_cast<int>(rng.next_below(n));
    const int j = static_cast<int>(rng.next_below(n));
    if (i == j) continue;
    mmps.push_back(make_mmp(std::min(i, j), std::max(i, j), "c"));
  }
  double train_share = 0.0, inter_share = 0.0, test_share = 0.0;
  const std::vector<uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int plan_count = 0;
  for (const auto& plan : repeated_cv(n, mmps, 2, seeds)) {
    const double total = static_cast<double>(mmps.size());
    train_share += plan.m_train.size() / total;
    inter_share += plan.m_inter.size() / total;
    test_share += plan.m_test.size() / total;
    ++plan_count;
  }
  train_share /= plan_count;
  inter_share /= plan_count;
  test_share /= plan_count;
  CHECK(train_share == doctest::Approx(0.25).epsilon(0.2));
  CHECK(inter_share == doctest::Approx(0.50).epsilon(0.2));
  CHECK(test_share == doctest::Approx(0.25).epsilon(0.2));
}

TEST_CASE("plans round-trip through json") {
  const std::vector<Mmp> mmps{make_mmp(0, 1, "x")};
  SplitPlan plan = build_split({0, 2}, {1, 3}, mmps);
  plan.seed = 9;
  plan.fold = 1;
  const SplitPlan loaded = SplitPlan::from_json(plan.to_json());
  CHECK(loaded.to_json() == plan.to_json());
  CHECK(loaded.seed == 9);
  CHECK(loaded.c_train == plan.c_train);
}
