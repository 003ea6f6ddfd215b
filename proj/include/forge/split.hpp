//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "forge/mmp.hpp"

namespace forge {

// Six-component split: the compound-level partition plus the derived MMP
// sets. m_* hold indices into the MMP list; m_cores is the subset of
// m_test whose core never appears in a training-side MMP.
struct SplitPlan {
  uint64_t seed = 0;
  int fold = 0;
  std::vector<int> d_train;
  std::vector<int> d_test;
  std::vector<int> m_train;
  std::vector<int> m_inter;
  std::vector<int> m_test;
  std::vector<int> m_cores;
  std::set<std::string> c_train;

  std::string to_json() const;
  static SplitPlan from_json(const std::string& text);
};

// Fisher-Yates over 0..n-1 driven by xoshiro256**; fold sizes differ by at
// most one. Throws on k < 2 or n < k.
std::vector<std::vector<int>> random_kfold(int n, int k, uint64_t seed);

// Stratified variant for classification labels: shuffles within each class
// and deals the interleaved sequence round-robin across folds.
std::vector<std::vector<int>> stratified_kfold(std::span<const int> labels,
                                               int k, uint64_t seed);

SplitPlan build_split(std::vector<int> d_train, std::vector<int> d_test,
                      std::span<const Mmp> mmps);

// One plan per (seed, fold), seed-major order.
std::vector<SplitPlan> repeated_cv(int n, std::span<const Mmp> mmps, int k,
                                   std::span<const uint64_t> seeds);

}  // namespace forge
