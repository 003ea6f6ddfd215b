//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "forge/ecfp.hpp"

namespace forge {

enum class PoolMethod { Hash, SortSlice, Filter, Mim };

const char* to_string(PoolMethod method);
PoolMethod pool_method_from_string(const std::string& name);

// A fitted substructure-pooling operator of dimension dim. Hash is
// stateless (slot = id mod dim); the other methods carry an ordered slot
// list with pairwise-distinct ids, so their fingerprints are free of bit
// collisions.
struct PoolSpec {
  PoolMethod method = PoolMethod::Hash;
  int dim = 0;
  std::vector<SubstructureId> slots;

  std::string to_json() const;
  static PoolSpec from_json(const std::string& text);
};

struct FitContext {
  std::span<const FingerprintSet> train_fps;
  std::span<const double> labels = {};  // empty when unlabeled
};

PoolSpec fit_hash(int dim);

// Slots are the most frequent training substructures: frequency descending,
// ties to the larger id. Shorter vocabularies zero-pad at transform time.
PoolSpec fit_sort_and_slice(const FitContext& ctx, int dim);

// chi-squared filtering: drop support <= 1, drop non-closed ids, then keep
// the dim ids most dependent on the (binarized) label. The paper's random
// removals are made deterministic: the largest id goes first.
PoolSpec fit_filter(const FitContext& ctx, int dim);

// Mutual-information maximisation: deduplicate identical support sets
// (keeping the smallest id), then keep the dim ids with the highest mutual
// information, ties to the larger id.
PoolSpec fit_mim(const FitContext& ctx, int dim);

std::vector<double> transform(const PoolSpec& spec, const FingerprintSet& fp);
std::vector<std::vector<double>> transform_all(
    const PoolSpec& spec, std::span<const FingerprintSet> fps);

// Binary information entropy, log base 2, with 0*log2(0) = 0.
double entropy(double p);

// Plug-in mutual information between two binary samples, clamped at 0.
double mutual_information(std::span<const int> c_sample,
                          std::span<const int> g_sample);

// Pearson chi-squared independence test on a 2x2 table, 1 dof, no
// continuity correction; degenerate margins give p = 1.
double chi2_pvalue(const std::array<std::array<long, 2>, 2>& table);

// label <= median -> 0, else 1; even-length medians are midpoints.
std::vector<int> binarize_labels(std::span<const double> labels);

}  // namespace forge
