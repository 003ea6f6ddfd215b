//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

#include "forge/mmp.hpp"

namespace forge {

enum class KnnWeighting { Uniform, InverseDistance };

struct KnnModel {
  std::vector<std::vector<double>> points;
  std::vector<double> labels;
  int k = 1;
  double minkowski_p = 2.0;
  KnnWeighting weighting = KnnWeighting::Uniform;
};

KnnModel knn_fit(std::vector<std::vector<double>> points,
                 std::vector<double> labels, int k, double minkowski_p,
                 KnnWeighting weighting);

// Weighted mean of the k nearest labels under the Minkowski-p metric;
// distance ties break toward the smaller training index, and zero-distance
// matches dominate inverse-distance weighting (their labels are averaged).
double knn_predict(const KnnModel& model, std::span<const double> x);

struct AcThresholds {
  double d_crit = 1.5;
  double ternary_lower = 1.0;
  double ternary_upper = 2.0;
};

// Binary rule: |q_i - q_j| <= d_crit is Non-AC, anything above is AC.
AcClass qsar_ac_binary(double q_i, double q_j, const AcThresholds& t);

// Ternary rule: <= lower Non-AC, >= upper AC, half-AC between.
AcClass qsar_ac_ternary(double q_i, double q_j, const AcThresholds& t);

// Left iff q_i > q_j; ties go Right.
PdLabel qsar_pd(double q_i, double q_j);

}  // namespace forge
