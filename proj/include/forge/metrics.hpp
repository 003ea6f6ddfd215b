//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <optional>
#include <span>

namespace forge {

struct BinaryConfusion {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;
};

// counts[truth][predicted] over three classes.
struct TernaryConfusion {
  std::array<std::array<long, 3>, 3> counts{};

  long truth_total(int cls) const;
  long predicted_total(int cls) const;
  long correct(int cls) const { return counts[cls][cls]; }
  long total() const;
};

double mae(std::span<const double> pred, std::span<const double> truth);

double accuracy(long correct, long total);

// (TP*TN - FP*FN)/sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN)); 0 when TP+FP = 0 or
// any other denominator factor vanishes.
double mcc_binary(const BinaryConfusion& c);

// Multi-class MCC; 0 when either normalizer term vanishes.
double mcc_multiclass(const TernaryConfusion& c);

// Absent (nullopt) when the denominator is 0: sensitivity needs class
// members, precision needs predictions of the class. Never NaN.
std::optional<double> sensitivity(const TernaryConfusion& c, int cls);
std::optional<double> precision(const TernaryConfusion& c, int cls);
std::optional<double> sensitivity(const BinaryConfusion& c);
std::optional<double> precision(const BinaryConfusion& c);

// Mann-Whitney formulation with half credit for ties; labels must contain
// both classes.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Step-wise average precision (not trapezoidal); ties broken by input
// order. Requires at least one positive.
double auprc(std::span<const double> scores, std::span<const int> labels);

}  // namespace forge
