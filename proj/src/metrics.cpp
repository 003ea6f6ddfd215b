//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "forge/common.hpp"

namespace forge {

long TernaryConfusion::truth_total(int cls) const {
  return counts[cls][0] + counts[cls][1] + counts[cls][2];
}

long TernaryConfusion::predicted_total(int cls) const {
  return counts[0][cls] + counts[1][cls] + counts[2][cls];
}

long TernaryConfusion::total() const {
  long n = 0;
  for (const auto& row : counts) for (const long c : row) n += c;
  return n;
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size())
    throw ValidationError("mae: length mismatch");
  if (pred.empty()) throw ValidationError("mae: empty input");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i)
    sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size());
}

double accuracy(long correct, long total) {
  if (total <= 0) throw ValidationError("accuracy: no predictions");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double mcc_binary(const BinaryConfusion& c) {
  if (c.tp + c.fp == 0) return 0.0;
  const double factors[4] = {
      static_cast<double>(c.tp + c.fp), static_cast<double>(c.tp + c.fn),
      static_cast<double>(c.tn + c.fp), static_cast<double>(c.tn + c.fn)};
  double denom = 1.0;
  for (const double f : factors) {
    if (f == 0.0) return 0.0;
    denom *= f;
  }
  const double num = static_cast<double>(c.tp) * static_cast<double>(c.tn) -
                     static_cast<double>(c.fp) * static_cast<double>(c.fn);
  return num / std::sqrt(denom);
}

double mcc_multiclass(const TernaryConfusion& c) {
  const double n = static_cast<double>(c.total());
  double correct = 0.0, cross = 0.0, pred_sq = 0.0, truth_sq = 0.0;
  for (int cls = 0; cls < 3; ++cls) {
    correct += static_cast<double>(c.correct(cls));
    const double nc = static_cast<double>(c.truth_total(cls));
    const double pc = static_cast<double>(c.predicted_total(cls));
    cross += nc * pc;
    pred_sq += pc * pc;
    truth_sq += nc * nc;
  }
  const double left = n * n - pred_sq;
  const double right = n * n - truth_sq;
  if (left <= 0.0 || right <= 0.0) return 0.0;
  return (n * correct - cross) / std::sqrt(left * right);
}

std::optional<double> sensitivity(const TernaryConfusion& c, int cls) {
  const long members = c.truth_total(cls);
  if (members == 0) return std::nullopt;
  return static_cast<double>(c.correct(cls)) / static_cast<double>(members);
}

std::optional<double> precision(const TernaryConfusion& c, int cls) {
  const long predicted = c.predicted_total(cls);
  if (predicted == 0) return std::nullopt;
  return static_cast<double>(c.correct(cls)) /
         static_cast<double>(predicted);
}

std::optional<double> sensitivity(const BinaryConfusion& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> precision(const BinaryConfusion& c) {
  if (c.tp + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw ValidationError("auroc: length mismatch");
  const long positives = std::count(labels.begin(), labels.end(), 1);
  const long negatives = static_cast<long>(labels.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw ValidationError("auroc: needs both classes");

  // Average ranks; ties share the mean rank of their block.
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return scores[x] < scores[y];
  });
  std::vector<double> rank(scores.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() &&
           scores[order[j + 1]] == scores[order[i]])
      ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) rank[order[k]] = mean_rank;
    i = j + 1;
  }
  double positive_rank_sum = 0.0;
  for (size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == 1) positive_rank_sum += rank[k];
  const double u = positive_rank_sum -
                   static_cast<double>(positives) *
                       (static_cast<double>(positives) + 1.0) / 2.0;
  return u / (static_cast<double>(positives) *
              static_cast<double>(negatives));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw ValidationError("auprc: length mismatch");
  const long positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0) throw ValidationError("auprc: no positives");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return scores[x] > scores[y];
  });
  double sum = 0.0;
  long seen_pos = 0;
  for (size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 1) {
      ++seen_pos;
      sum += static_cast<double>(seen_pos) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

}  // namespace forge
