//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/predictors.hpp"

#include <algorithm>
#include <cmath>

#include "forge/common.hpp"

namespace forge {

KnnModel knn_fit(std::vector<std::vector<double>> points,
                 std::vector<double> labels, int k, double minkowski_p,
                 KnnWeighting weighting) {
  if (points.size() != labels.size())
    throw ValidationError("knn_fit: point/label length mismatch");
  if (points.empty()) throw ValidationError("knn_fit: empty training set");
  if (k < 1 || static_cast<size_t>(k) > points.size())
    throw ValidationError("knn_fit: k out of range");
  if (minkowski_p < 1.0)
    throw ValidationError("knn_fit: Minkowski power must be at least 1");
  for (const auto& p : points)
    if (p.size() != points.front().size())
      throw ValidationError("knn_fit: inconsistent dimensions");
  return KnnModel{std::move(points), std::move(labels), k, minkowski_p,
                  weighting};
}

namespace {

double minkowski(std::span<const double> a, std::span<const double> b,
                 double p) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    sum += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(sum, 1.0 / p);
}

}  // namespace

double knn_predict(const KnnModel& model, std::span<const double> x) {
  if (x.size() != model.points.front().size())
    throw ValidationError("knn_predict: query dimension mismatch");
  std::vector<std::pair<double, size_t>> distances;
  distances.reserve(model.points.size());
  for (size_t i = 0; i < model.points.size(); ++i)
    distances.emplace_back(minkowski(model.points[i], x, model.minkowski_p),
                           i);
  std::sort(distances.begin(), distances.end());
  distances.resize(static_cast<size_t>(model.k));

  if (model.weighting == KnnWeighting::InverseDistance) {
    // Exact matches dominate: average their labels directly.
    double zero_sum = 0.0;
    int zero_count = 0;
    for (const auto& [dist, idx] : distances) {
      if (dist == 0.0) {
        zero_sum += model.labels[idx];
        ++zero_count;
      }
    }
    if (zero_count > 0) return zero_sum / zero_count;
    double weighted = 0.0, norm = 0.0;
    for (const auto& [dist, idx] : distances) {
      const double w = 1.0 / dist;
      weighted += w * model.labels[idx];
      norm += w;
    }
    return weighted / norm;
  }

  double sum = 0.0;
  for (const auto& [dist, idx] : distances) {
    (void)dist;
    sum += model.labels[idx];
  }
  return sum / static_cast<double>(model.k);
}

AcClass qsar_ac_binary(double q_i, double q_j, const AcThresholds& t) {
  return std::abs(q_i - q_j) <= t.d_crit ? AcClass::NonAC : AcClass::AC;
}

AcClass qsar_ac_ternary(double q_i, double q_j, const AcThresholds& t) {
  const double d = std::abs(q_i - q_j);
  if (d <= t.ternary_lower) return AcClass::NonAC;
  if (d >= t.ternary_upper) return AcClass::AC;
  return AcClass::HalfAC;
}

PdLabel qsar_pd(double q_i, double q_j) {
  return q_i > q_j ? PdLabel::Left : PdLabel::Right;
}

}  // namespace forge
