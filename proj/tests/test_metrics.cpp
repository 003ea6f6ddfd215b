//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/metrics.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "forge/common.hpp"

using namespace forge;

namespace {

// Embeds binary counts into an empty-third-class ternary matrix with
// class 0 = positive, class 1 = negative.
TernaryConfusion embed(const BinaryConfusion& c) {
  TernaryConfusion t;
  t.counts[0][0] = c.tp;
  t.counts[0][1] = c.fn;
  t.counts[1][0] = c.fp;
  t.counts[1][1] = c.tn;
  return t;
}

// Direct pairwise AUROC: fraction of positive/negative pairs ordered
// correctly, half credit on ties.
double pairwise_auroc(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("mae basics") {
  const std::vector<double> truth{1, 2, 3};
  CHECK(mae(truth, truth) == 0.0);
  const std::vector<double> shifted{2, 3, 4};
  CHECK(mae(shifted, truth) == doctest::Approx(1.0));
  const std::vector<double> pred{1, 2};
  const std::vector<double> t2{2, 4};
  CHECK(mae(pred, t2) == doctest::Approx(1.5));
  CHECK_THROWS_AS(mae(pred, truth), ValidationError);
}

TEST_CASE("binary MCC values and conventions") {
  CHECK(mcc_binary({50, 50, 0, 0}) == doctest::Approx(1.0));
  CHECK(mcc_binary({25, 25, 25, 25}) == doctest::Approx(0.0));
  CHECK(mcc_binary({90, 80, 20, 10}) ==
        doctest::Approx(7000.0 / std::sqrt(110.0 * 100 * 100 * 90))
            .epsilon(1e-9));
  // No positive predictions: the convention pins the value to 0.
  CHECK(mcc_binary({0, 90, 0, 10}) == 0.0);
  // Other degenerate denominators also return 0.
  CHECK(mcc_binary({10, 0, 90, 0}) == 0.0);
}

TEST_CASE("binary MCC is symmetric under class flips") {
  Xoshiro256 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    BinaryConfusion c{static_cast<long>(rng.next_below(50)),
                      static_cast<long>(rng.next_below(50)),
                      static_cast<long>(rng.next_below(50)),
                      static_cast<long>(rng.next_below(50))};
    const BinaryConfusion flipped{c.tn, c.tp, c.fn, c.fp};
    if (c.tp + c.fp == 0 || flipped.tp + flipped.fp == 0) continue;
    CHECK(mcc_binary(c) == doctest::Approx(mcc_binary(flipped)));
  }
}

TEST_CASE("multiclass MCC on reference matrices") {
  TernaryConfusion perfect;
  perfect.counts = {{{10, 0, 0}, {0, 7, 0}, {0, 0, 3}}};
  CHECK(mcc_multiclass(perfect) == doctest::Approx(1.0));

  // Everything predicted as one class on balanced truth: normalizer is 0.
  TernaryConfusion collapsed;
  collapsed.counts = {{{5, 0, 0}, {5, 0, 0}, {5, 0, 0}}};
  CHECK(mcc_multiclass(collapsed) == 0.0);
}

TEST_CASE("multiclass MCC equals binary MCC on two-class embeddings") {
  Xoshiro256 rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    BinaryConfusion c{static_cast<long>(rng.next_below(40)),
                      static_cast<long>(rng.next_below(40)),
                      static_cast<long>(rng.next_below(40)),
                      static_cast<long>(rng.next_below(40))};
    if (c.tp + c.tn + c.fp + c.fn == 0) continue;
    if (c.tp + c.fp == 0) continue;  // binary convention kicks in
    const double expected = mcc_binary(c);
    // Guard against the remaining degenerate binary denominators, where
    // the conventions differ by construction.
    if (c.tp + c.fn == 0 || c.tn + c.fp == 0 || c.tn + c.fn == 0) continue;
    CHECK(mcc_multiclass(embed(c)) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("per-class sensitivity and precision with absent values") {
  TernaryConfusion perfect;
  perfect.counts = {{{4, 0, 0}, {0, 4, 0}, {0, 0, 4}}};
  for (int cls = 0; cls < 3; ++cls) {
    CHECK(sensitivity(perfect, cls) == 1.0);
    CHECK(precision(perfect, cls) == 1.0);
  }

  TernaryConfusion skewed;
  skewed.counts = {{{0, 5, 0}, {0, 5, 0}, {0, 5, 0}}};
  CHECK(precision(skewed, 0) == std::nullopt);   // class 0 never predicted
  CHECK(sensitivity(skewed, 0) == 0.0);          // but has members

  TernaryConfusion empty_class;
  empty_class.counts = {{{0, 0, 0}, {3, 1, 0}, {0, 0, 2}}};
  CHECK(sensitivity(empty_class, 0) == std::nullopt);  // no members
}

TEST_CASE("auroc reference values") {
  const std::vector<double> ordered{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> labels{0, 0, 1, 1};
  CHECK(auroc(ordered, labels) == doctest::Approx(1.0));

  const std::vector<double> example{0.1, 0.4, 0.35, 0.8};
  CHECK(auroc(example, labels) == doctest::Approx(0.75));

  const std::vector<int> single{1, 1, 1, 1};
  CHECK_THROWS_AS(auroc(ordered, single), ValidationError);
}

TEST_CASE("auroc equals the pairwise comparison oracle") {
  Xoshiro256 rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 5 + rng.next_below(40);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has0 = false, has1 = false;
    for (size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.next_below(10)) / 10.0;  // ties
      labels[i] = static_cast<int>(rng.next_below(2));
      (labels[i] ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    CHECK(auroc(scores, labels) ==
          doctest::Approx(pairwise_auroc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("auroc is invariant under monotone score transforms") {
  Xoshiro256 rng(53);
  std::vector<double> scores(30);
  std::vector<int> labels(30);
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.next_double();
    labels[i] = static_cast<int>(rng.next_below(2));
  }
  labels[0] = 0;
  labels[1] = 1;
  const double reference = auroc(scores, labels);
  std::vector<double> transformed(scores.size());
  for (size_t i = 0; i < scores.size(); ++i)
    transformed[i] = std::exp(3.0 * scores[i]) + 7.0;
  CHECK(auroc(transformed, labels) == doctest::Approx(reference));
}

TEST_CASE("auprc step-wise reference values") {
  const std::vector<double> perfect{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  CHECK(auprc(perfect, labels) == doctest::Approx(1.0));

  const std::vector<double> last{0.9, 0.8, 0.7, 0.1};
  const std::vector<int> single_pos{0, 0, 0, 1};
  CHECK(auprc(last, single_pos) == doctest::Approx(0.25));

  const std::vector<double> mixed{0.9, 0.8, 0.7};
  const std::vector<int> interleaved{1, 0, 1};
  CHECK(auprc(mixed, interleaved) ==
        doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));

  const std::vector<int> none{0, 0, 0};
  CHECK_THROWS_AS(auprc(mixed, none), ValidationError);
}
