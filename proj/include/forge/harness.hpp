//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forge/ecfp.hpp"
#include "forge/mmp.hpp"
#include "forge/molgraph.hpp"
#include "forge/neural.hpp"
#include "forge/pooling.hpp"
#include "forge/predictors.hpp"
#include "forge/split.hpp"

namespace forge {

enum class ActivityUnits { Raw, PLog };

struct DatasetRecord {
  std::string id;
  std::string smiles;
  double label = 0.0;
};

struct Dataset {
  std::vector<DatasetRecord> records;
};

// CSV with a header; requires smiles and label columns, takes an optional
// id column. Validation errors carry file and line context.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& dataset);

struct EcfpConfig {
  int radius = 2;
  AtomInvariants invariants = AtomInvariants::Standard;
  bool use_chirality = false;
};

struct PoolConfig {
  PoolMethod method = PoolMethod::SortSlice;
  int dim = 64;
};

struct SplitConfig {
  int k = 2;
  std::vector<uint64_t> seeds{0, 1, 2};
};

struct ModelConfig {
  std::string type = "knn";  // knn | mlp | twin
  // knn settings
  int knn_k = 3;
  double minkowski_p = 2.0;
  KnnWeighting knn_weighting = KnnWeighting::InverseDistance;
  // mlp settings
  std::vector<int> hidden{64};
  // twin settings
  int embedding = 32;
  int head_hidden = 16;
  bool use_nfp = false;
  // shared training settings (mlp and twin)
  TrainConfig train;
};

struct ExperimentConfig {
  std::string dataset_path;
  ActivityUnits units = ActivityUnits::PLog;
  EcfpConfig ecfp;
  PoolConfig pool;
  SplitConfig split;
  ModelConfig model;
  AcThresholds thresholds;
  std::string output_path;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
};

// Cleaned, unit-converted, parsed dataset; activities are -log10 units.
struct PreparedDataset {
  std::vector<std::string> ids;
  std::vector<std::string> smiles;
  std::vector<double> activities;
  std::vector<MolGraph> graphs;
  std::vector<DroppedRecord> dropped;
};

PreparedDataset prepare_dataset(const Dataset& raw, ActivityUnits units);

// Parallel across molecules, bounded by FORGE_THREADS.
std::vector<FingerprintSet> fingerprint_dataset(std::span<const MolGraph> gs,
                                                const EcfpConfig& cfg);

PoolSpec fit_pool(const PoolConfig& cfg, const FitContext& ctx);

struct TrainedModel {
  std::string type;
  std::optional<KnnModel> knn;
  std::optional<DenseNet> mlp;
  std::optional<TwinModel> twin;
  std::optional<DenseNet> nfp;  // feature extractor, twin + use_nfp only

  std::string to_json() const;
  static TrainedModel from_json(const std::string& text);
};

// Metrics for one MMP set; every value can be absent (null in JSON).
struct MmpSetMetrics {
  std::optional<double> mcc;
  std::array<std::optional<double>, 3> sensitivity;  // AC, half-AC, non-AC
  std::array<std::optional<double>, 3> precision;
  std::optional<double> pd_accuracy;
  std::optional<double> pd_accuracy_predicted_ac;
  std::optional<double> pd_accuracy_predicted_half_ac;
};

struct PlanResult {
  uint64_t seed = 0;
  int fold = 0;
  std::optional<double> mae;
  MmpSetMetrics inter;
  MmpSetMetrics test;
  MmpSetMetrics cores;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string timestamp;
  std::vector<PlanResult> plans;
  PlanResult mean;  // seed/fold unused
  PlanResult sd;

  std::string to_json(bool include_timestamp = true) const;
};

TrainedModel train_plan_model(const ExperimentConfig& cfg,
                              const SplitPlan& plan,
                              std::span<const std::vector<double>> vectors,
                              std::span<const double> activities,
                              std::span<const Mmp> mmps);

PlanResult evaluate_plan(const ExperimentConfig& cfg, const SplitPlan& plan,
                         std::span<const std::vector<double>> vectors,
                         std::span<const double> activities,
                         std::span<const Mmp> mmps,
                         const TrainedModel& model);

// The full pipeline: clean, fingerprint, find MMPs, split, fit pooling per
// plan, train, evaluate, aggregate. Deterministic given the config.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// The bundled synthetic SAR generator. Every molecule is one scaffold with
// three substitution sites; each site carries a label-relevant family group
// (20 families across the sites, additive contributions) plus an inert
// low-frequency tail. Molecules arise by single-site mutations of earlier
// ones, so analog pairs are plentiful. Labels are -log10 units with
// Gaussian noise.
Dataset generate_toy_dataset(uint64_t seed, int molecule_count = 60);

void write_mmp_csv(const std::string& path, std::span<const Mmp> mmps);
std::vector<Mmp> read_mmp_csv(const std::string& path);

// Write-temp-then-rename.
void atomic_write(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace forge
