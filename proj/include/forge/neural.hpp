//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forge/common.hpp"

namespace forge {

using Vector = std::vector<double>;

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), values(size_t(r) * c, 0.0) {}
  double& at(int r, int c) { return values[size_t(r) * cols + c]; }
  double at(int r, int c) const { return values[size_t(r) * cols + c]; }
};

enum class Activation { ReLU, Arctan, Identity };
enum class Terminal { None, Softmax3, Sigmoid };

struct Layer {
  Matrix weights;
  std::optional<Vector> bias;
  Activation activation = Activation::Identity;
};

struct DenseNet {
  std::vector<Layer> layers;
  Terminal terminal = Terminal::None;

  int input_width() const { return layers.front().weights.cols; }
  int output_width() const { return layers.back().weights.rows; }
  size_t parameter_count() const;

  std::string to_json() const;
  static DenseNet from_json(const std::string& text);
};

// An odd network: no biases, arctan hidden activations, linear last layer.
// O(-v) = -O(v) holds exactly for the pre-terminal output.
bool is_odd_configured(const DenseNet& net);

Vector forward(const DenseNet& net, std::span<const double> x);

double sigmoid(double x);
std::array<double, 3> softmax3(const std::array<double, 3>& logits);

// Twin model: a shared featuriser, a softmax AC head on the componentwise
// maximum of the two embeddings, and an odd PD head on their difference.
struct TwinModel {
  DenseNet featuriser;  // ReLU layers, biases allowed, terminal None
  DenseNet ac_head;     // terminal Softmax3
  DenseNet pd_head;     // odd-configured, terminal Sigmoid

  std::string to_json() const;
  static TwinModel from_json(const std::string& text);
};

// Throws ValidationError when widths or head configurations are invalid.
void validate(const TwinModel& model);

// Seeded uniform init in +-sqrt(6 / (fan_in + fan_out)).
DenseNet make_dense(int input, std::span<const int> hidden, int output,
                    Activation hidden_activation, bool biases,
                    Terminal terminal, Xoshiro256& rng);
TwinModel make_twin(int input, int embedding, int head_hidden,
                    uint64_t seed);

struct TwinOutput {
  std::array<double, 3> ac_probs{};  // strictly positive, sums to 1
  double pd_prob = 0.5;              // strictly inside (0, 1)
};

TwinOutput twin_forward(const TwinModel& model, std::span<const double> fp_i,
                        std::span<const double> fp_j);

struct ClassWeights {
  std::array<double, 3> w_ac{1.0, 1.0, 1.0};  // indexed by AcClass order
  double w_pd = 1.0;
};

// w_ac = n_non / n_class with w_ac(non) = 1; w_pd = 3 n_non / n_mmp.
// All counts must be at least 1.
ClassWeights class_weights(long n_ac, long n_half, long n_non);

// Weighted cross-entropy of the AC head plus weighted binary cross-entropy
// of the PD head, natural logarithm. ac_label indexes the AC class order
// (AC, half-AC, non-AC); pd_label is 0 or 1.
double twin_loss(const TwinModel& model, std::span<const double> fp_i,
                 std::span<const double> fp_j, int ac_label, int pd_label,
                 const ClassWeights& weights);

// Gradients mirror the parameter layout of their nets.
struct NetGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;  // empty vectors for bias-free layers
};

struct TwinGradients {
  NetGradients featuriser;
  NetGradients ac_head;
  NetGradients pd_head;
};

// Analytic gradients of twin_loss for one pair.
TwinGradients twin_backward(const TwinModel& model,
                            std::span<const double> fp_i,
                            std::span<const double> fp_j, int ac_label,
                            int pd_label, const ClassWeights& weights,
                            double* loss_out = nullptr);

// Squared-error regression gradients for a plain dense net.
NetGradients regression_backward(const DenseNet& net,
                                 std::span<const double> x, double target,
                                 double* loss_out = nullptr);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 100;
  uint64_t seed = 0;
};

struct TwinExample {
  Vector fp_i;
  Vector fp_j;
  int ac_label = 2;
  int pd_label = 0;
};

// Adam with seeded shuffling; one loss-trace entry per epoch. Throws
// TrainingDiverged when the loss stops being finite.
std::vector<double> train_twin(TwinModel& model,
                               std::span<const TwinExample> examples,
                               const ClassWeights& weights,
                               const TrainConfig& cfg);

std::vector<double> train_regressor(DenseNet& net,
                                    std::span<const Vector> inputs,
                                    std::span<const double> targets,
                                    const TrainConfig& cfg);

// Drops the final affine layer (and terminal transform): the remaining
// layers become a feature extractor whose output width is the last hidden
// width. Requires at least two layers.
DenseNet extract_nfp(const DenseNet& trained);

}  // namespace forge
