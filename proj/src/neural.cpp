//
// Project MolForge - Copyright 2026 MolForge Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "forge/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace forge {

size_t DenseNet::parameter_count() const {
  size_t n = 0;
  for (const auto& layer : layers) {
    n += layer.weights.values.size();
    if (layer.bias) n += layer.bias->size();
  }
  return n;
}

bool is_odd_configured(const DenseNet& net) {
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& layer = net.layers[i];
    if (layer.bias) return false;
    const bool last = i + 1 == net.layers.size();
    if (last && layer.activation != Activation::Identity) return false;
    if (!last && layer.activation != Activation::Arctan) return false;
  }
  return true;
}

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Arctan: return std::atan(z);
    case Activation::Identity: return z;
  }
  return z;
}

double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Arctan: return 1.0 / (1.0 + z * z);
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

void check_widths(const DenseNet& net) {
  for (size_t i = 1; i < net.layers.size(); ++i)
    if (net.layers[i].weights.cols != net.layers[i - 1].weights.rows)
      throw ValidationError("incompatible consecutive layer widths");
}

// Pre-activation values per layer; the trace is everything backward needs.
struct Trace {
  std::vector<Vector> inputs;  // input to each layer
  std::vector<Vector> pre;     // pre-activation per layer
  Vector output;               // post-activation of the last layer
};

Trace forward_trace(const DenseNet& net, std::span<const double> x) {
  if (net.layers.empty()) throw ValidationError("empty network");
  if (static_cast<int>(x.size()) != net.input_width())
    throw ValidationError("input width mismatch");
  Trace trace;
  Vector current(x.begin(), x.end());
  for (const Layer& layer : net.layers) {
    trace.inputs.push_back(current);
    Vector pre(layer.weights.rows, 0.0);
    for (int r = 0; r < layer.weights.rows; ++r) {
      double sum = layer.bias ? (*layer.bias)[r] : 0.0;
      for (int c = 0; c < layer.weights.cols; ++c)
        sum += layer.weights.at(r, c) * current[c];
      pre[r] = sum;
    }
    trace.pre.push_back(pre);
    current.assign(pre.size(), 0.0);
    for (size_t r = 0; r < pre.size(); ++r)
      current[r] = activate(layer.activation, pre[r]);
  }
  trace.output = current;
  return trace;
}

NetGradients zero_gradients(const DenseNet& net) {
  NetGradients g;
  for (const Layer& layer : net.layers) {
    g.weights.emplace_back(layer.weights.rows, layer.weights.cols);
    g.biases.emplace_back(layer.bias ? Vector(layer.bias->size(), 0.0)
                                     : Vector{});
  }
  return g;
}

// Backpropagates d(loss)/d(post-activation output) through the dense part,
// accumulating into grads and returning d(loss)/d(input).
Vector backprop(const DenseNet& net, const Trace& trace, Vector dout,
                NetGradients& grads) {
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const Layer& layer = net.layers[l];
    Vector dpre(dout.size());
    for (size_t r = 0; r < dout.size(); ++r)
      dpre[r] = dout[r] * activate_grad(layer.activation, trace.pre[l][r]);
    for (int r = 0; r < layer.weights.rows; ++r) {
      if (!grads.biases[l].empty()) grads.biases[l][r] += dpre[r];
      for (int c = 0; c < layer.weights.cols; ++c)
        grads.weights[l].at(r, c) += dpre[r] * trace.inputs[l][c];
    }
    Vector din(layer.weights.cols, 0.0);
    for (int r = 0; r < layer.weights.rows; ++r)
      for (int c = 0; c < layer.weights.cols; ++c)
        din[c] += layer.weights.at(r, c) * dpre[r];
    dout = std::move(din);
  }
  return dout;
}

nlohmann::ordered_json net_to_json(const DenseNet& net) {
  nlohmann::ordered_json j;
  j["layers"] = nlohmann::ordered_json::array();
  for (const Layer& layer : net.layers) {
    nlohmann::ordered_json l;
    l["rows"] = layer.weights.rows;
    l["cols"] = layer.weights.cols;
    l["weights"] = layer.weights.values;
    if (layer.bias)
      l["bias"] = *layer.bias;
    else
      l["bias"] = nullptr;
    switch (layer.activation) {
      case Activation::ReLU: l["activation"] = "relu"; break;
      case Activation::Arctan: l["activation"] = "arctan"; break;
      case Activation::Identity: l["activation"] = "identity"; break;
    }
    j["layers"].push_back(l);
  }
  switch (net.terminal) {
    case Terminal::None: j["terminal"] = "none"; break;
    case Terminal::Softmax3: j["terminal"] = "softmax3"; break;
    case Terminal::Sigmoid: j["terminal"] = "sigmoid"; break;
  }
  return j;
}

DenseNet net_from_json(const nlohmann::json& j) {
  DenseNet net;
  for (const auto& l : j.at("layers")) {
    Layer layer;
    layer.weights = Matrix(l.at("rows").get<int>(), l.at("cols").get<int>());
    layer.weights.values = l.at("weights").get<std::vector<double>>();
    if (layer.weights.values.size() !=
        size_t(layer.weights.rows) * layer.weights.cols)
      throw IoError("layer weight count mismatch");
    if (!l.at("bias").is_null())
      layer.bias = l.at("bias").get<Vector>();
    const std::string activation = l.at("activation").get<std::string>();
    if (activation == "relu") layer.activation = Activation::ReLU;
    else if (activation == "arctan") layer.activation = Activation::Arctan;
    else if (activation == "identity")
      layer.activation = Activation::Identity;
    else throw IoError("unknown activation: " + activation);
    net.layers.push_back(std::move(layer));
  }
  const std::string terminal = j.at("terminal").get<std::string>();
  if (terminal == "none") net.terminal = Terminal::None;
  else if (terminal == "softmax3") net.terminal = Terminal::Softmax3;
  else if (terminal == "sigmoid") net.terminal = Terminal::Sigmoid;
  else throw IoError("unknown terminal: " + terminal);
  return net;
}

}  // namespace

std::string DenseNet::to_json() const { return net_to_json(*this).dump(); }

DenseNet DenseNet::from_json(const std::string& text) {
  try {
    return net_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad network json: ") + e.what());
  }
}

double sigmoid(double x) {
  // exp(x)/(exp(x)+1), evaluated stably on both tails.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (e + 1.0);
}

std::array<double, 3> softmax3(const std::array<double, 3>& logits) {
  const double peak = std::max({logits[0], logits[1], logits[2]});
  std::array<double, 3> out{};
  double norm = 0.0;
  for (int i = 0; i < 3; ++i) {
    out[i] = std::exp(logits[i] - peak);
    norm += out[i];
  }
  for (double& v : out) v /= norm;
  return out;
}

Vector forward(const DenseNet& net, std::span<const double> x) {
  check_widths(net);
  Vector out = forward_trace(net, x).output;
  switch (net.terminal) {
    case Terminal::None:
      return out;
    case Terminal::Sigmoid: {
      if (out.size() != 1)
        throw ValidationError("sigmoid terminal expects one output");
      out[0] = sigmoid(out[0]);
      return out;
    }
    case Terminal::Softmax3: {
      if (out.size() != 3)
        throw ValidationError("softmax3 terminal expects three outputs");
      const auto p = softmax3({out[0], out[1], out[2]});
      return Vector(p.begin(), p.end());
    }
  }
  return out;
}

void validate(const TwinModel& model) {
  check_widths(model.featuriser);
  check_widths(model.ac_head);
  check_widths(model.pd_head);
  if (model.featuriser.terminal != Terminal::None)
    throw ValidationError("featuriser must have no terminal transform");
  if (model.ac_head.terminal != Terminal::Softmax3 ||
      model.ac_head.output_width() != 3)
    throw ValidationError("AC head must end in softmax over three classes");
  if (model.pd_head.terminal != Terminal::Sigmoid ||
      model.pd_head.output_width() != 1)
    throw ValidationError("PD head must end in a sigmoid scalar");
  if (!is_odd_configured(model.pd_head))
    throw ValidationError(
        "PD head must be odd: bias-free with arctan hidden layers");
  const int embedding = model.featuriser.output_width();
  if (model.ac_head.input_width() != embedding ||
      model.pd_head.input_width() != embedding)
    throw ValidationError("head input width must match the embedding");
}

DenseNet make_dense(int input, std::span<const int> hidden, int output,
                    Activation hidden_activation, bool biases,
                    Terminal terminal, Xoshiro256& rng) {
  DenseNet net;
  net.terminal = terminal;
  std::vector<int> widths{input};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(output);
  for (size_t l = 1; l < widths.size(); ++l) {
    Layer layer;
    layer.weights = Matrix(widths[l], widths[l - 1]);
    const double bound =
        std::sqrt(6.0 / (widths[l] + widths[l - 1]));
    for (double& w : layer.weights.values)
      w = bound * (2.0 * rng.next_double() - 1.0);
    if (biases) layer.bias = Vector(widths[l], 0.0);
    const bool last = l + 1 == widths.size();
    layer.activation = last ? Activation::Identity : hidden_activation;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

TwinModel make_twin(int input, int embedding, int head_hidden,
                    uint64_t seed) {
  Xoshiro256 rng(seed);
  TwinModel model;
  const int feat_hidden[] = {embedding};
  model.featuriser = make_dense(input, feat_hidden, embedding,
                                Activation::ReLU, true, Terminal::None, rng);
  const int ac_hidden[] = {head_hidden};
  model.ac_head = make_dense(embedding, ac_hidden, 3, Activation::ReLU,
                             true, Terminal::Softmax3, rng);
  const int pd_hidden[] = {head_hidden};
  model.pd_head = make_dense(embedding, pd_hidden, 1, Activation::Arctan,
                             false, Terminal::Sigmoid, rng);
  validate(model);
  return model;
}

std::string TwinModel::to_json() const {
  nlohmann::ordered_json j;
  j["featuriser"] = net_to_json(featuriser);
  j["ac_head"] = net_to_json(ac_head);
  j["pd_head"] = net_to_json(pd_head);
  return j.dump();
}

TwinModel TwinModel::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TwinModel model;
    model.featuriser = net_from_json(j.at("featuriser"));
    model.ac_head = net_from_json(j.at("ac_head"));
    model.pd_head = net_from_json(j.at("pd_head"));
    validate(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad twin model json: ") + e.what());
  }
}

TwinOutput twin_forward(const TwinModel& model, std::span<const double> fp_i,
                        std::span<const double> fp_j) {
  const Vector e_i = forward(model.featuriser, fp_i);
  const Vector e_j = forward(model.featuriser, fp_j);
  Vector merged(e_i.size());
  Vector diff(e_i.size());
  for (size_t k = 0; k < e_i.size(); ++k) {
    merged[k] = std::max(e_i[k], e_j[k]);
    diff[k] = e_i[k] - e_j[k];
  }
  const Vector ac = forward(model.ac_head, merged);
  const Vector pd = forward(model.pd_head, diff);
  TwinOutput out;
  out.ac_probs = {ac[0], ac[1], ac[2]};
  out.pd_prob = pd[0];
  return out;
}

ClassWeights class_weights(long n_ac, long n_half, long n_non) {
  if (n_ac < 1 || n_half < 1 || n_non < 1)
    throw ValidationError("class_weights: all counts must be at least 1");
  ClassWeights w;
  const double non = static_cast<double>(n_non);
  w.w_ac = {non / static_cast<double>(n_ac),
            non / static_cast<double>(n_half), 1.0};
  w.w_pd = 3.0 * non / static_cast<double>(n_ac + n_half + n_non);
  return w;
}

double twin_loss(const TwinModel& model, std::span<const double> fp_i,
                 std::span<const double> fp_j, int ac_label, int pd_label,
                 const ClassWeights& weights) {
  if (ac_label < 0 || ac_label > 2 || pd_label < 0 || pd_label > 1)
    throw ValidationError("twin_loss: label out of range");
  const TwinOutput out = twin_forward(model, fp_i, fp_j);
  const double ac_term =
      -weights.w_ac[ac_label] * std::log(out.ac_probs[ac_label]);
  const double p = out.pd_prob;
  const double pd_term =
      -weights.w_pd *
      (pd_label * std::log(p) + (1 - pd_label) * std::log(1.0 - p));
  return ac_term + pd_term;
}

TwinGradients twin_backward(const TwinModel& model,
                            std::span<const double> fp_i,
                            std::span<const double> fp_j, int ac_label,
                            int pd_label, const ClassWeights& weights,
                            double* loss_out) {
  if (ac_label < 0 || ac_label > 2 || pd_label < 0 || pd_label > 1)
    throw ValidationError("twin_backward: label out of range");
  const Trace trace_i = forward_trace(model.featuriser, fp_i);
  const Trace trace_j = forward_trace(model.featuriser, fp_j);
  const Vector& e_i = trace_i.output;
  const Vector& e_j = trace_j.output;
  Vector merged(e_i.size());
  Vector diff(e_i.size());
  for (size_t k = 0; k < e_i.size(); ++k) {
    merged[k] = std::max(e_i[k], e_j[k]);
    diff[k] = e_i[k] - e_j[k];
  }

  const Trace ac_trace = forward_trace(model.ac_head, merged);
  const Trace pd_trace = forward_trace(model.pd_head, diff);
  const auto probs =
      softmax3({ac_trace.output[0], ac_trace.output[1], ac_trace.output[2]});
  const double pd_prob = sigmoid(pd_trace.output[0]);

  if (loss_out) {
    const double ac_term =
        -weights.w_ac[ac_label] * std::log(probs[ac_label]);
    const double pd_term =
        -weights.w_pd * (pd_label * std::log(pd_prob) +
                         (1 - pd_label) * std::log(1.0 - pd_prob));
    *loss_out = ac_term + pd_term;
  }

  TwinGradients grads;
  grads.featuriser = zero_gradients(model.featuriser);
  grads.ac_head = zero_gradients(model.ac_head);
  grads.pd_head = zero_gradients(model.pd_head);

  // Cross-entropy through softmax: d/dlogit = w (p - onehot).
  Vector ac_dout(3);
  for (int c = 0; c < 3; ++c)
    ac_dout[c] =
        weights.w_ac[ac_label] * (probs[c] - (c == ac_label ? 1.0 : 0.0));
  const Vector dmerged =
      backprop(model.ac_head, ac_trace, std::move(ac_dout), grads.ac_head);

  // Binary cross-entropy through sigmoid: d/dlogit = w (p - y).
  Vector pd_dout{weights.w_pd * (pd_prob - pd_label)};
  const Vector ddiff =
      backprop(model.pd_head, pd_trace, std::move(pd_dout), grads.pd_head);

  // Componentwise max routes to the larger side; ties go to the first
  // input. The difference feeds +/- into the two branches.
  Vector de_i(e_i.size()), de_j(e_j.size());
  for (size_t k = 0; k < e_i.size(); ++k) {
    const bool first = e_i[k] >= e_j[k];
    de_i[k] = (first ? dmerged[k] : 0.0) + ddiff[k];
    de_j[k] = (first ? 0.0 : dmerged[k]) - ddiff[k];
  }
  backprop(model.featuriser, trace_i, std::move(de_i), grads.featuriser);
  backprop(model.featuriser, trace_j, std::move(de_j), grads.featuriser);
  return grads;
}

NetGradients regression_backward(const DenseNet& net,
                                 std::span<const double> x, double target,
                                 double* loss_out) {
  if (net.terminal != Terminal::None || net.output_width() != 1)
    throw ValidationError("regression expects a scalar linear output");
  const Trace trace = forward_trace(net, x);
  const double pred = trace.output[0];
  if (loss_out) *loss_out = (pred - target) * (pred - target);
  NetGradients grads = zero_gradients(net);
  backprop(net, trace, Vector{2.0 * (pred - target)}, grads);
  return grads;
}

namespace {

// Flat views over a net's parameters and matching gradient structures keep
// the Adam loop simple.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

template <typename Fn>
void for_each_parameter(DenseNet& net, NetGradients& grads, Fn&& fn) {
  for (size_t l = 0; l < net.layers.size(); ++l) {
    auto& w = net.layers[l].weights.values;
    auto& gw = grads.weights[l].values;
    for (size_t i = 0; i < w.size(); ++i) fn(w[i], gw[i]);
    if (net.layers[l].bias) {
      auto& b = *net.layers[l].bias;
      auto& gb = grads.biases[l];
      for (size_t i = 0; i < b.size(); ++i) fn(b[i], gb[i]);
    }
  }
}

void adam_step(AdamState& state, const TrainConfig& cfg, size_t offset_base,
               DenseNet& net, NetGradients& grads) {
  size_t offset = offset_base;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for_each_parameter(net, grads, [&](double& param, double& grad) {
    double& m = state.m[offset];
    double& v = state.v[offset];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    param -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    ++offset;
  });
}

void accumulate(NetGradients& into, const NetGradients& from, double scale) {
  for (size_t l = 0; l < into.weights.size(); ++l) {
    for (size_t i = 0; i < into.weights[l].values.size(); ++i)
      into.weights[l].values[i] += scale * from.weights[l].values[i];
    for (size_t i = 0; i < into.biases[l].size(); ++i)
      into.biases[l][i] += scale * from.biases[l][i];
  }
}

}  // namespace

std::vector<double> train_twin(TwinModel& model,
                               std::span<const TwinExample> examples,
                               const ClassWeights& weights,
                               const TrainConfig& cfg) {
  validate(model);
  if (examples.empty())
    throw ValidationError("train_twin: no training pairs");
  const size_t params = model.featuriser.parameter_count() +
                        model.ac_head.parameter_count() +
                        model.pd_head.parameter_count();
  AdamState state;
  state.m.assign(params, 0.0);
  state.v.assign(params, 0.0);

  Xoshiro256 rng(cfg.seed);
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> trace;
  trace.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(),
                                  start + static_cast<size_t>(cfg.batch_size));
      TwinGradients batch;
      batch.featuriser = zero_gradients(model.featuriser);
      batch.ac_head = zero_gradients(model.ac_head);
      batch.pd_head = zero_gradients(model.pd_head);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (size_t k = start; k < end; ++k) {
        const TwinExample& ex = examples[order[k]];
        double loss = 0.0;
        const TwinGradients g =
            twin_backward(model, ex.fp_i, ex.fp_j, ex.ac_label, ex.pd_label,
                          weights, &loss);
        epoch_loss += loss;
        accumulate(batch.featuriser, g.featuriser, scale);
        accumulate(batch.ac_head, g.ac_head, scale);
        accumulate(batch.pd_head, g.pd_head, scale);
      }
      ++state.step;
      size_t offset = 0;
      adam_step(state, cfg, offset, model.featuriser, batch.featuriser);
      offset += model.featuriser.parameter_count();
      adam_step(state, cfg, offset, model.ac_head, batch.ac_head);
      offset += model.ac_head.parameter_count();
      adam_step(state, cfg, offset, model.pd_head, batch.pd_head);
    }
    epoch_loss /= static_cast<double>(examples.size());
    if (!std::isfinite(epoch_loss))
      throw TrainingDiverged("twin training loss is not finite");
    trace.push_back(epoch_loss);
  }
  return trace;
}

std::vector<double> train_regressor(DenseNet& net,
                                    std::span<const Vector> inputs,
                                    std::span<const double> targets,
                                    const TrainConfig& cfg) {
  if (inputs.size() != targets.size())
    throw ValidationError("train_regressor: input/target length mismatch");
  if (inputs.empty())
    throw ValidationError("train_regressor: no training data");
  AdamState state;
  state.m.assign(net.parameter_count(), 0.0);
  state.v.assign(net.parameter_count(), 0.0);

  Xoshiro256 rng(cfg.seed);
  std::vector<size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> trace;
  trace.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(),
                                  start + static_cast<size_t>(cfg.batch_size));
      NetGradients batch = zero_gradients(net);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (size_t k = start; k < end; ++k) {
        double loss = 0.0;
        const NetGradients g = regression_backward(
            net, inputs[order[k]], targets[order[k]], &loss);
        epoch_loss += loss;
        accumulate(batch, g, scale);
      }
      ++state.step;
      adam_step(state, cfg, 0, net, batch);
    }
    epoch_loss /= static_cast<double>(inputs.size());
    if (!std::isfinite(epoch_loss))
      throw TrainingDiverged("regression training loss is not finite");
    trace.push_back(epoch_loss);
  }
  return trace;
}

DenseNet extract_nfp(const DenseNet& trained) {
  if (trained.layers.size() < 2)
    throw ValidationError("extract_nfp: need at least two layers");
  DenseNet extractor;
  extractor.terminal = Terminal::None;
  extractor.layers.assign(trained.layers.begin(),
                          trained.layers.end() - 1);
  return extractor;
}

}  // namespace forge
