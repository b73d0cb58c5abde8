#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vnfpr/matrix.hpp"
#include "vnfpr/rng.hpp"

namespace vnfpr {

enum class Activation { Linear, Relu, Softmax, Residual };

std::string activation_name(Activation act);
Activation activation_from_name(const std::string& name);

// One dense layer: out = act(W x + b). Residual layers add the input back
// (out = relu(W x + b) + x) and require matching widths. Frozen layers keep
// their parameters through optimizer steps.
struct Layer {
  Mat weights;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::Linear;
  bool trainable = true;

  int in_dim() const { return weights.cols; }
  int out_dim() const { return weights.rows; }
};

struct Mlp {
  std::vector<Layer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

// scaled uniform fan-in init: W, b ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))
Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& activations, Rng& rng);

struct MlpCache {
  std::vector<std::vector<double>> inputs;  // per layer
  std::vector<std::vector<double>> pre;     // pre-activation per layer
  std::vector<double> output;
};

std::vector<double> mlp_forward(const Mlp& net, const std::vector<double>& input);
std::vector<double> mlp_forward(const Mlp& net, const std::vector<double>& input, MlpCache& cache);

struct MlpGrads {
  std::vector<Mat> weights;
  std::vector<std::vector<double>> bias;
  std::vector<double> input;  // gradient w.r.t. the network input

  void accumulate(const MlpGrads& other);
  void scale(double k);
};

MlpGrads zero_grads(const Mlp& net);

// Backpropagates the upstream gradient dL/d(output) through the cached
// forward pass; returns dL/d(parameters) and dL/d(input).
MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const std::vector<double>& upstream);

// RMSProp with the usual accumulator update v = decay*v + (1-decay)*g^2.
struct RmsProp {
  double decay = 0.99;
  double epsilon = 1e-8;
  std::vector<Mat> v_weights;
  std::vector<std::vector<double>> v_bias;

  static RmsProp for_net(const Mlp& net, double decay = 0.99, double epsilon = 1e-8);
  // descends grads; frozen layers are skipped
  void step(Mlp& net, const MlpGrads& grads, double lr);
};

}  // namespace vnfpr
