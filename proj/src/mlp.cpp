#include "vnfpr/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vnfpr {

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
    case Activation::Residual: return "residual";
  }
  return "linear";
}

Activation activation_from_name(const std::string& name) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::Relu;
  if (name == "softmax") return Activation::Softmax;
  if (name == "residual") return Activation::Residual;
  throw std::invalid_argument("unknown activation: " + name);
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.data.size() + layer.bias.size();
  return n;
}

Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& activations, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least one layer");
  if (activations.size() != dims.size() - 1)
    throw std::invalid_argument("make_mlp: one activation per layer expected");
  Mlp net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.weights = Mat(dims[l + 1], dims[l]);
    layer.bias.assign(static_cast<std::size_t>(dims[l + 1]), 0.0);
    layer.activation = activations[l];
    if (layer.activation == Activation::Residual && dims[l] != dims[l + 1])
      throw std::invalid_argument("make_mlp: residual layer needs equal widths");
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

std::vector<double> affine(const Layer& layer, const std::vector<double>& x) {
  std::vector<double> out(static_cast<std::size_t>(layer.out_dim()));
  for (int r = 0; r < layer.out_dim(); ++r) {
    double acc = layer.bias[static_cast<std::size_t>(r)];
    const double* row = &layer.weights.data[static_cast<std::size_t>(r) * layer.in_dim()];
    for (int c = 0; c < layer.in_dim(); ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

std::vector<double> apply_activation(const Layer& layer, const std::vector<double>& pre,
                                     const std::vector<double>& input) {
  std::vector<double> out = pre;
  switch (layer.activation) {
    case Activation::Linear:
      break;
    case Activation::Relu:
      for (double& v : out) v = std::max(0.0, v);
      break;
    case Activation::Residual:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]) + input[i];
      break;
    case Activation::Softmax: {
      double mx = out[0];
      for (double v : out) mx = std::max(mx, v);
      double sum = 0.0;
      for (double& v : out) {
        v = std::exp(v - mx);
        sum += v;
      }
      for (double& v : out) v /= sum;
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<double> mlp_forward(const Mlp& net, const std::vector<double>& input, MlpCache& cache) {
  if (net.layers.empty()) throw std::invalid_argument("mlp_forward: empty network");
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  cache.inputs.clear();
  cache.pre.clear();
  std::vector<double> x = input;
  for (const auto& layer : net.layers) {
    cache.inputs.push_back(x);
    std::vector<double> pre = affine(layer, x);
    cache.pre.push_back(pre);
    x = apply_activation(layer, pre, x);
  }
  cache.output = x;
  return x;
}

std::vector<double> mlp_forward(const Mlp& net, const std::vector<double>& input) {
  MlpCache cache;
  return mlp_forward(net, input, cache);
}

void MlpGrads::accumulate(const MlpGrads& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].data.size(); ++i)
      weights[l].data[i] += other.weights[l].data[i];
    for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
  }
  for (std::size_t i = 0; i < input.size(); ++i) input[i] += other.input[i];
}

void MlpGrads::scale(double k) {
  for (auto& w : weights)
    for (double& v : w.data) v *= k;
  for (auto& b : bias)
    for (double& v : b) v *= k;
  for (double& v : input) v *= k;
}

MlpGrads zero_grads(const Mlp& net) {
  MlpGrads g;
  for (const auto& layer : net.layers) {
    g.weights.emplace_back(layer.out_dim(), layer.in_dim());
    g.bias.emplace_back(static_cast<std::size_t>(layer.out_dim()), 0.0);
  }
  g.input.assign(static_cast<std::size_t>(net.input_dim()), 0.0);
  return g;
}

MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const std::vector<double>& upstream) {
  if (cache.inputs.size() != net.layers.size())
    throw std::invalid_argument("mlp_backward: cache does not match network");
  if (static_cast<int>(upstream.size()) != net.output_dim())
    throw std::invalid_argument("mlp_backward: upstream dimension mismatch");

  MlpGrads grads = zero_grads(net);
  std::vector<double> dy = upstream;

  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const auto& layer = net.layers[static_cast<std::size_t>(l)];
    const auto& x = cache.inputs[static_cast<std::size_t>(l)];
    const auto& pre = cache.pre[static_cast<std::size_t>(l)];

    std::vector<double> dpre(dy.size());
    std::vector<double> dskip;  // residual pass-through
    switch (layer.activation) {
      case Activation::Linear:
        dpre = dy;
        break;
      case Activation::Relu:
        for (std::size_t i = 0; i < dy.size(); ++i) dpre[i] = pre[i] > 0.0 ? dy[i] : 0.0;
        break;
      case Activation::Residual:
        for (std::size_t i = 0; i < dy.size(); ++i) dpre[i] = pre[i] > 0.0 ? dy[i] : 0.0;
        dskip = dy;
        break;
      case Activation::Softmax: {
        // y = softmax(pre): dpre = y .* (dy - <y, dy>)
        std::vector<double> y = apply_activation(layer, pre, x);
        double dot = 0.0;
        for (std::size_t i = 0; i < dy.size(); ++i) dot += y[i] * dy[i];
        for (std::size_t i = 0; i < dy.size(); ++i) dpre[i] = y[i] * (dy[i] - dot);
        break;
      }
    }

    auto& dW = grads.weights[static_cast<std::size_t>(l)];
    auto& db = grads.bias[static_cast<std::size_t>(l)];
    for (int r = 0; r < layer.out_dim(); ++r) {
      db[static_cast<std::size_t>(r)] += dpre[static_cast<std::size_t>(r)];
      double* drow = &dW.data[static_cast<std::size_t>(r) * layer.in_dim()];
      const double g = dpre[static_cast<std::size_t>(r)];
      for (int c = 0; c < layer.in_dim(); ++c) drow[c] += g * x[static_cast<std::size_t>(c)];
    }

    std::vector<double> dx(static_cast<std::size_t>(layer.in_dim()), 0.0);
    for (int r = 0; r < layer.out_dim(); ++r) {
      const double g = dpre[static_cast<std::size_t>(r)];
      if (g == 0.0) continue;
      const double* row = &layer.weights.data[static_cast<std::size_t>(r) * layer.in_dim()];
      for (int c = 0; c < layer.in_dim(); ++c) dx[static_cast<std::size_t>(c)] += g * row[c];
    }
    if (!dskip.empty())
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dskip[i];
    dy = std::move(dx);
  }
  grads.input = dy;
  return grads;
}

RmsProp RmsProp::for_net(const Mlp& net, double decay, double epsilon) {
  RmsProp opt;
  opt.decay = decay;
  opt.epsilon = epsilon;
  for (const auto& layer : net.layers) {
    opt.v_weights.emplace_back(layer.out_dim(), layer.in_dim());
    opt.v_bias.emplace_back(static_cast<std::size_t>(layer.out_dim()), 0.0);
  }
  return opt;
}

void RmsProp::step(Mlp& net, const MlpGrads& grads, double lr) {
  if (v_weights.size() != net.layers.size())
    throw std::invalid_argument("RmsProp: state does not match network");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    if (!layer.trainable) continue;
    auto& vw = v_weights[l];
    for (std::size_t i = 0; i < layer.weights.data.size(); ++i) {
      const double g = grads.weights[l].data[i];
      vw.data[i] = decay * vw.data[i] + (1.0 - decay) * g * g;
      layer.weights.data[i] -= lr * g / (std::sqrt(vw.data[i]) + epsilon);
    }
    auto& vb = v_bias[l];
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      const double g = grads.bias[l][i];
      vb[i] = decay * vb[i] + (1.0 - decay) * g * g;
      layer.bias[i] -= lr * g / (std::sqrt(vb[i]) + epsilon);
    }
  }
}

}  // namespace vnfpr
