#pragma once

// Minimal dense-network machinery: affine layers with ReLU/tanh hidden
// activations and a linear head, exact reverse-mode gradients, Adam.

#include <cstdint>
#include <random>
#include <vector>

#include "tnpar/graph.hpp"

namespace tnpar {

enum class Activation { relu, tanh_act };

struct DenseNet {
  std::vector<int> dims;          // layer_dims, size L+1
  std::vector<Mat> weights;       // weights[l]: dims[l+1] x dims[l]
  std::vector<std::vector<double>> biases;
  Activation hidden_activation = Activation::relu;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
  size_t param_count() const;

  std::vector<double> flatten_params() const;
  void set_params(const std::vector<double>& flat);
};

DenseNet make_net(const std::vector<int>& dims, std::mt19937_64& rng,
                  Activation hidden = Activation::relu);

// Post-activation values per layer; acts[0] is the input.
struct ForwardCache {
  std::vector<std::vector<double>> acts;
};

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input,
                            ForwardCache* cache = nullptr);

struct NetGrads {
  std::vector<Mat> dweights;
  std::vector<std::vector<double>> dbiases;
  std::vector<double> dinput;

  void accumulate(const NetGrads& other);
  void scale(double s);
  std::vector<double> flatten() const;
};

NetGrads zero_grads(const DenseNet& net);

NetGrads backward(const DenseNet& net, const ForwardCache& cache,
                  const std::vector<double>& output_gradient);

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit AdamState(size_t n = 0, double lr = 1e-3)
      : m(n, 0.0), v(n, 0.0), learning_rate(lr) {}
};

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grads);

}  // namespace tnpar
