#include "tnpar/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace tnpar {

size_t DenseNet::param_count() const {
  size_t n = 0;
  for (int l = 0; l < layer_count(); ++l)
    n += weights[l].d.size() + biases[l].size();
  return n;
}

std::vector<double> DenseNet::flatten_params() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (int l = 0; l < layer_count(); ++l) {
    flat.insert(flat.end(), weights[l].d.begin(), weights[l].d.end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

void DenseNet::set_params(const std::vector<double>& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("set_params: size mismatch");
  size_t pos = 0;
  for (int l = 0; l < layer_count(); ++l) {
    std::copy(flat.begin() + pos, flat.begin() + pos + weights[l].d.size(),
              weights[l].d.begin());
    pos += weights[l].d.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + biases[l].size(), biases[l].begin());
    pos += biases[l].size();
  }
}

DenseNet make_net(const std::vector<int>& dims, std::mt19937_64& rng, Activation hidden) {
  if (dims.size() < 2) throw std::invalid_argument("make_net: need at least 2 layer dims");
  DenseNet net;
  net.dims = dims;
  net.hidden_activation = hidden;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    int fan_in = dims[l], fan_out = dims[l + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Mat w(fan_out, fan_in);
    for (double& x : w.d) x = u(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::vector<double>(fan_out, 0.0));
  }
  return net;
}

static double activate(Activation a, double x) {
  return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input,
                            ForwardCache* cache) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(input);
  }
  std::vector<double> cur = input;
  for (int l = 0; l < net.layer_count(); ++l) {
    const Mat& w = net.weights[l];
    std::vector<double> next(w.rows);
    for (int i = 0; i < w.rows; ++i) {
      double s = net.biases[l][i];
      const double* row = &w.d[static_cast<size_t>(i) * w.cols];
      for (int j = 0; j < w.cols; ++j) s += row[j] * cur[j];
      next[i] = l + 1 < net.layer_count() ? activate(net.hidden_activation, s) : s;
    }
    cur = std::move(next);
    if (cache) cache->acts.push_back(cur);
  }
  return cur;
}

void NetGrads::accumulate(const NetGrads& other) {
  for (size_t l = 0; l < dweights.size(); ++l) {
    for (size_t i = 0; i < dweights[l].d.size(); ++i) dweights[l].d[i] += other.dweights[l].d[i];
    for (size_t i = 0; i < dbiases[l].size(); ++i) dbiases[l][i] += other.dbiases[l][i];
  }
}

void NetGrads::scale(double s) {
  for (auto& w : dweights)
    for (double& x : w.d) x *= s;
  for (auto& b : dbiases)
    for (double& x : b) x *= s;
}

std::vector<double> NetGrads::flatten() const {
  std::vector<double> flat;
  for (size_t l = 0; l < dweights.size(); ++l) {
    flat.insert(flat.end(), dweights[l].d.begin(), dweights[l].d.end());
    flat.insert(flat.end(), dbiases[l].begin(), dbiases[l].end());
  }
  return flat;
}

NetGrads zero_grads(const DenseNet& net) {
  NetGrads g;
  for (int l = 0; l < net.layer_count(); ++l) {
    g.dweights.push_back(Mat(net.weights[l].rows, net.weights[l].cols));
    g.dbiases.push_back(std::vector<double>(net.biases[l].size(), 0.0));
  }
  g.dinput.assign(net.input_dim(), 0.0);
  return g;
}

NetGrads backward(const DenseNet& net, const ForwardCache& cache,
                  const std::vector<double>& output_gradient) {
  if (cache.acts.size() != static_cast<size_t>(net.layer_count()) + 1)
    throw std::invalid_argument("backward: forward cache missing or stale");
  if (static_cast<int>(output_gradient.size()) != net.output_dim())
    throw std::invalid_argument("backward: output gradient dimension mismatch");

  NetGrads g = zero_grads(net);
  std::vector<double> delta = output_gradient;  // d loss / d post-activation
  for (int l = net.layer_count() - 1; l >= 0; --l) {
    const Mat& w = net.weights[l];
    const std::vector<double>& in = cache.acts[l];
    const std::vector<double>& out = cache.acts[l + 1];
    // through the activation (head is linear)
    if (l + 1 < net.layer_count()) {
      for (int i = 0; i < w.rows; ++i) {
        if (net.hidden_activation == Activation::relu)
          delta[i] *= out[i] > 0.0 ? 1.0 : 0.0;
        else
          delta[i] *= 1.0 - out[i] * out[i];
      }
    }
    for (int i = 0; i < w.rows; ++i) {
      g.dbiases[l][i] = delta[i];
      double* grow = &g.dweights[l].d[static_cast<size_t>(i) * w.cols];
      for (int j = 0; j < w.cols; ++j) grow[j] = delta[i] * in[j];
    }
    std::vector<double> prev(w.cols, 0.0);
    for (int i = 0; i < w.rows; ++i) {
      const double* row = &w.d[static_cast<size_t>(i) * w.cols];
      for (int j = 0; j < w.cols; ++j) prev[j] += row[j] * delta[i];
    }
    delta = std::move(prev);
  }
  g.dinput = delta;
  return g;
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, state.step);
  const double corr2 = 1.0 - std::pow(b2, state.step);
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
    double mhat = state.m[i] / corr1;
    double vhat = state.v[i] / corr2;
    params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
  }
}

}  // namespace tnpar
