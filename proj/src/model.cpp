#include "tnpar/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tnpar {

std::vector<int> ModelConfig::encoder_dims() const {
  std::vector<int> dims{encoder_input_dim()};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(encoder_output_dim());
  return dims;
}

std::vector<int> ModelConfig::decoder_dims() const {
  std::vector<int> dims{decoder_input_dim()};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return dims;
}

std::vector<double> EncoderInput::flatten() const {
  std::vector<double> out = current;
  out.insert(out.end(), hist.begin(), hist.end());
  return out;
}

EncoderInput build_encoder_input(const WindowSample& sample, int node,
                                 const DistanceMasks& masks, const ModelConfig& cfg) {
  if (masks.k_max != cfg.k_max)
    throw std::invalid_argument("build_encoder_input: mask k_max mismatch");
  if (static_cast<int>(sample.history.size()) != cfg.omega)
    throw std::invalid_argument("build_encoder_input: history length != omega");
  EncoderInput in;
  in.node = node;
  in.current.resize(cfg.type_count);
  for (int v = 0; v < cfg.type_count; ++v) in.current[v] = sample.target(v, node);
  in.hist.assign(static_cast<size_t>(cfg.omega) * cfg.type_count * cfg.slice_count(), 0.0);
  for (int w = 0; w < cfg.omega; ++w) {
    const Mat& h = sample.history[w];
    for (int k = 0; k <= cfg.k_max; ++k) {
      const Mat& mask = masks.masks[k];
      for (int n2 = 0; n2 < masks.node_count; ++n2) {
        if (mask(node, n2) == 0.0) continue;
        for (int v = 0; v < cfg.type_count; ++v)
          in.hist[EncoderInput::hist_index(cfg, w, v, k)] += h(v, n2);
      }
    }
  }
  return in;
}

double PosteriorZ::prob(int k, int i, int j) const {
  double q = 1.0 / (1.0 + std::exp(-beta * z.at(k, i, j)));
  return std::clamp(q, prob_clamp, 1.0 - prob_clamp);
}

PosteriorZ encode(const DenseNet& phi, const EncoderInput& input, const ModelConfig& cfg,
                  ForwardCache* cache) {
  std::vector<double> out = forward(phi, input.flatten(), cache);
  PosteriorZ post;
  post.beta = cfg.beta;
  post.prob_clamp = cfg.prob_clamp;
  post.z = CausalTensor(cfg.type_count, cfg.k_max);
  size_t e = 0;
  for (int k = 0; k <= cfg.k_max; ++k)
    for (int i = 0; i < cfg.type_count; ++i)
      for (int j = 0; j < cfg.type_count; ++j) post.z.at(k, i, j) = out[e++];
  return post;
}

GumbelNoise draw_gumbel_noise(int type_count, int k_max, std::mt19937_64& rng) {
  GumbelNoise noise{CausalTensor(type_count, k_max), CausalTensor(type_count, k_max)};
  std::uniform_real_distribution<double> unit(std::numeric_limits<double>::min(), 1.0);
  for (size_t i = 0; i < noise.g1.values.size(); ++i)
    for (size_t j = 0; j < noise.g1.values[i].d.size(); ++j) {
      noise.g1.values[i].d[j] = -std::log(-std::log(unit(rng)));
      noise.g0.values[i].d[j] = -std::log(-std::log(unit(rng)));
    }
  return noise;
}

SampledA gumbel_sample_with_noise(const PosteriorZ& posterior, double tau,
                                  const GumbelNoise& noise) {
  if (tau <= 0.0) throw std::invalid_argument("gumbel_sample: tau must be > 0");
  const int V = posterior.z.type_count;
  const int K = posterior.z.k_max;
  SampledA out{CausalTensor(V, K), CausalTensor(V, K), tau};
  for (int k = 0; k <= K; ++k)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j) {
        double q = posterior.prob(k, i, j);
        double l1 = (std::log(q) + noise.g1.at(k, i, j)) / tau;
        double l0 = (std::log(1.0 - q) + noise.g0.at(k, i, j)) / tau;
        double s = 1.0 / (1.0 + std::exp(l0 - l1));
        out.soft.at(k, i, j) = s;
        out.hard.at(k, i, j) = s > 0.5 ? 1.0 : 0.0;
      }
  return out;
}

SampledA gumbel_sample(const PosteriorZ& posterior, double tau, std::mt19937_64& rng,
                       bool hard) {
  GumbelNoise noise = draw_gumbel_noise(posterior.z.type_count, posterior.z.k_max, rng);
  SampledA out = gumbel_sample_with_noise(posterior, tau, noise);
  if (hard) out.soft = out.hard;  // straight-through value; gradients use the soft path
  return out;
}

std::vector<double> causal_filter(const std::vector<double>& hist_agg, const CausalTensor& a,
                                  int target_type, const ModelConfig& cfg) {
  if (hist_agg.size() != static_cast<size_t>(cfg.omega) * cfg.type_count * cfg.slice_count())
    throw std::invalid_argument("causal_filter: history shape mismatch");
  std::vector<double> out(hist_agg.size());
  for (int w = 0; w < cfg.omega; ++w)
    for (int v = 0; v < cfg.type_count; ++v)
      for (int k = 0; k <= cfg.k_max; ++k) {
        size_t idx = EncoderInput::hist_index(cfg, w, v, k);
        out[idx] = hist_agg[idx] * a.at(k, v, target_type);
      }
  return out;
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double decode(const DenseNet& theta, const std::vector<double>& filtered, int target_type,
              const ModelConfig& cfg, ForwardCache* cache) {
  std::vector<double> in = filtered;
  in.resize(in.size() + cfg.type_count, 0.0);
  in[filtered.size() + target_type] = 1.0;
  std::vector<double> out = forward(theta, in, cache);
  return softplus(out[0]) + cfg.lambda_floor;
}

double poisson_log_pmf(long long o, double lambda, double delta) {
  if (o < 0) throw std::invalid_argument("poisson_log_pmf: negative count");
  double rate = lambda * delta;
  if (rate <= 0.0) throw std::invalid_argument("poisson_log_pmf: lambda*delta must be > 0");
  return o * std::log(rate) - rate - std::lgamma(static_cast<double>(o) + 1.0);
}

}  // namespace tnpar
