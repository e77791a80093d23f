#pragma once

// The encoder/decoder pair: distance aggregation of history, Bernoulli
// posterior over the causal tensor, Gumbel-Softmax sampling, causal filtering
// and Poisson emission.

#include <random>
#include <vector>

#include "tnpar/dense.hpp"
#include "tnpar/graph.hpp"
#include "tnpar/ingest.hpp"

namespace tnpar {

struct ModelConfig {
  int type_count = 0;
  int k_max = 1;
  int omega = 3;
  double delta = 1.0;
  double beta = 1.0;   // inverse temperature of the posterior sigmoid
  double tau = 0.5;    // Gumbel-Softmax temperature
  double prob_clamp = 1e-6;
  double lambda_floor = 1e-6;
  std::vector<int> hidden = {64, 64};

  int slice_count() const { return k_max + 1; }
  // current counts for the node, then the distance-aggregated history
  int encoder_input_dim() const {
    return type_count + omega * type_count * slice_count();
  }
  int encoder_output_dim() const { return slice_count() * type_count * type_count; }
  // filtered history plus a one-hot of the target type
  int decoder_input_dim() const {
    return omega * type_count * slice_count() + type_count;
  }

  std::vector<int> encoder_dims() const;
  std::vector<int> decoder_dims() const;
};

// History summed over nodes at each geodesic distance from the target node.
// hist is flat [omega][type][k], omega-major.
struct EncoderInput {
  int node = 0;
  std::vector<double> current;  // type_count
  std::vector<double> hist;     // omega * type_count * (k_max+1)

  static size_t hist_index(const ModelConfig& cfg, int w, int v, int k) {
    return (static_cast<size_t>(w) * cfg.type_count + v) * cfg.slice_count() + k;
  }
  std::vector<double> flatten() const;
};

EncoderInput build_encoder_input(const WindowSample& sample, int node,
                                 const DistanceMasks& masks, const ModelConfig& cfg);

// Pre-sigmoid scores; q(A_k^{i,j}=1) = sigmoid(beta * z).
struct PosteriorZ {
  CausalTensor z;
  double beta = 1.0;
  double prob_clamp = 1e-6;

  double prob(int k, int i, int j) const;
};

PosteriorZ encode(const DenseNet& phi, const EncoderInput& input, const ModelConfig& cfg,
                  ForwardCache* cache = nullptr);

struct SampledA {
  CausalTensor soft;
  CausalTensor hard;
  double tau = 0.5;
};

// Standard-Gumbel noise pair per tensor entry, class 1 and class 0.
struct GumbelNoise {
  CausalTensor g1, g0;
};

GumbelNoise draw_gumbel_noise(int type_count, int k_max, std::mt19937_64& rng);

SampledA gumbel_sample_with_noise(const PosteriorZ& posterior, double tau,
                                  const GumbelNoise& noise);
SampledA gumbel_sample(const PosteriorZ& posterior, double tau, std::mt19937_64& rng,
                       bool hard);

// Multiplies history entry [w][v][k] by a[k][v][target_type].
std::vector<double> causal_filter(const std::vector<double>& hist_agg, const CausalTensor& a,
                                  int target_type, const ModelConfig& cfg);

double softplus(double x);

double decode(const DenseNet& theta, const std::vector<double>& filtered, int target_type,
              const ModelConfig& cfg, ForwardCache* cache = nullptr);

// o*ln(lambda*delta) - lambda*delta - ln(o!)
double poisson_log_pmf(long long o, double lambda, double delta);

}  // namespace tnpar
