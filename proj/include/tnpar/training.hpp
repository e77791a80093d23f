#pragma once

// The constrained variational objective and the optimization loop, including
// the ablation modes (no topology / merged nodes / no constraints).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tnpar/dense.hpp"
#include "tnpar/graph.hpp"
#include "tnpar/ingest.hpp"
#include "tnpar/model.hpp"

namespace tnpar {

enum class TrainMode { full, no_topology, merged, no_constraints };

TrainMode parse_mode(const std::string& name);
std::string mode_name(TrainMode mode);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double lambda_c = 1e-10;
  double lambda_s = 1e-4;
  double prior_p = 0.5;
  double beta = 1.0;
  double tau = 0.5;
  double threshold = 0.5;
  int omega = 3;
  int k_max = 1;
  std::vector<int> hidden = {64, 64};
  TrainMode mode = TrainMode::full;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossBreakdown {
  double elbo = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  double acyclicity_term = 0.0;
  double sparsity_term = 0.0;
  double total = 0.0;
};

double kl_bernoulli(double q, double p, double clamp = 1e-6);

// One training datum: a (window sample, node) pair with its precomputed
// distance-aggregated history.
struct Datum {
  const WindowSample* sample = nullptr;
  EncoderInput input;
};

std::vector<Datum> build_dataset(const std::vector<WindowSample>& windows,
                                 const DistanceMasks& masks, const ModelConfig& cfg);

struct BatchGrads {
  NetGrads phi;
  NetGrads theta;
};

LossBreakdown elbo_batch(const DenseNet& phi, const DenseNet& theta,
                         const std::vector<const Datum*>& batch, const ModelConfig& cfg,
                         double lambda_c, double lambda_s, double prior_p,
                         const std::vector<GumbelNoise>& noise, BatchGrads* grads = nullptr);

// Convenience wrapper drawing one Gumbel noise tensor per datum.
LossBreakdown elbo_batch(const DenseNet& phi, const DenseNet& theta,
                         const std::vector<const Datum*>& batch, const ModelConfig& cfg,
                         double lambda_c, double lambda_s, double prior_p,
                         std::mt19937_64& rng, BatchGrads* grads = nullptr);

struct AppliedMode {
  TopologyNetwork topology;
  CountTensor tensor;
  double lambda_c = 0.0;
  double lambda_s = 0.0;
  int k_max = 0;
};

AppliedMode apply_mode(const TrainConfig& config, const TopologyNetwork& topology,
                       const CountTensor& tensor);

struct TrainResult {
  CausalTensor posterior;      // mean posterior probability over all data
  CausalGraph graph;           // thresholded read-off
  DenseNet encoder, decoder;
  AdamState adam;
  ModelConfig model;
  std::vector<LossBreakdown> log;  // one entry per epoch
};

TrainResult train(const CountTensor& dataset, const TopologyNetwork& topology,
                  const TrainConfig& config);

// Mean posterior probability of the current encoder over every datum.
CausalTensor mean_posterior(const DenseNet& phi, const std::vector<Datum>& data,
                            const ModelConfig& cfg);

void save_train_log_csv(const std::vector<LossBreakdown>& log, const std::string& path);

void save_checkpoint_json(const TrainResult& result, const TrainConfig& config,
                          const std::string& path);

}  // namespace tnpar
