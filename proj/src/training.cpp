#include "tnpar/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tnpar {

TrainMode parse_mode(const std::string& name) {
  if (name == "full") return TrainMode::full;
  if (name == "no_topology") return TrainMode::no_topology;
  if (name == "merged") return TrainMode::merged;
  if (name == "no_constraints") return TrainMode::no_constraints;
  throw std::invalid_argument("unknown mode: " + name);
}

std::string mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::full: return "full";
    case TrainMode::no_topology: return "no_topology";
    case TrainMode::merged: return "merged";
    case TrainMode::no_constraints: return "no_constraints";
  }
  return "full";
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& f) {
    throw std::invalid_argument("train config: invalid field " + f);
  };
  if (epochs < 0) fail("epochs");
  if (batch_size < 1) fail("batch_size");
  if (learning_rate <= 0) fail("learning_rate");
  if (lambda_c < 0) fail("lambda_c");
  if (lambda_s < 0) fail("lambda_s");
  if (prior_p <= 0 || prior_p >= 1) fail("prior_p");
  if (beta <= 0) fail("beta");
  if (tau <= 0) fail("tau");
  if (threshold <= 0 || threshold >= 1) fail("threshold");
  if (omega < 1) fail("omega");
  if (k_max < 0) fail("k_max");
  if (hidden.empty()) fail("hidden");
}

double kl_bernoulli(double q, double p, double clamp) {
  q = std::clamp(q, clamp, 1.0 - clamp);
  p = std::clamp(p, clamp, 1.0 - clamp);
  return q * std::log(q / p) + (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
}

std::vector<Datum> build_dataset(const std::vector<WindowSample>& windows,
                                 const DistanceMasks& masks, const ModelConfig& cfg) {
  std::vector<Datum> data;
  data.reserve(windows.size() * masks.node_count);
  for (const WindowSample& s : windows)
    for (int n = 0; n < masks.node_count; ++n)
      data.push_back({&s, build_encoder_input(s, n, masks, cfg)});
  return data;
}

LossBreakdown elbo_batch(const DenseNet& phi, const DenseNet& theta,
                         const std::vector<const Datum*>& batch, const ModelConfig& cfg,
                         double lambda_c, double lambda_s, double prior_p,
                         const std::vector<GumbelNoise>& noise, BatchGrads* grads) {
  if (batch.empty()) throw std::invalid_argument("elbo_batch: empty batch");
  if (noise.size() != batch.size())
    throw std::invalid_argument("elbo_batch: need one noise draw per datum");
  const int B = static_cast<int>(batch.size());
  const int V = cfg.type_count;
  const int K = cfg.k_max;

  // Pass 1: encoder forward, posterior probabilities, batch mean for the
  // constraint terms.
  std::vector<ForwardCache> enc_caches(B);
  std::vector<PosteriorZ> posts;
  posts.reserve(B);
  CausalTensor mean_q(V, K);
  double kl_sum = 0.0;
  for (int d = 0; d < B; ++d) {
    posts.push_back(encode(phi, batch[d]->input, cfg, &enc_caches[d]));
    for (int k = 0; k <= K; ++k)
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j) {
          double q = posts[d].prob(k, i, j);
          mean_q.at(k, i, j) += q / B;
          kl_sum += kl_bernoulli(q, prior_p, cfg.prob_clamp);
        }
  }

  Mat g_agg = aggregate_g(mean_q);
  double acyc = acyclicity_h(g_agg);
  double spars = 0.0;
  for (int k = 0; k <= K; ++k)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j) spars += mean_q.at(k, i, j);
  Mat acyc_grad = grads ? acyclicity_h_grad(g_agg) : Mat();

  // Pass 2: Gumbel sample, causal filter, decoder likelihood, and (optionally)
  // reverse-mode gradients through the whole composition.
  double recon_sum = 0.0;
  for (int d = 0; d < B; ++d) {
    const Datum& datum = *batch[d];
    SampledA a = gumbel_sample_with_noise(posts[d], cfg.tau, noise[d]);
    CausalTensor dq(V, K);  // d total / d q for this datum
    for (int j = 0; j < V; ++j) {
      std::vector<double> filtered = causal_filter(datum.input.hist, a.soft, j, cfg);
      ForwardCache dec_cache;
      double lambda = decode(theta, filtered, j, cfg, grads ? &dec_cache : nullptr);
      long long o = std::llround(datum.input.current[j]);
      recon_sum += poisson_log_pmf(o, lambda, cfg.delta);
      if (!grads) continue;

      // total carries -reconstruction/B
      double dll_dlambda = o / lambda - cfg.delta;
      double raw = dec_cache.acts.back()[0];
      double dtotal_draw = -(1.0 / B) * dll_dlambda / (1.0 + std::exp(-raw));
      NetGrads dec_g = backward(theta, dec_cache, {dtotal_draw});
      grads->theta.accumulate(dec_g);
      for (int w = 0; w < cfg.omega; ++w)
        for (int v = 0; v < V; ++v)
          for (int k = 0; k <= K; ++k) {
            size_t idx = EncoderInput::hist_index(cfg, w, v, k);
            double s = a.soft.at(k, v, j);
            double q = posts[d].prob(k, v, j);
            double ds = dec_g.dinput[idx] * datum.input.hist[idx];
            dq.at(k, v, j) += ds * s * (1.0 - s) * (1.0 / q + 1.0 / (1.0 - q)) / cfg.tau;
          }
    }
    if (!grads) continue;

    // KL, sparsity and acyclicity paths into q, then through the sigmoid to z.
    std::vector<double> dz(cfg.encoder_output_dim());
    size_t e = 0;
    for (int k = 0; k <= K; ++k)
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j) {
          double q = posts[d].prob(k, i, j);
          double g = dq.at(k, i, j);
          g += (1.0 / B) * (std::log(q / prior_p) - std::log((1.0 - q) / (1.0 - prior_p)));
          g += lambda_s / B;
          if (i != j) g += lambda_c * acyc_grad(i, j) / B;
          dz[e++] = g * cfg.beta * q * (1.0 - q);
        }
    NetGrads enc_g = backward(phi, enc_caches[d], dz);
    grads->phi.accumulate(enc_g);
  }

  LossBreakdown out;
  out.reconstruction = recon_sum / B;
  out.kl = kl_sum / B;
  out.elbo = out.reconstruction - out.kl;
  out.acyclicity_term = acyc;
  out.sparsity_term = spars;
  out.total = -out.elbo + lambda_c * acyc + lambda_s * spars;
  if (!std::isfinite(out.total)) {
    std::ostringstream msg;
    msg << "elbo_batch: non-finite loss (recon=" << out.reconstruction << ", kl=" << out.kl
        << ", acyc=" << acyc << ", spars=" << spars << ")";
    throw std::runtime_error(msg.str());
  }
  return out;
}

LossBreakdown elbo_batch(const DenseNet& phi, const DenseNet& theta,
                         const std::vector<const Datum*>& batch, const ModelConfig& cfg,
                         double lambda_c, double lambda_s, double prior_p,
                         std::mt19937_64& rng, BatchGrads* grads) {
  std::vector<GumbelNoise> noise;
  noise.reserve(batch.size());
  for (size_t i = 0; i < batch.size(); ++i)
    noise.push_back(draw_gumbel_noise(cfg.type_count, cfg.k_max, rng));
  return elbo_batch(phi, theta, batch, cfg, lambda_c, lambda_s, prior_p, noise, grads);
}

AppliedMode apply_mode(const TrainConfig& config, const TopologyNetwork& topology,
                       const CountTensor& tensor) {
  AppliedMode out;
  out.topology = topology;
  out.tensor = tensor;
  out.lambda_c = config.lambda_c;
  out.lambda_s = config.lambda_s;
  out.k_max = config.k_max;
  switch (config.mode) {
    case TrainMode::full:
      break;
    case TrainMode::no_topology:
      out.k_max = 0;  // identity mask only: each node sees its own history
      break;
    case TrainMode::merged:
      out.tensor = merge_nodes(tensor);
      out.topology = TopologyNetwork{1, {}};
      out.k_max = 0;
      break;
    case TrainMode::no_constraints:
      out.lambda_c = 0.0;
      out.lambda_s = 0.0;
      break;
  }
  return out;
}

CausalTensor mean_posterior(const DenseNet& phi, const std::vector<Datum>& data,
                            const ModelConfig& cfg) {
  CausalTensor mean(cfg.type_count, cfg.k_max);
  for (const Datum& d : data) {
    PosteriorZ post = encode(phi, d.input, cfg);
    for (int k = 0; k <= cfg.k_max; ++k)
      for (int i = 0; i < cfg.type_count; ++i)
        for (int j = 0; j < cfg.type_count; ++j)
          mean.at(k, i, j) += post.prob(k, i, j) / data.size();
  }
  return mean;
}

TrainResult train(const CountTensor& dataset, const TopologyNetwork& topology,
                  const TrainConfig& config) {
  config.validate();
  if (dataset.bin_count < 1 || dataset.total() == 0.0)
    throw std::invalid_argument("train: empty dataset");

  AppliedMode applied = apply_mode(config, topology, dataset);
  DistanceMasks masks = geodesic_masks(applied.topology, applied.k_max);

  ModelConfig model;
  model.type_count = applied.tensor.type_count;
  model.k_max = applied.k_max;
  model.omega = config.omega;
  model.delta = applied.tensor.delta;
  model.beta = config.beta;
  model.tau = config.tau;
  model.hidden = config.hidden;

  std::mt19937_64 rng(config.seed);
  DenseNet encoder = make_net(model.encoder_dims(), rng);
  DenseNet decoder = make_net(model.decoder_dims(), rng);

  std::vector<WindowSample> windows = make_windows(applied.tensor, config.omega);
  std::vector<Datum> data = build_dataset(windows, masks, model);

  std::vector<double> params = encoder.flatten_params();
  {
    std::vector<double> dec_params = decoder.flatten_params();
    params.insert(params.end(), dec_params.begin(), dec_params.end());
  }
  AdamState adam(params.size(), config.learning_rate);

  std::vector<LossBreakdown> log;
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown epoch_loss;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<const Datum*> batch;
      batch.reserve(stop - start);
      for (size_t i = start; i < stop; ++i) batch.push_back(&data[order[i]]);

      BatchGrads grads{zero_grads(encoder), zero_grads(decoder)};
      LossBreakdown loss;
      try {
        loss = elbo_batch(encoder, decoder, batch, model, applied.lambda_c, applied.lambda_s,
                          config.prior_p, rng, &grads);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string(e.what()) + "; last finite epoch " +
                                 std::to_string(epoch - 1));
      }
      std::vector<double> flat = grads.phi.flatten();
      {
        std::vector<double> dec_flat = grads.theta.flatten();
        flat.insert(flat.end(), dec_flat.begin(), dec_flat.end());
      }
      adam_step(adam, params, flat);
      std::vector<double> enc_part(params.begin(), params.begin() + encoder.param_count());
      std::vector<double> dec_part(params.begin() + encoder.param_count(), params.end());
      encoder.set_params(enc_part);
      decoder.set_params(dec_part);

      epoch_loss.elbo += loss.elbo;
      epoch_loss.reconstruction += loss.reconstruction;
      epoch_loss.kl += loss.kl;
      epoch_loss.acyclicity_term += loss.acyclicity_term;
      epoch_loss.sparsity_term += loss.sparsity_term;
      epoch_loss.total += loss.total;
      ++batches;
    }
    if (batches > 0) {
      epoch_loss.elbo /= batches;
      epoch_loss.reconstruction /= batches;
      epoch_loss.kl /= batches;
      epoch_loss.acyclicity_term /= batches;
      epoch_loss.sparsity_term /= batches;
      epoch_loss.total /= batches;
    }
    log.push_back(epoch_loss);
  }

  TrainResult result;
  result.posterior = mean_posterior(encoder, data, model);
  result.graph = extract_graph(result.posterior, config.threshold).graph;
  result.encoder = std::move(encoder);
  result.decoder = std::move(decoder);
  result.adam = std::move(adam);
  result.model = model;
  result.log = std::move(log);
  return result;
}

void save_train_log_csv(const std::vector<LossBreakdown>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log: " + path);
  out << "epoch,reconstruction,kl,acyclicity,sparsity,total\n";
  out << std::setprecision(17);
  for (size_t i = 0; i < log.size(); ++i)
    out << i << "," << log[i].reconstruction << "," << log[i].kl << ","
        << log[i].acyclicity_term << "," << log[i].sparsity_term << "," << log[i].total << "\n";
}

static nlohmann::ordered_json net_to_json(const DenseNet& net) {
  nlohmann::ordered_json j;
  j["dims"] = net.dims;
  j["params"] = net.flatten_params();
  return j;
}

void save_checkpoint_json(const TrainResult& result, const TrainConfig& config,
                          const std::string& path) {
  nlohmann::ordered_json j;
  j["encoder"] = net_to_json(result.encoder);
  j["decoder"] = net_to_json(result.decoder);
  j["adam"] = {{"m", result.adam.m},
               {"v", result.adam.v},
               {"step", result.adam.step},
               {"learning_rate", result.adam.learning_rate},
               {"beta1", result.adam.beta1},
               {"beta2", result.adam.beta2},
               {"eps", result.adam.eps}};
  j["hyper"] = {{"omega", result.model.omega},
                {"k_max", result.model.k_max},
                {"delta", result.model.delta},
                {"beta", result.model.beta},
                {"tau", result.model.tau},
                {"lambda_c", config.lambda_c},
                {"lambda_s", config.lambda_s},
                {"prior_p", config.prior_p},
                {"threshold", config.threshold},
                {"mode", mode_name(config.mode)},
                {"epochs", config.epochs},
                {"batch_size", config.batch_size},
                {"hidden", config.hidden},
                {"seed", config.seed}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tnpar
