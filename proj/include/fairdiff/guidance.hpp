#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fairdiff/denoiser.hpp"
#include "fairdiff/net.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff::guide {

/// The three discrepancy signals between the main and weak predictions,
/// together with the hyperparameters they were computed under.
struct GuidanceSignals {
  double d1 = 0.0;   // L1 distance |z1 - z0|_1
  double d2 = 0.0;   // norm ratio |z1|_2 / (|z0|_2 + eps)
  double d3 = 0.0;   // entropy gap H_tau(z0) - H_tau(z1), in nats
  double eps = 1e-8; // ratio stabilizer
  double tau = 2.0;  // entropy temperature
};

/// Affine fusion z_ag = w z1 + (1 - w) z0; w > 1 extrapolates.
std::vector<double> fuse(std::span<const double> z1, std::span<const double> z0,
                         double w);

GuidanceSignals signals(std::span<const double> z1, std::span<const double> z0,
                        double tau, double eps);

/// Tail-activation score z1 . m_tail.
double tail_score(std::span<const double> z1, std::span<const double> m_tail);

/// Running statistics used to standardize the tail score at inference time.
/// Training batches update them batch-norm style.
struct TailStats {
  double mean = 0.0;
  double var = 1.0;
  double momentum = 0.1;

  void update(std::span<const double> batch_scores);
  double stddev() const;
};

/// Adaptive Autoguidance Network: an MLP over [z1 ; z0 ; d1 ; d2 ; d3]
/// producing a raw scalar, squashed into the guidance weight
///   w = [1 + (w_max - 1) sigmoid(mlp)] * (1 + eta sigmoid(s_tail)).
struct GuidanceNet {
  num::DenseNet net;
  double w_max = 3.0;
  double eta = 0.5;
};

/// AAN with silu hidden layers and a raw scalar output.
GuidanceNet make_guidance_net(std::size_t n_items, std::span<const std::size_t> hidden,
                              double w_max, double eta, SeededRng& rng);

struct AanOptions {
  bool no_d1 = false;  // zero the d1 input feature
  bool no_d2 = false;
  bool no_d3 = false;
  /// Feed sigmoid the raw tail score instead of the standardized one.
  bool raw_tail_score = false;
};

/// Everything needed to evaluate w and to backpropagate through it.
struct AanEval {
  double w = 1.0;
  double mlp_out = 0.0;
  double sig_mlp = 0.0;
  double sig_tail = 0.0;
  double tail_input = 0.0;  // standardized (or raw) score fed to sigmoid
  GuidanceSignals sig;
  std::vector<double> input;  // u = [z1 ; z0 ; d1 ; d2 ; d3]
  num::ForwardCache cache;
};

/// Computes the adaptive guidance weight. `stats` supplies the tail-score
/// standardization (mean/std treated as constants in the gradient).
AanEval aan_weight(const GuidanceNet& gn, std::span<const double> z1,
                   std::span<const double> z0, const GuidanceSignals& sig,
                   double s_tail, const TailStats& stats,
                   const AanOptions& opts = {});

/// Backward pass for aan_weight: accumulates dL/dw into the AAN parameter
/// gradients and adds the z1 contribution (through u, the signals, and the
/// tail score) onto grad_z1. z0 receives no gradient.
void aan_backward(const GuidanceNet& gn, const AanEval& eval, double grad_w,
                  std::span<const double> z1, std::span<const double> z0,
                  std::span<const double> m_tail, const TailStats& stats,
                  const AanOptions& opts, num::NetGrad& grad_net,
                  std::span<double> grad_z1);

struct GuidedSampleOptions {
  /// Bypass the AAN with a fixed weight (AG-DiffRec and the no_ag ablation).
  std::optional<double> constant_w;
  double tau = 2.0;
  double eps = 1e-8;
  bool pure_noise_init = false;
  AanOptions aan;
  /// Scores beyond this magnitude abort with a DivergenceError.
  double blowup_guard = 1e6;
};

/// Algorithm-style guided sampling: at each step both denoisers run on the
/// same input, the AAN (or a constant) picks w, and the fused estimate
/// drives the posterior step.
std::vector<double> guided_sample(const diff::DenoiserModel& f1,
                                  const diff::DenoiserModel& f0,
                                  const GuidanceNet* aan, const TailStats* stats,
                                  std::span<const double> m_tail,
                                  std::span<const double> history,
                                  const diff::DiffusionSchedule& schedule,
                                  SeededRng& rng, const GuidedSampleOptions& opts);

/// Fixed-weight autoguidance sampling (AG-DiffRec).
std::vector<double> ag_sample(const diff::DenoiserModel& f1,
                              const diff::DenoiserModel& f0, double w,
                              std::span<const double> history,
                              const diff::DiffusionSchedule& schedule, SeededRng& rng,
                              const GuidedSampleOptions& opts = {});

}  // namespace fairdiff::guide
