#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fairdiff/net.hpp"
#include "fairdiff/rng.hpp"
#include "fairdiff/schedule.hpp"

namespace fairdiff::diff {

/// MLP denoiser predicting the clean interaction vector from a noisy one.
/// The timestep enters as a sinusoidal embedding concatenated to the input.
/// The same architecture is used for the main model and the frozen weak one.
struct DenoiserModel {
  num::DenseNet net;
  std::size_t n_items = 0;
  std::size_t embed_dim = 10;
};

/// Builds a denoiser with tanh hidden layers and an identity output layer.
DenoiserModel make_denoiser(std::size_t n_items, std::span<const std::size_t> hidden,
                            std::size_t embed_dim, SeededRng& rng);

std::vector<double> timestep_embedding(std::size_t t, std::size_t dim);

/// Forward corruption: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise.
/// t = 0 returns x0 unchanged.
std::vector<double> q_sample(std::span<const double> x0, std::size_t t,
                             std::span<const double> noise,
                             const DiffusionSchedule& schedule);

/// Predicted clean vector z = f(x_t, t). Fills cache when given (the cache
/// covers the network input [x_t ; embed(t)]).
std::vector<double> denoise(const DenoiserModel& model, std::span<const double> x_t,
                            std::size_t t, num::ForwardCache* cache = nullptr);

/// Reverse step from the standard posterior of the corruption process given
/// the predicted clean vector. Adds sigma_t noise for t > 1 and none at t = 1.
std::vector<double> posterior_step(std::span<const double> x_t,
                                   std::span<const double> z_hat, std::size_t t,
                                   const DiffusionSchedule& schedule, SeededRng& rng);

/// Fixed per-user draws for one training batch, so losses are deterministic
/// functions of the parameters.
struct BatchDraws {
  std::vector<std::size_t> t;                // one timestep per user
  std::vector<std::vector<double>> noise;    // one noise vector per user
};

BatchDraws draw_batch(SeededRng& rng, std::size_t batch_size, std::size_t n_items,
                      const DiffusionSchedule& schedule);

struct BaseLossResult {
  double loss = 0.0;
  num::NetGrad grad;
};

/// L_base = mean_u || f(x_t, t) - x0 ||^2 over the batch, with gradients
/// for the model parameters. Throws DivergenceError on a non-finite loss.
BaseLossResult base_loss(const DenoiserModel& model,
                         const std::vector<std::vector<double>>& x0_rows,
                         const DiffusionSchedule& schedule, const BatchDraws& draws);

/// Convenience overload drawing (t, noise) from rng.
BaseLossResult base_loss(const DenoiserModel& model,
                         const std::vector<std::vector<double>>& x0_rows,
                         const DiffusionSchedule& schedule, SeededRng& rng);

struct SampleOptions {
  /// Start the chain from pure noise instead of the corrupted history.
  bool pure_noise_init = false;
};

/// Unguided sampling: corrupt the history to step T', then denoise down to
/// the final score vector. T' = 0 degenerates to one denoise call at t = 1.
std::vector<double> sample_unguided(const DenoiserModel& model,
                                    std::span<const double> history,
                                    const DiffusionSchedule& schedule, SeededRng& rng,
                                    const SampleOptions& opts = {});

}  // namespace fairdiff::diff
