#include "fairdiff/denoiser.hpp"

#include <cmath>
#include <string>

#include "fairdiff/error.hpp"

namespace fairdiff::diff {

DenoiserModel make_denoiser(std::size_t n_items, std::span<const std::size_t> hidden,
                            std::size_t embed_dim, SeededRng& rng) {
  if (n_items == 0) throw InvalidInput("make_denoiser: empty catalog");
  std::vector<std::size_t> dims;
  dims.push_back(n_items + embed_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(n_items);
  std::vector<num::Activation> acts(dims.size() - 1, num::Activation::Tanh);
  acts.back() = num::Activation::Identity;
  DenoiserModel model;
  model.net = num::DenseNet::glorot(dims, acts, rng);
  model.n_items = n_items;
  model.embed_dim = embed_dim;
  return model;
}

std::vector<double> timestep_embedding(std::size_t t, std::size_t dim) {
  std::vector<double> emb(dim, 0.0);
  const std::size_t half = dim / 2;
  if (half == 0) return emb;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                 static_cast<double>(half));
    emb[i] = std::sin(static_cast<double>(t) * freq);
    emb[half + i] = std::cos(static_cast<double>(t) * freq);
  }
  return emb;
}

std::vector<double> q_sample(std::span<const double> x0, std::size_t t,
                             std::span<const double> noise,
                             const DiffusionSchedule& schedule) {
  if (t > schedule.steps)
    throw InvalidInput("q_sample: t=" + std::to_string(t) + " out of range");
  if (t == 0) return {x0.begin(), x0.end()};
  if (noise.size() != x0.size()) throw InvalidInput("q_sample: noise dim mismatch");
  const double abar = schedule.alpha_bar_at(t);
  const double c0 = std::sqrt(abar);
  const double cn = std::sqrt(1.0 - abar);
  std::vector<double> x(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) x[i] = c0 * x0[i] + cn * noise[i];
  return x;
}

std::vector<double> denoise(const DenoiserModel& model, std::span<const double> x_t,
                            std::size_t t, num::ForwardCache* cache) {
  if (x_t.size() != model.n_items)
    throw InvalidInput("denoise: input has " + std::to_string(x_t.size()) +
                       " items, model expects " + std::to_string(model.n_items));
  std::vector<double> input(x_t.begin(), x_t.end());
  const std::vector<double> emb = timestep_embedding(t, model.embed_dim);
  input.insert(input.end(), emb.begin(), emb.end());
  return num::net_forward(model.net, input, cache);
}

std::vector<double> posterior_step(std::span<const double> x_t,
                                   std::span<const double> z_hat, std::size_t t,
                                   const DiffusionSchedule& schedule, SeededRng& rng) {
  if (t < 1 || t > schedule.steps)
    throw InvalidInput("posterior_step: t out of range");
  if (z_hat.size() != x_t.size()) throw InvalidInput("posterior_step: dim mismatch");
  const double abar_t = schedule.alpha_bar_at(t);
  const double abar_prev = schedule.alpha_bar_at(t - 1);
  const double beta_t = schedule.beta[t - 1];
  const double alpha_t = schedule.alpha[t - 1];
  const double denom = 1.0 - abar_t;
  const double coef_z = std::sqrt(abar_prev) * beta_t / denom;
  const double coef_x = std::sqrt(alpha_t) * (1.0 - abar_prev) / denom;
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i)
    out[i] = coef_z * z_hat[i] + coef_x * x_t[i];
  if (t > 1) {
    const double sigma = std::sqrt((1.0 - abar_prev) / denom * beta_t);
    for (double& v : out) v += sigma * rng.normal();
  }
  return out;
}

BatchDraws draw_batch(SeededRng& rng, std::size_t batch_size, std::size_t n_items,
                      const DiffusionSchedule& schedule) {
  BatchDraws draws;
  draws.t.resize(batch_size);
  draws.noise.resize(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    draws.t[b] = static_cast<std::size_t>(rng.uniform_int(schedule.steps)) + 1;
    draws.noise[b].resize(n_items);
    rng.fill_normal(draws.noise[b]);
  }
  return draws;
}

BaseLossResult base_loss(const DenoiserModel& model,
                         const std::vector<std::vector<double>>& x0_rows,
                         const DiffusionSchedule& schedule, const BatchDraws& draws) {
  if (x0_rows.empty()) throw InvalidInput("base_loss: empty batch");
  if (draws.t.size() != x0_rows.size() || draws.noise.size() != x0_rows.size())
    throw InvalidInput("base_loss: draws do not cover the batch");

  BaseLossResult result;
  result.grad = num::NetGrad::zeros_like(model.net);
  const double inv_batch = 1.0 / static_cast<double>(x0_rows.size());
  for (std::size_t b = 0; b < x0_rows.size(); ++b) {
    const std::vector<double>& x0 = x0_rows[b];
    const std::vector<double> x_t = q_sample(x0, draws.t[b], draws.noise[b], schedule);
    num::ForwardCache cache;
    const std::vector<double> z = denoise(model, x_t, draws.t[b], &cache);
    std::vector<double> grad_z(z.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double d = z[i] - x0[i];
      sq += d * d;
      grad_z[i] = 2.0 * d * inv_batch;
    }
    result.loss += sq * inv_batch;
    const num::NetGrad g = num::net_backward(model.net, cache, grad_z);
    result.grad.accumulate(g);
  }
  if (!std::isfinite(result.loss))
    throw DivergenceError("base_loss produced a non-finite value");
  return result;
}

BaseLossResult base_loss(const DenoiserModel& model,
                         const std::vector<std::vector<double>>& x0_rows,
                         const DiffusionSchedule& schedule, SeededRng& rng) {
  return base_loss(model, x0_rows, schedule,
                   draw_batch(rng, x0_rows.size(), model.n_items, schedule));
}

std::vector<double> sample_unguided(const DenoiserModel& model,
                                    std::span<const double> history,
                                    const DiffusionSchedule& schedule, SeededRng& rng,
                                    const SampleOptions& opts) {
  const std::size_t tp = schedule.infer_steps;
  if (tp == 0) return denoise(model, history, 1);

  std::vector<double> noise(history.size());
  rng.fill_normal(noise);
  std::vector<double> x = opts.pure_noise_init ? std::move(noise)
                                               : q_sample(history, tp, noise, schedule);
  for (std::size_t t = tp; t >= 1; --t) {
    const std::vector<double> z = denoise(model, x, t);
    x = posterior_step(x, z, t, schedule, rng);
  }
  return x;
}

}  // namespace fairdiff::diff
