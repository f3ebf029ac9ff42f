#include "fairdiff/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairdiff/error.hpp"
#include "fairdiff/numerics.hpp"

namespace fairdiff::guide {

namespace {

// Keeps both sigmoids strictly inside (0,1) under saturating inputs, so the
// weight bound 1 < w < w_max*(1+eta) stays strict in floating point.
constexpr double kSigmoidFloor = 1e-12;

double bounded_logistic(double z) {
  return std::clamp(num::logistic(z), kSigmoidFloor, 1.0 - kSigmoidFloor);
}

}  // namespace

std::vector<double> fuse(std::span<const double> z1, std::span<const double> z0,
                         double w) {
  if (z1.size() != z0.size()) throw InvalidInput("fuse: dimension mismatch");
  std::vector<double> out(z1.size());
  for (std::size_t i = 0; i < z1.size(); ++i)
    out[i] = w * z1[i] + (1.0 - w) * z0[i];
  return out;
}

GuidanceSignals signals(std::span<const double> z1, std::span<const double> z0,
                        double tau, double eps) {
  if (z1.size() != z0.size()) throw InvalidInput("signals: dimension mismatch");
  GuidanceSignals s;
  s.eps = eps;
  s.tau = tau;
  double norm1 = 0.0, norm0 = 0.0;
  for (std::size_t i = 0; i < z1.size(); ++i) {
    s.d1 += std::abs(z1[i] - z0[i]);
    norm1 += z1[i] * z1[i];
    norm0 += z0[i] * z0[i];
  }
  s.d2 = std::sqrt(norm1) / (std::sqrt(norm0) + eps);
  s.d3 = num::softmax_entropy(z0, tau) - num::softmax_entropy(z1, tau);
  return s;
}

double tail_score(std::span<const double> z1, std::span<const double> m_tail) {
  if (z1.size() != m_tail.size()) throw InvalidInput("tail_score: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < z1.size(); ++i) s += z1[i] * m_tail[i];
  return s;
}

void TailStats::update(std::span<const double> batch_scores) {
  if (batch_scores.empty()) return;
  double m = 0.0;
  for (double s : batch_scores) m += s;
  m /= static_cast<double>(batch_scores.size());
  double v = 0.0;
  for (double s : batch_scores) v += (s - m) * (s - m);
  v /= static_cast<double>(batch_scores.size());
  mean = (1.0 - momentum) * mean + momentum * m;
  var = (1.0 - momentum) * var + momentum * v;
}

double TailStats::stddev() const { return std::sqrt(std::max(var, 0.0)); }

GuidanceNet make_guidance_net(std::size_t n_items, std::span<const std::size_t> hidden,
                              double w_max, double eta, SeededRng& rng) {
  if (!(w_max > 1.0)) throw ConfigError("w_max must be > 1 for a nondegenerate range");
  if (eta < 0.0) throw ConfigError("eta must be >= 0");
  std::vector<std::size_t> dims;
  dims.push_back(2 * n_items + 3);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  std::vector<num::Activation> acts(dims.size() - 1, num::Activation::Silu);
  acts.back() = num::Activation::Identity;
  GuidanceNet gn;
  gn.net = num::DenseNet::glorot(dims, acts, rng);
  gn.w_max = w_max;
  gn.eta = eta;
  return gn;
}

AanEval aan_weight(const GuidanceNet& gn, std::span<const double> z1,
                   std::span<const double> z0, const GuidanceSignals& sig,
                   double s_tail, const TailStats& stats, const AanOptions& opts) {
  if (z1.size() != z0.size()) throw InvalidInput("aan_weight: dimension mismatch");
  AanEval eval;
  eval.sig = sig;
  eval.input.reserve(2 * z1.size() + 3);
  eval.input.insert(eval.input.end(), z1.begin(), z1.end());
  eval.input.insert(eval.input.end(), z0.begin(), z0.end());
  eval.input.push_back(opts.no_d1 ? 0.0 : sig.d1);
  eval.input.push_back(opts.no_d2 ? 0.0 : sig.d2);
  eval.input.push_back(opts.no_d3 ? 0.0 : sig.d3);

  const std::vector<double> out = num::net_forward(gn.net, eval.input, &eval.cache);
  eval.mlp_out = out[0];
  eval.sig_mlp = bounded_logistic(eval.mlp_out);
  eval.tail_input = opts.raw_tail_score
                        ? s_tail
                        : (s_tail - stats.mean) / (stats.stddev() + 1e-8);
  eval.sig_tail = bounded_logistic(eval.tail_input);
  eval.w = (1.0 + (gn.w_max - 1.0) * eval.sig_mlp) * (1.0 + gn.eta * eval.sig_tail);
  return eval;
}

void aan_backward(const GuidanceNet& gn, const AanEval& eval, double grad_w,
                  std::span<const double> z1, std::span<const double> z0,
                  std::span<const double> m_tail, const TailStats& stats,
                  const AanOptions& opts, num::NetGrad& grad_net,
                  std::span<double> grad_z1) {
  const double factor_mlp = 1.0 + (gn.w_max - 1.0) * eval.sig_mlp;
  const double factor_tail = 1.0 + gn.eta * eval.sig_tail;

  // w = A(mlp) * B(s_tail)
  const double dw_dmlp =
      (gn.w_max - 1.0) * eval.sig_mlp * (1.0 - eval.sig_mlp) * factor_tail;
  const double grad_mlp = grad_w * dw_dmlp;

  const std::vector<double> grad_out = {grad_mlp};
  std::vector<double> grad_u;
  const num::NetGrad g = num::net_backward(gn.net, eval.cache, grad_out, &grad_u);
  grad_net.accumulate(g);

  // u = [z1 ; z0 ; d1 ; d2 ; d3]: the z1 slice plus the signal features.
  const std::size_t n = z1.size();
  for (std::size_t i = 0; i < n; ++i) grad_z1[i] += grad_u[i];

  const double gd1 = opts.no_d1 ? 0.0 : grad_u[2 * n];
  const double gd2 = opts.no_d2 ? 0.0 : grad_u[2 * n + 1];
  const double gd3 = opts.no_d3 ? 0.0 : grad_u[2 * n + 2];
  if (gd1 != 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = z1[i] - z0[i];
      grad_z1[i] += gd1 * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
    }
  }
  if (gd2 != 0.0) {
    double norm1 = 0.0, norm0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      norm1 += z1[i] * z1[i];
      norm0 += z0[i] * z0[i];
    }
    norm1 = std::sqrt(norm1);
    norm0 = std::sqrt(norm0);
    if (norm1 > 0.0) {
      // d d2/dz1_i = z1_i / (|z1|_2 (|z0|_2 + eps))
      const double c = gd2 / (norm1 * (norm0 + eval.sig.eps));
      for (std::size_t i = 0; i < n; ++i) grad_z1[i] += c * z1[i];
    }
  }
  if (gd3 != 0.0) {
    // d3 = H_tau(z0) - H_tau(z1): only the z1 term moves.
    const std::vector<double> h_grad = num::softmax_entropy_grad(z1, eval.sig.tau);
    for (std::size_t i = 0; i < n; ++i) grad_z1[i] -= gd3 * h_grad[i];
  }

  // tail bonus path: w = A * B, dB/ds_tail through the (constant) standardization
  if (gn.eta > 0.0) {
    const double dscale = opts.raw_tail_score ? 1.0 : 1.0 / (stats.stddev() + 1e-8);
    const double dw_dtail =
        factor_mlp * gn.eta * eval.sig_tail * (1.0 - eval.sig_tail) * dscale;
    const double gt = grad_w * dw_dtail;
    for (std::size_t i = 0; i < n; ++i) grad_z1[i] += gt * m_tail[i];
  }
}

namespace {

std::vector<double> run_guided_loop(const diff::DenoiserModel& f1,
                                    const diff::DenoiserModel& f0,
                                    const GuidanceNet* aan, const TailStats* stats,
                                    std::span<const double> m_tail,
                                    std::span<const double> history,
                                    const diff::DiffusionSchedule& schedule,
                                    SeededRng& rng, const GuidedSampleOptions& opts) {
  if (f1.n_items != f0.n_items)
    throw InvalidInput("guided sampling: main and weak catalogs differ");
  if (!opts.constant_w.has_value() && aan == nullptr)
    throw InvalidInput("guided sampling: no AAN and no constant weight");

  const auto check_blowup = [&](std::span<const double> x, std::size_t t) {
    for (double v : x) {
      if (!std::isfinite(v) || std::abs(v) > opts.blowup_guard)
        throw DivergenceError("guidance blow-up at step " + std::to_string(t));
    }
  };

  const std::size_t tp = schedule.infer_steps;
  if (tp == 0) {
    const std::vector<double> z1 = diff::denoise(f1, history, 1);
    const std::vector<double> z0 = diff::denoise(f0, history, 1);
    double w;
    if (opts.constant_w.has_value()) {
      w = *opts.constant_w;
    } else {
      const GuidanceSignals sig = signals(z1, z0, opts.tau, opts.eps);
      const double st = tail_score(z1, m_tail);
      w = aan_weight(*aan, z1, z0, sig, st, *stats, opts.aan).w;
    }
    std::vector<double> out = fuse(z1, z0, w);
    check_blowup(out, 0);
    return out;
  }

  std::vector<double> noise(history.size());
  rng.fill_normal(noise);
  std::vector<double> x = opts.pure_noise_init
                              ? std::move(noise)
                              : diff::q_sample(history, tp, noise, schedule);
  for (std::size_t t = tp; t >= 1; --t) {
    const std::vector<double> z1 = diff::denoise(f1, x, t);
    const std::vector<double> z0 = diff::denoise(f0, x, t);
    double w;
    if (opts.constant_w.has_value()) {
      w = *opts.constant_w;
    } else {
      const GuidanceSignals sig = signals(z1, z0, opts.tau, opts.eps);
      const double st = tail_score(z1, m_tail);
      w = aan_weight(*aan, z1, z0, sig, st, *stats, opts.aan).w;
    }
    const std::vector<double> z_ag = fuse(z1, z0, w);
    x = diff::posterior_step(x, z_ag, t, schedule, rng);
    check_blowup(x, t);
  }
  return x;
}

}  // namespace

std::vector<double> guided_sample(const diff::DenoiserModel& f1,
                                  const diff::DenoiserModel& f0,
                                  const GuidanceNet* aan, const TailStats* stats,
                                  std::span<const double> m_tail,
                                  std::span<const double> history,
                                  const diff::DiffusionSchedule& schedule,
                                  SeededRng& rng, const GuidedSampleOptions& opts) {
  return run_guided_loop(f1, f0, aan, stats, m_tail, history, schedule, rng, opts);
}

std::vector<double> ag_sample(const diff::DenoiserModel& f1,
                              const diff::DenoiserModel& f0, double w,
                              std::span<const double> history,
                              const diff::DiffusionSchedule& schedule, SeededRng& rng,
                              const GuidedSampleOptions& opts) {
  GuidedSampleOptions fixed = opts;
  fixed.constant_w = w;
  return run_guided_loop(f1, f0, nullptr, nullptr, {}, history, schedule, rng, fixed);
}

}  // namespace fairdiff::guide
