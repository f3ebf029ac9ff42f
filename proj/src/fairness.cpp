#include "fairdiff/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairdiff/error.hpp"
#include "fairdiff/numerics.hpp"

namespace fairdiff::fair {

namespace {

void check_distribution(const Triple& q, const char* what) {
  double sum = 0.0;
  for (double v : q) {
    if (v < 0.0) throw ConfigError(std::string(what) + " has a negative component");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError(std::string(what) + " does not sum to 1");
}

double triple_entropy(const Triple& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace

TargetDistribution target_distribution(std::span<const Triple> batch_histories,
                                       const Triple& prior) {
  if (batch_histories.empty()) throw InvalidInput("target_distribution: empty batch");
  check_distribution(prior, "prior Q");

  TargetDistribution out;
  out.prior = prior;
  for (const Triple& h : batch_histories)
    for (std::size_t c = 0; c < 3; ++c) out.mean_history[c] += h[c];
  for (double& v : out.mean_history) v /= static_cast<double>(batch_histories.size());

  out.gamma = 1.0 - out.mean_history[data::kHigh];
  for (std::size_t c = 0; c < 3; ++c)
    out.t[c] = out.gamma * out.mean_history[c] + (1.0 - out.gamma) * prior[c];
  return out;
}

double kth_largest(std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > scores.size()) throw InvalidInput("kth_largest: k out of range");
  std::vector<double> v(scores.begin(), scores.end());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end(),
                   std::greater<double>());
  return v[k - 1];
}

Triple rec_distribution_hard(std::span<const double> scores, std::size_t k,
                             std::span<const data::PopBin> bins) {
  if (k < 1 || k > scores.size())
    throw InvalidInput("rec_distribution_hard: K out of range");
  if (bins.size() != scores.size())
    throw InvalidInput("rec_distribution_hard: bins/scores size mismatch");
  std::vector<std::uint32_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  Triple r = {0.0, 0.0, 0.0};
  for (std::size_t p = 0; p < k; ++p) r[static_cast<std::size_t>(bins[idx[p]])] += 1.0;
  for (double& v : r) v /= static_cast<double>(k);
  return r;
}

SoftRecDistribution rec_distribution_soft_at(std::span<const double> scores,
                                             double theta,
                                             std::span<const data::PopBin> bins,
                                             double tau_pop) {
  if (!(tau_pop > 0.0)) throw ConfigError("tau_pop must be > 0");
  if (bins.size() != scores.size())
    throw InvalidInput("rec_distribution_soft: bins/scores size mismatch");
  SoftRecDistribution out;
  out.theta = theta;
  out.membership.resize(scores.size());
  Triple mass = {0.0, 0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = num::logistic((scores[i] - theta) / tau_pop);
    out.membership[i] = p;
    mass[static_cast<std::size_t>(bins[i])] += p;
    total += p;
  }
  out.soft_total = total;
  for (std::size_t c = 0; c < 3; ++c) out.r[c] = mass[c] / total;
  return out;
}

SoftRecDistribution rec_distribution_soft(std::span<const double> scores, std::size_t k,
                                          std::span<const data::PopBin> bins,
                                          double tau_pop) {
  return rec_distribution_soft_at(scores, kth_largest(scores, k), bins, tau_pop);
}

std::array<std::vector<double>, 3> soft_rec_grad(const SoftRecDistribution& dist,
                                                 std::span<const double> scores,
                                                 double theta,
                                                 std::span<const data::PopBin> bins,
                                                 double tau_pop) {
  std::array<std::vector<double>, 3> grad;
  for (auto& g : grad) g.assign(scores.size(), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = dist.membership[i];
    const double dp = p * (1.0 - p) / tau_pop;  // sigmoid'((z-theta)/tau)/tau
    const std::size_t ci = static_cast<std::size_t>(bins[i]);
    for (std::size_t c = 0; c < 3; ++c) {
      const double indicator = (c == ci) ? 1.0 : 0.0;
      grad[c][i] = dp * (indicator - dist.r[c]) / dist.soft_total;
    }
  }
  (void)theta;
  return grad;
}

PopLossResult pop_loss(std::span<const Triple> batch_rec, const Triple& target) {
  if (batch_rec.empty()) throw InvalidInput("pop_loss: empty batch");
  PopLossResult out;
  const double inv_b = 1.0 / static_cast<double>(batch_rec.size());

  for (const Triple& r : batch_rec) {
    out.over_term += std::max(0.0, r[data::kHigh] - target[data::kHigh]) * inv_b;
    out.under_term += std::max(0.0, target[data::kLow] - r[data::kLow]) * inv_b;
    for (std::size_t c = 0; c < 3; ++c) out.r_bar[c] += r[c] * inv_b;
  }
  const double h_target = triple_entropy(target);
  const double h_rbar = triple_entropy(out.r_bar);
  out.balance_term = std::max(0.0, h_target - h_rbar);
  out.loss = out.over_term + out.under_term + out.balance_term;

  out.grad_r.assign(batch_rec.size(), Triple{0.0, 0.0, 0.0});
  const bool balance_active = h_target - h_rbar > 0.0;
  for (std::size_t u = 0; u < batch_rec.size(); ++u) {
    Triple& g = out.grad_r[u];
    if (batch_rec[u][data::kHigh] - target[data::kHigh] > 0.0) g[data::kHigh] += inv_b;
    if (target[data::kLow] - batch_rec[u][data::kLow] > 0.0) g[data::kLow] -= inv_b;
    if (balance_active) {
      // -dH(rbar)/drbar_c = ln(rbar_c) + 1, spread through the batch mean
      for (std::size_t c = 0; c < 3; ++c) {
        if (out.r_bar[c] > 0.0) g[c] += (std::log(out.r_bar[c]) + 1.0) * inv_b;
      }
    }
  }
  return out;
}

}  // namespace fairdiff::fair
