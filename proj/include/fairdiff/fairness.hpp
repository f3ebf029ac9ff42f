#pragma once

#include <span>
#include <vector>

#include "fairdiff/popularity.hpp"

namespace fairdiff::fair {

using data::Triple;

/// Adaptive target distribution T = gamma * mean(H_u) + (1 - gamma) * Q
/// with gamma = 1 - mean(H_u)[high].
struct TargetDistribution {
  Triple t = {0.0, 0.0, 0.0};
  double gamma = 0.0;
  Triple mean_history = {0.0, 0.0, 0.0};
  Triple prior = {0.0, 0.0, 0.0};
};

TargetDistribution target_distribution(std::span<const Triple> batch_histories,
                                       const Triple& prior);

/// Popularity distribution of the top-K items by score (ties broken by
/// ascending item id): counts per bin divided by K.
Triple rec_distribution_hard(std::span<const double> scores, std::size_t k,
                             std::span<const data::PopBin> bins);

/// Differentiable surrogate: soft membership p_i = sigmoid((z_i - theta)/tau_pop)
/// with theta the K-th largest score, then bin masses normalized by the total
/// soft count. theta is treated as a constant in the gradient.
struct SoftRecDistribution {
  Triple r = {0.0, 0.0, 0.0};
  double theta = 0.0;       // K-th largest score at evaluation time
  double soft_total = 0.0;  // sum of memberships
  std::vector<double> membership;
};

/// K-th largest value of scores (K >= 1, K <= |scores|).
double kth_largest(std::span<const double> scores, std::size_t k);

SoftRecDistribution rec_distribution_soft(std::span<const double> scores, std::size_t k,
                                          std::span<const data::PopBin> bins,
                                          double tau_pop);

/// Same computation against a frozen threshold (used by training backprop
/// and by finite-difference checks, which must hold theta fixed).
SoftRecDistribution rec_distribution_soft_at(std::span<const double> scores,
                                             double theta,
                                             std::span<const data::PopBin> bins,
                                             double tau_pop);

/// d r / d scores as three gradient rows (one per bin component), each of
/// catalog length; theta constant.
std::array<std::vector<double>, 3> soft_rec_grad(const SoftRecDistribution& dist,
                                                 std::span<const double> scores,
                                                 double theta,
                                                 std::span<const data::PopBin> bins,
                                                 double tau_pop);

/// Unified popularity regularization over a batch of per-user distributions:
///   mean_u [r_u^h - T^h]_+  +  mean_u [T^l - r_u^l]_+  +  [H(T) - H(rbar)]_+
struct PopLossResult {
  double loss = 0.0;
  double over_term = 0.0;     // HighPop overexposure
  double under_term = 0.0;    // LowPop underexposure
  double balance_term = 0.0;  // entropy gap
  Triple r_bar = {0.0, 0.0, 0.0};
  /// dL/dr_u for every user (same order as the input batch).
  std::vector<Triple> grad_r;
};

PopLossResult pop_loss(std::span<const Triple> batch_rec, const Triple& target);

}  // namespace fairdiff::fair
