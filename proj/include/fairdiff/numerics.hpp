#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fairdiff/net.hpp"

namespace fairdiff::num {

/// Numerically stable logistic function.
double logistic(double z);

/// Temperature-scaled softmax, computed with max-subtraction.
/// Throws ConfigError when tau <= 0, InvalidInput on non-finite input.
std::vector<double> softmax_tau(std::span<const double> z, double tau);

/// Shannon entropy in nats; 0*log(0) is treated as 0.
/// The input must be a distribution: entries >= 0, sum within 1e-9 of 1.
double shannon_entropy(std::span<const double> p);

/// Entropy of softmax_tau(z, tau); shorthand used by the guidance signals.
double softmax_entropy(std::span<const double> z, double tau);

/// Gradient of softmax_entropy with respect to z.
std::vector<double> softmax_entropy_grad(std::span<const double> z, double tau);

struct GradCheckBlock {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool ok() const { return max_rel_err <= tol; }
  std::string summary() const;
};

/// Central-difference gradient check.
///
/// For each parameter i the relative error is
///   |analytic_i - fd_i| / (|analytic_i| + 1e-12)
/// and the report carries the per-block maximum. loss_fn must be a
/// deterministic function of the parameter vector.
GradCheckReport finite_diff_check(
    const std::function<double(std::span<const double>)>& loss_fn,
    std::span<const double> params, std::span<const double> analytic_grad,
    double h, double tol, std::span<const ParamBlock> layout = {});

}  // namespace fairdiff::num
