#pragma once

#include <cstddef>
#include <vector>

namespace fairdiff::diff {

/// Linear-beta corruption schedule. alpha_bar(0) == 1 by convention.
struct DiffusionSchedule {
  std::size_t steps = 0;        // T
  std::size_t infer_steps = 0;  // T' in [0, T]
  std::vector<double> beta;     // beta[t-1] for t = 1..T
  std::vector<double> alpha;    // 1 - beta
  std::vector<double> alpha_bar;

  double alpha_bar_at(std::size_t t) const;  // t in [0, T]
};

/// Betas interpolate linearly from beta_start to beta_end.
/// Throws ConfigError on invalid bounds.
DiffusionSchedule build_schedule(std::size_t steps, std::size_t infer_steps,
                                 double beta_start, double beta_end);

}  // namespace fairdiff::diff
