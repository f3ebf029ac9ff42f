#include "fairdiff/schedule.hpp"

#include <string>

#include "fairdiff/error.hpp"

namespace fairdiff::diff {

double DiffusionSchedule::alpha_bar_at(std::size_t t) const {
  if (t == 0) return 1.0;
  if (t > steps) throw InvalidInput("alpha_bar_at: t out of range");
  return alpha_bar[t - 1];
}

DiffusionSchedule build_schedule(std::size_t steps, std::size_t infer_steps,
                                 double beta_start, double beta_end) {
  if (steps < 1) throw ConfigError("diffusion steps must be >= 1");
  if (infer_steps > steps)
    throw ConfigError("inference steps " + std::to_string(infer_steps) +
                      " exceed T=" + std::to_string(steps));
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
    throw ConfigError("beta bounds must satisfy 0 < beta_start <= beta_end < 1");

  DiffusionSchedule s;
  s.steps = steps;
  s.infer_steps = infer_steps;
  s.beta.resize(steps);
  s.alpha.resize(steps);
  s.alpha_bar.resize(steps);
  double prod = 1.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    s.beta[i] = beta_start + (beta_end - beta_start) * frac;
    s.alpha[i] = 1.0 - s.beta[i];
    prod *= s.alpha[i];
    s.alpha_bar[i] = prod;
  }
  return s;
}

}  // namespace fairdiff::diff
