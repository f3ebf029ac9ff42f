#include "fairdiff/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairdiff/error.hpp"

namespace fairdiff::num {

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> softmax_tau(std::span<const double> z, double tau) {
  if (!(tau > 0.0)) throw ConfigError("softmax temperature must be > 0");
  if (z.empty()) throw InvalidInput("softmax_tau: empty input");
  double zmax = z[0];
  for (double v : z) {
    if (!std::isfinite(v)) throw InvalidInput("softmax_tau: non-finite input");
    zmax = std::max(zmax, v);
  }
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp((z[i] - zmax) / tau);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double shannon_entropy(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw InvalidInput("shannon_entropy: negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidInput("shannon_entropy: probabilities sum to " + std::to_string(sum));
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double softmax_entropy(std::span<const double> z, double tau) {
  return shannon_entropy(softmax_tau(z, tau));
}

std::vector<double> softmax_entropy_grad(std::span<const double> z, double tau) {
  const std::vector<double> p = softmax_tau(z, tau);
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double lp = p[i] > 0.0 ? std::log(p[i]) : 0.0;
    g[i] = -(p[i] / tau) * (lp + h);
  }
  return g;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << "max_rel_err=" << max_rel_err << " tol=" << tol;
  for (const GradCheckBlock& b : blocks)
    os << "\n  " << b.name << ": " << b.max_rel_err << " (index " << b.worst_index << ")";
  return os.str();
}

GradCheckReport finite_diff_check(
    const std::function<double(std::span<const double>)>& loss_fn,
    std::span<const double> params, std::span<const double> analytic_grad,
    double h, double tol, std::span<const ParamBlock> layout) {
  if (params.size() != analytic_grad.size())
    throw InvalidInput("finite_diff_check: gradient size mismatch");
  if (!(h > 0.0)) throw InvalidInput("finite_diff_check: step must be > 0");

  std::vector<ParamBlock> blocks(layout.begin(), layout.end());
  if (blocks.empty()) blocks.push_back({"params", params.size()});
  std::size_t total = 0;
  for (const ParamBlock& b : blocks) total += b.size;
  if (total != params.size())
    throw InvalidInput("finite_diff_check: block layout does not cover parameters");

  GradCheckReport report;
  report.tol = tol;
  std::vector<double> work(params.begin(), params.end());
  std::size_t pos = 0;
  for (const ParamBlock& spec : blocks) {
    GradCheckBlock block;
    block.name = spec.name;
    for (std::size_t k = 0; k < spec.size; ++k, ++pos) {
      const double saved = work[pos];
      work[pos] = saved + h;
      const double fp = loss_fn(work);
      work[pos] = saved - h;
      const double fm = loss_fn(work);
      work[pos] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      const double rel =
          std::abs(analytic_grad[pos] - fd) / (std::abs(analytic_grad[pos]) + 1e-12);
      if (rel > block.max_rel_err) {
        block.max_rel_err = rel;
        block.worst_index = k;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, block.max_rel_err);
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace fairdiff::num
