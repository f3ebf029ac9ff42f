#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fairdiff/rng.hpp"

namespace fairdiff::num {

enum class Activation { Identity, Tanh, Silu, Sigmoid };

double apply_activation(Activation act, double z);
double activation_derivative(Activation act, double z);

/// One dense layer: y = act(W x + b), W stored row-major (out x in).
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;
  std::vector<double> b;
  Activation act = Activation::Identity;
};

/// A plain fully connected network. Layer dimensions must chain.
class DenseNet {
 public:
  DenseNet() = default;

  /// Zero-initialized net with the given layer sizes, e.g. dims={4,8,2}.
  DenseNet(std::span<const std::size_t> dims, std::span<const Activation> acts);

  /// Glorot-uniform weights, zero biases. Draw order is fixed per layer.
  static DenseNet glorot(std::span<const std::size_t> dims,
                         std::span<const Activation> acts, SeededRng& rng);

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t num_params() const;
  bool all_finite() const;

  std::vector<Layer> layers;
};

/// Per-layer activations recorded by net_forward, sufficient for an exact backward.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
  std::vector<std::size_t> dims;            // dimension chain, for staleness checks
};

/// Gradients with the same shapes as the network parameters.
struct NetGrad {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  static NetGrad zeros_like(const DenseNet& net);
  void accumulate(const NetGrad& other, double scale = 1.0);
  void scale(double s);
};

/// Evaluates the network. When cache is non-null it is filled for net_backward.
std::vector<double> net_forward(const DenseNet& net, std::span<const double> x,
                                ForwardCache* cache = nullptr);

/// Backpropagates grad_y through the cached forward pass. Returns parameter
/// gradients; when grad_x is non-null the input gradient is written there.
NetGrad net_backward(const DenseNet& net, const ForwardCache& cache,
                     std::span<const double> grad_y,
                     std::vector<double>* grad_x = nullptr);

// Flat parameter views, used by the gradient checker and the optimizer.
std::vector<double> flatten_params(const DenseNet& net);
void unflatten_params(DenseNet& net, std::span<const double> flat);
std::vector<double> flatten_grad(const NetGrad& g);

struct ParamBlock {
  std::string name;
  std::size_t size = 0;
};
std::vector<ParamBlock> param_layout(const DenseNet& net, const std::string& prefix);

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a list of parameter blocks.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamParams hp) : hp_(hp) {}

  AdamParams& hyper() { return hp_; }
  const AdamParams& hyper() const { return hp_; }
  std::int64_t step_count() const { return step_; }

  /// Applies one update. Blocks must keep the same sizes across calls.
  /// Throws DivergenceError (naming the block index) on non-finite gradients.
  void update(std::vector<std::span<double>> params,
              std::vector<std::span<const double>> grads);

  /// Convenience for a whole network.
  void update(DenseNet& net, const NetGrad& grad);

 private:
  AdamParams hp_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t step_ = 0;
};

}  // namespace fairdiff::num
