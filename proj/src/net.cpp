#include "fairdiff/net.hpp"

#include <cmath>
#include <stdexcept>

#include "fairdiff/error.hpp"

namespace fairdiff::num {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double apply_activation(Activation act, double z) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Silu: return z * sigmoid(z);
    case Activation::Sigmoid: return sigmoid(z);
  }
  return z;
}

double activation_derivative(Activation act, double z) {
  switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Silu: {
      const double s = sigmoid(z);
      return s * (1.0 + z * (1.0 - s));
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

DenseNet::DenseNet(std::span<const std::size_t> dims, std::span<const Activation> acts) {
  if (dims.size() < 2) throw InvalidInput("DenseNet needs at least one layer");
  if (acts.size() != dims.size() - 1)
    throw InvalidInput("DenseNet: one activation per layer required");
  layers.resize(dims.size() - 1);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].in = dims[l];
    layers[l].out = dims[l + 1];
    layers[l].w.assign(dims[l] * dims[l + 1], 0.0);
    layers[l].b.assign(dims[l + 1], 0.0);
    layers[l].act = acts[l];
  }
}

DenseNet DenseNet::glorot(std::span<const std::size_t> dims,
                          std::span<const Activation> acts, SeededRng& rng) {
  DenseNet net(dims, acts);
  for (Layer& layer : net.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (double& w : layer.w) w = rng.uniform(-bound, bound);
  }
  return net;
}

std::size_t DenseNet::num_params() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += l.w.size() + l.b.size();
  return n;
}

bool DenseNet::all_finite() const {
  for (const Layer& l : layers) {
    for (double w : l.w)
      if (!std::isfinite(w)) return false;
    for (double b : l.b)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

NetGrad NetGrad::zeros_like(const DenseNet& net) {
  NetGrad g;
  g.w.resize(net.layers.size());
  g.b.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    g.w[l].assign(net.layers[l].w.size(), 0.0);
    g.b[l].assign(net.layers[l].b.size(), 0.0);
  }
  return g;
}

void NetGrad::accumulate(const NetGrad& other, double scale) {
  for (std::size_t l = 0; l < w.size(); ++l) {
    for (std::size_t i = 0; i < w[l].size(); ++i) w[l][i] += scale * other.w[l][i];
    for (std::size_t i = 0; i < b[l].size(); ++i) b[l][i] += scale * other.b[l][i];
  }
}

void NetGrad::scale(double s) {
  for (auto& lw : w)
    for (double& x : lw) x *= s;
  for (auto& lb : b)
    for (double& x : lb) x *= s;
}

std::vector<double> net_forward(const DenseNet& net, std::span<const double> x,
                                ForwardCache* cache) {
  if (net.layers.empty()) throw InvalidInput("net_forward: empty network");
  if (x.size() != net.input_dim())
    throw InvalidInput("net_forward: input has dim " + std::to_string(x.size()) +
                       ", network expects " + std::to_string(net.input_dim()));

  std::vector<double> cur(x.begin(), x.end());
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
    cache->dims.clear();
    cache->dims.push_back(net.input_dim());
  }
  for (const Layer& layer : net.layers) {
    if (cache) cache->inputs.push_back(cur);
    std::vector<double> pre(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* wrow = layer.w.data() + o * layer.in;
      double acc = layer.b[o];
      for (std::size_t i = 0; i < layer.in; ++i) acc += wrow[i] * cur[i];
      pre[o] = acc;
    }
    std::vector<double> out(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o)
      out[o] = apply_activation(layer.act, pre[o]);
    if (cache) {
      cache->pre.push_back(std::move(pre));
      cache->dims.push_back(layer.out);
    }
    cur = std::move(out);
  }
  return cur;
}

NetGrad net_backward(const DenseNet& net, const ForwardCache& cache,
                     std::span<const double> grad_y, std::vector<double>* grad_x) {
  const std::size_t L = net.layers.size();
  if (cache.inputs.size() != L || cache.pre.size() != L || cache.dims.size() != L + 1)
    throw InvalidInput("net_backward: cache does not match this network");
  for (std::size_t l = 0; l < L; ++l) {
    if (cache.dims[l] != net.layers[l].in || cache.dims[l + 1] != net.layers[l].out ||
        cache.inputs[l].size() != net.layers[l].in ||
        cache.pre[l].size() != net.layers[l].out)
      throw InvalidInput("net_backward: stale cache (layer " + std::to_string(l) + ")");
  }
  if (grad_y.size() != net.output_dim())
    throw InvalidInput("net_backward: grad_y has dim " + std::to_string(grad_y.size()) +
                       ", expected " + std::to_string(net.output_dim()));

  NetGrad grad = NetGrad::zeros_like(net);
  std::vector<double> delta(grad_y.begin(), grad_y.end());
  for (std::size_t l = L; l-- > 0;) {
    const Layer& layer = net.layers[l];
    // through the activation
    for (std::size_t o = 0; o < layer.out; ++o)
      delta[o] *= activation_derivative(layer.act, cache.pre[l][o]);
    // parameter gradients
    const std::vector<double>& in = cache.inputs[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      double* gwrow = grad.w[l].data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) gwrow[i] += delta[o] * in[i];
      grad.b[l][o] += delta[o];
    }
    // input gradient
    std::vector<double> next(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* wrow = layer.w.data() + o * layer.in;
      const double d = delta[o];
      for (std::size_t i = 0; i < layer.in; ++i) next[i] += wrow[i] * d;
    }
    delta = std::move(next);
  }
  if (grad_x) *grad_x = std::move(delta);
  return grad;
}

std::vector<double> flatten_params(const DenseNet& net) {
  std::vector<double> flat;
  flat.reserve(net.num_params());
  for (const Layer& l : net.layers) {
    flat.insert(flat.end(), l.w.begin(), l.w.end());
    flat.insert(flat.end(), l.b.begin(), l.b.end());
  }
  return flat;
}

void unflatten_params(DenseNet& net, std::span<const double> flat) {
  if (flat.size() != net.num_params())
    throw InvalidInput("unflatten_params: size mismatch");
  std::size_t pos = 0;
  for (Layer& l : net.layers) {
    for (double& w : l.w) w = flat[pos++];
    for (double& b : l.b) b = flat[pos++];
  }
}

std::vector<double> flatten_grad(const NetGrad& g) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < g.w.size(); ++l) {
    flat.insert(flat.end(), g.w[l].begin(), g.w[l].end());
    flat.insert(flat.end(), g.b[l].begin(), g.b[l].end());
  }
  return flat;
}

std::vector<ParamBlock> param_layout(const DenseNet& net, const std::string& prefix) {
  std::vector<ParamBlock> blocks;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    blocks.push_back({prefix + "." + std::to_string(l) + ".w", net.layers[l].w.size()});
    blocks.push_back({prefix + "." + std::to_string(l) + ".b", net.layers[l].b.size()});
  }
  return blocks;
}

void Adam::update(std::vector<std::span<double>> params,
                  std::vector<std::span<const double>> grads) {
  if (params.size() != grads.size())
    throw InvalidInput("Adam::update: params/grads block count mismatch");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k].assign(params[k].size(), 0.0);
      v_[k].assign(params[k].size(), 0.0);
    }
  }
  if (m_.size() != params.size())
    throw InvalidInput("Adam::update: block count changed between calls");

  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (grads[k].size() != params[k].size() || m_[k].size() != params[k].size())
      throw InvalidInput("Adam::update: block " + std::to_string(k) + " size mismatch");
    for (double g : grads[k])
      if (!std::isfinite(g))
        throw DivergenceError("non-finite gradient in parameter block " +
                              std::to_string(k));
  }

  ++step_;
  const double bc1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::span<double> p = params[k];
    std::span<const double> g = grads[k];
    std::vector<double>& m = m_[k];
    std::vector<double>& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = hp_.beta1 * m[i] + (1.0 - hp_.beta1) * g[i];
      v[i] = hp_.beta2 * v[i] + (1.0 - hp_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= hp_.lr * mhat / (std::sqrt(vhat) + hp_.eps);
    }
  }
}

void Adam::update(DenseNet& net, const NetGrad& grad) {
  std::vector<std::span<double>> params;
  std::vector<std::span<const double>> grads;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    params.emplace_back(net.layers[l].w);
    params.emplace_back(net.layers[l].b);
    grads.emplace_back(grad.w[l]);
    grads.emplace_back(grad.b[l]);
  }
  update(std::move(params), std::move(grads));
}

}  // namespace fairdiff::num
