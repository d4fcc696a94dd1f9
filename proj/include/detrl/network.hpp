#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "detrl/rng.hpp"

namespace detrl {

enum class ComputeKind { kDeterministic, kPerturbedReduction };

// Deterministic mode performs every summation in ascending-index order.
// PerturbedReduction permutes the summation order of each dot product and
// each batch reduction using the attached stream; the exact-arithmetic value
// is unchanged but 32-bit rounding may differ. This is the desk-scale analog
// of nondeterministic GPU reductions.
struct ComputeMode {
  ComputeKind kind = ComputeKind::kDeterministic;
  RandomStream* stream = nullptr;

  static ComputeMode deterministic() { return {}; }
  static ComputeMode perturbed(RandomStream& s) {
    return {ComputeKind::kPerturbedReduction, &s};
  }
};

// Fully connected feed-forward network. Weights are stored per layer in
// row-major (out x in) order; that fixed layer-major, row-major iteration
// order is the contract for initialization, hashing and serialization.
// Parameters are 32-bit floats in training; the double instantiation exists
// for test-side shadow arithmetic.
template <typename T>
struct Network {
  std::vector<int> layer_sizes;
  std::vector<std::vector<T>> weights;
  std::vector<std::vector<T>> biases;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
};

using QNetwork = Network<float>;

template <typename T>
struct Gradients {
  std::vector<std::vector<T>> weights;
  std::vector<std::vector<T>> biases;
};

template <typename T>
struct TargetItem {
  const T* state;  // input_size values
  int action;
  T td_target;
};

template <typename T>
struct BackwardResult {
  Gradients<T> grads;
  T loss;
};

// RMSProp. The paper's optimizer is unpublished; these are configuration
// defaults of this artifact, not ground truth. epsilon_stab defaults to
// 0.01 * learning_rate; a flat 1e-2 would swamp the squared-gradient
// accumulators at this scale and stall learning.
struct OptimizerState {
  float learning_rate = 2.5e-4f;
  float decay = 0.95f;
  float epsilon_stab = 2.5e-6f;
  std::vector<std::vector<float>> weight_acc;
  std::vector<std::vector<float>> bias_acc;
};

// Thrown when a non-finite loss or gradient signals a diverged run.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Sums `n` terms term_fn(i) into `init`, in ascending order (deterministic)
// or in a Fisher-Yates order drawn from mode.stream (perturbed).
template <typename T, typename TermFn>
T ordered_sum(T init, std::size_t n, const ComputeMode& mode, TermFn&& term_fn) {
  T acc = init;
  if (mode.kind == ComputeKind::kDeterministic || n < 2) {
    for (std::size_t i = 0; i < n; ++i) acc += term_fn(i);
    return acc;
  }
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::uint64_t j = mode.stream->next_int(i + 1);
    std::swap(perm[i], perm[j]);
  }
  for (std::size_t i = 0; i < n; ++i) acc += term_fn(perm[i]);
  return acc;
}

}  // namespace detail

template <typename T>
Network<T> make_network(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("network needs at least 2 layers");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");
  Network<T> net;
  net.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const auto rows = static_cast<std::size_t>(layer_sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(layer_sizes[l]);
    net.weights.emplace_back(rows * cols, T(0));
    net.biases.emplace_back(rows, T(0));
  }
  return net;
}

// Weights ~ N(0, 1/fan_in) drawn from init_stream in layer-major, row-major
// order; biases zero.
QNetwork init_network(const std::vector<int>& layer_sizes,
                      RandomStream& init_stream);

template <typename T>
Gradients<T> zero_gradients(const Network<T>& net) {
  Gradients<T> g;
  for (const auto& w : net.weights) g.weights.emplace_back(w.size(), T(0));
  for (const auto& b : net.biases) g.biases.emplace_back(b.size(), T(0));
  return g;
}

// ReLU hidden layers, linear output. Each dot product starts from the bias
// and adds weight*input terms in the order given by `mode`.
template <typename T>
std::vector<T> forward(const Network<T>& net, std::span<const T> input,
                       const ComputeMode& mode = {}) {
  if (static_cast<int>(input.size()) != net.input_size())
    throw std::invalid_argument("forward: input length mismatch");
  std::vector<T> cur(input.begin(), input.end());
  std::vector<T> next;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto rows = static_cast<std::size_t>(net.layer_sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(net.layer_sizes[l]);
    const bool hidden = l + 1 < net.layer_count();
    next.assign(rows, T(0));
    const T* w = net.weights[l].data();
    for (std::size_t o = 0; o < rows; ++o) {
      const T* row = w + o * cols;
      T z = detail::ordered_sum(net.biases[l][o], cols, mode,
                                [&](std::size_t i) { return row[i] * cur[i]; });
      next[o] = hidden && z < T(0) ? T(0) : z;
    }
    cur.swap(next);
  }
  return cur;
}

// Greedy action with lowest-index tie-break.
template <typename T>
int argmax_action(std::span<const T> q) {
  int best = 0;
  for (std::size_t a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = static_cast<int>(a);
  return best;
}

// Gradient of (1/B) * sum_i (td_target_i - Q(s_i, a_i))^2; the gradient flows
// only through each item's taken-action output unit. The batch reduction and
// every inner dot follow `mode`'s ordering.
template <typename T>
BackwardResult<T> backward(const Network<T>& net,
                           std::span<const TargetItem<T>> batch,
                           const ComputeMode& mode = {}) {
  if (batch.empty()) throw std::invalid_argument("backward: empty minibatch");
  const std::size_t n_layers = net.layer_count();
  const std::size_t batch_size = batch.size();

  // Item processing order is the batch reduction order.
  std::vector<std::uint32_t> order(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i)
    order[i] = static_cast<std::uint32_t>(i);
  if (mode.kind == ComputeKind::kPerturbedReduction && batch_size > 1) {
    for (std::size_t i = batch_size - 1; i > 0; --i) {
      const std::uint64_t j = mode.stream->next_int(i + 1);
      std::swap(order[i], order[j]);
    }
  }

  BackwardResult<T> result;
  result.grads = zero_gradients(net);
  result.loss = T(0);
  const T inv_b = T(1) / static_cast<T>(batch_size);

  std::vector<std::vector<T>> activations(n_layers + 1);
  std::vector<std::vector<T>> preacts(n_layers);
  std::vector<T> delta, delta_prev;

  for (std::size_t rank = 0; rank < batch_size; ++rank) {
    const TargetItem<T>& item = batch[order[rank]];
    if (item.action < 0 || item.action >= net.output_size())
      throw std::invalid_argument("backward: action out of range");

    // Forward pass, keeping pre-activations for the ReLU derivative.
    activations[0].assign(item.state,
                          item.state + static_cast<std::size_t>(net.input_size()));
    for (std::size_t l = 0; l < n_layers; ++l) {
      const auto rows = static_cast<std::size_t>(net.layer_sizes[l + 1]);
      const auto cols = static_cast<std::size_t>(net.layer_sizes[l]);
      const bool hidden = l + 1 < n_layers;
      const T* w = net.weights[l].data();
      const std::vector<T>& in = activations[l];
      preacts[l].assign(rows, T(0));
      activations[l + 1].assign(rows, T(0));
      for (std::size_t o = 0; o < rows; ++o) {
        const T* row = w + o * cols;
        T z = detail::ordered_sum(net.biases[l][o], cols, mode,
                                  [&](std::size_t i) { return row[i] * in[i]; });
        preacts[l][o] = z;
        activations[l + 1][o] = hidden && z < T(0) ? T(0) : z;
      }
    }

    const T q = activations[n_layers][static_cast<std::size_t>(item.action)];
    const T residual = item.td_target - q;
    result.loss += inv_b * residual * residual;

    // d loss / d q for this item; everything else in the output is zero.
    delta.assign(static_cast<std::size_t>(net.output_size()), T(0));
    delta[static_cast<std::size_t>(item.action)] = T(-2) * inv_b * residual;

    for (std::size_t l = n_layers; l-- > 0;) {
      const auto rows = static_cast<std::size_t>(net.layer_sizes[l + 1]);
      const auto cols = static_cast<std::size_t>(net.layer_sizes[l]);
      const std::vector<T>& in = activations[l];
      T* gw = result.grads.weights[l].data();
      T* gb = result.grads.biases[l].data();
      for (std::size_t o = 0; o < rows; ++o) {
        const T d = delta[o];
        if (d == T(0)) continue;
        T* grow = gw + o * cols;
        for (std::size_t i = 0; i < cols; ++i) grow[i] += d * in[i];
        gb[o] += d;
      }
      if (l == 0) break;
      const T* w = net.weights[l].data();
      delta_prev.assign(cols, T(0));
      for (std::size_t i = 0; i < cols; ++i) {
        if (preacts[l - 1][i] < T(0)) continue;  // ReLU gate
        delta_prev[i] = detail::ordered_sum(
            T(0), rows, mode, [&](std::size_t o) { return w[o * cols + i] * delta[o]; });
      }
      delta.swap(delta_prev);
    }
  }
  return result;
}

OptimizerState make_optimizer(const QNetwork& net, float learning_rate,
                              float decay, float epsilon_stab);

// acc <- decay*acc + (1-decay)*g^2; theta <- theta - lr*g/sqrt(acc + eps).
// Parameters are visited in the fixed layer-major order. Non-finite
// gradients raise DivergenceError.
void apply_update(QNetwork& net, const Gradients<float>& grads,
                  OptimizerState& opt);

// FNV-1a over the exact 32-bit patterns of all weights and biases in the
// fixed iteration order.
std::uint64_t weight_hash(const QNetwork& net);

// Versioned little-endian binary format; round-trips bit-exactly.
void save_network(const QNetwork& net, const std::filesystem::path& path);
QNetwork load_network(const std::filesystem::path& path);

template <typename To, typename From>
Network<To> convert_network(const Network<From>& net) {
  Network<To> out;
  out.layer_sizes = net.layer_sizes;
  for (const auto& w : net.weights)
    out.weights.emplace_back(w.begin(), w.end());
  for (const auto& b : net.biases)
    out.biases.emplace_back(b.begin(), b.end());
  return out;
}

}  // namespace detrl
