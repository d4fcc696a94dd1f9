#include "detrl/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "detrl/digest.hpp"

namespace detrl {

namespace {

constexpr std::uint32_t kNetMagic = 0x4e524c44;  // "DLRN" little-endian
constexpr std::uint32_t kNetVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw std::runtime_error("network file truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

void write_f32(std::ofstream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}

float read_f32(std::ifstream& in) {
  const std::uint32_t bits = read_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

QNetwork init_network(const std::vector<int>& layer_sizes,
                      RandomStream& init_stream) {
  QNetwork net = make_network<float>(layer_sizes);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const float scale =
        1.0f / std::sqrt(static_cast<float>(net.layer_sizes[l]));
    for (auto& w : net.weights[l])
      w = static_cast<float>(init_stream.next_gaussian()) * scale;
  }
  return net;
}

OptimizerState make_optimizer(const QNetwork& net, float learning_rate,
                              float decay, float epsilon_stab) {
  OptimizerState opt;
  opt.learning_rate = learning_rate;
  opt.decay = decay;
  opt.epsilon_stab = epsilon_stab;
  for (const auto& w : net.weights) opt.weight_acc.emplace_back(w.size(), 0.0f);
  for (const auto& b : net.biases) opt.bias_acc.emplace_back(b.size(), 0.0f);
  return opt;
}

namespace {

void check_finite(const std::vector<std::vector<float>>& grads) {
  for (const auto& layer : grads)
    for (float g : layer)
      if (!std::isfinite(g)) throw DivergenceError("non-finite gradient");
}

void rmsprop_step(float* params, const float* grads, float* acc,
                  std::size_t n, const OptimizerState& opt) {
  for (std::size_t i = 0; i < n; ++i) {
    const float g = grads[i];
    acc[i] = opt.decay * acc[i] + (1.0f - opt.decay) * g * g;
    params[i] -= opt.learning_rate * g / std::sqrt(acc[i] + opt.epsilon_stab);
  }
}

}  // namespace

void apply_update(QNetwork& net, const Gradients<float>& grads,
                  OptimizerState& opt) {
  if (grads.weights.size() != net.layer_count())
    throw std::invalid_argument("apply_update: shape mismatch");
  // Validate before touching any parameter so a diverged run aborts with
  // the network still in its pre-update state.
  check_finite(grads.weights);
  check_finite(grads.biases);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (grads.weights[l].size() != net.weights[l].size() ||
        grads.biases[l].size() != net.biases[l].size())
      throw std::invalid_argument("apply_update: shape mismatch");
    rmsprop_step(net.weights[l].data(), grads.weights[l].data(),
                 opt.weight_acc[l].data(), net.weights[l].size(), opt);
    rmsprop_step(net.biases[l].data(), grads.biases[l].data(),
                 opt.bias_acc[l].data(), net.biases[l].size(), opt);
  }
}

std::uint64_t weight_hash(const QNetwork& net) {
  Fnv1a64 h;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (float w : net.weights[l]) h.update_f32(w);
    for (float b : net.biases[l]) h.update_f32(b);
  }
  return h.digest();
}

void save_network(const QNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_u32(out, kNetMagic);
  write_u32(out, kNetVersion);
  write_u32(out, static_cast<std::uint32_t>(net.layer_sizes.size()));
  for (int s : net.layer_sizes) write_u32(out, static_cast<std::uint32_t>(s));
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (float w : net.weights[l]) write_f32(out, w);
    for (float b : net.biases[l]) write_f32(out, b);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

QNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (read_u32(in) != kNetMagic)
    throw std::runtime_error("not a network file: " + path.string());
  if (read_u32(in) != kNetVersion)
    throw std::runtime_error("unsupported network version");
  const std::uint32_t n = read_u32(in);
  if (n < 2 || n > 64) throw std::runtime_error("corrupt layer count");
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = static_cast<int>(read_u32(in));
  QNetwork net = make_network<float>(sizes);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (auto& w : net.weights[l]) w = read_f32(in);
    for (auto& b : net.biases[l]) b = read_f32(in);
  }
  return net;
}

}  // namespace detrl
