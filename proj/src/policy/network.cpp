#include "kgrl/policy/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "kgrl/autodiff/init.hpp"

namespace kgrl::policy {

using autodiff::Shape;

std::size_t AgentConfig::conv1_extent() const {
  return autodiff::conv_output_extent(image_size, conv1_kernel, conv1_stride);
}

std::size_t AgentConfig::conv2_extent() const {
  return autodiff::conv_output_extent(conv1_extent(), conv2_kernel, conv2_stride);
}

std::size_t AgentConfig::flatten_width() const {
  const std::size_t e = conv2_extent();
  return e * e * conv2_channels;
}

void AgentConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw std::invalid_argument(std::string("agent.") + name + " must be positive");
  };
  positive(n_joints, "n_joints");
  positive(actions_per_joint, "actions_per_joint");
  positive(image_size, "image_size");
  positive(conv1_channels, "conv1_channels");
  positive(conv1_kernel, "conv1_kernel");
  positive(conv1_stride, "conv1_stride");
  positive(conv2_channels, "conv2_channels");
  positive(conv2_kernel, "conv2_kernel");
  positive(conv2_stride, "conv2_stride");
  positive(fc_width, "fc_width");
  positive(lstm_hidden, "lstm_hidden");
  if (conv1_kernel > image_size) {
    throw std::invalid_argument("agent.conv1_kernel exceeds agent.image_size");
  }
  if (conv2_kernel > conv1_extent()) {
    throw std::invalid_argument("agent.conv2_kernel exceeds the first convolution's output extent");
  }
}

template <typename T>
RecurrentState<T> RecurrentState<T>::zeros(std::size_t width) {
  return {Tensor<T>::zeros({width}), Tensor<T>::zeros({width})};
}

template <typename T>
PolicyNetwork<T>::PolicyNetwork(const AgentConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  auto add = [&](std::string name, Shape shape, std::vector<T> values) {
    params_.push_back({std::move(name), Tensor<T>::parameter(std::move(shape), std::move(values))});
    return params_.back().tensor;
  };
  auto ortho = [&](std::size_t rows, std::size_t cols, double gain) {
    return autodiff::orthogonal_init<T>(rows, cols, gain, rng);
  };
  auto zeros = [](std::size_t n) { return std::vector<T>(n, T{0}); };

  const auto& c = config_;
  const std::size_t k1 = c.conv1_kernel, k2 = c.conv2_kernel;
  conv1_w_ = add("conv1.weight", {k1, k1, 3, c.conv1_channels},
                 ortho(k1 * k1 * 3, c.conv1_channels, c.conv_gain));
  conv1_b_ = add("conv1.bias", {c.conv1_channels}, zeros(c.conv1_channels));
  conv2_w_ = add("conv2.weight", {k2, k2, c.conv1_channels, c.conv2_channels},
                 ortho(k2 * k2 * c.conv1_channels, c.conv2_channels, c.conv_gain));
  conv2_b_ = add("conv2.bias", {c.conv2_channels}, zeros(c.conv2_channels));
  fc_w_ = add("fc.weight", {c.flatten_width(), c.fc_width},
              ortho(c.flatten_width(), c.fc_width, c.conv_gain));
  fc_b_ = add("fc.bias", {c.fc_width}, zeros(c.fc_width));
  const std::size_t h = c.lstm_hidden;
  lstm_.w_input = add("lstm.w_input", {c.lstm_input_width(), 4 * h},
                      ortho(c.lstm_input_width(), 4 * h, c.lstm_gain));
  lstm_.w_hidden = add("lstm.w_hidden", {h, 4 * h}, ortho(h, 4 * h, c.lstm_gain));
  lstm_.bias = add("lstm.bias", {4 * h}, zeros(4 * h));
  for (std::size_t j = 0; j < c.n_joints; ++j) {
    const std::string prefix = "actor" + std::to_string(j);
    actor_w_.push_back(add(prefix + ".weight", {h, c.actions_per_joint},
                           ortho(h, c.actions_per_joint, c.actor_gain)));
    actor_b_.push_back(add(prefix + ".bias", {c.actions_per_joint}, zeros(c.actions_per_joint)));
  }
  critic_w_ = add("critic.weight", {h, 1}, ortho(h, 1, c.critic_gain));
  critic_b_ = add("critic.bias", {1}, zeros(1));
}

template <typename T>
ForwardResult<T> PolicyNetwork<T>::forward(std::span<const float> pixels,
                                           std::span<const float> kge,
                                           const RecurrentState<T>& state) const {
  const auto& c = config_;
  const std::size_t expected = c.image_size * c.image_size * 3;
  if (pixels.size() != expected) {
    throw autodiff::ShapeError("policy input has " + std::to_string(pixels.size()) +
                               " values, expected " + std::to_string(c.image_size) + "x" +
                               std::to_string(c.image_size) + "x3");
  }
  if (kge.size() != c.kge_dim) {
    throw autodiff::ShapeError("scene embedding has " + std::to_string(kge.size()) +
                               " entries, agent expects " + std::to_string(c.kge_dim));
  }
  if (state.h.size() != c.lstm_hidden || state.c.size() != c.lstm_hidden) {
    throw autodiff::ShapeError("recurrent state width does not match lstm_hidden");
  }

  using namespace autodiff;
  auto image = Tensor<T>::constant({c.image_size, c.image_size, 3},
                                   std::vector<T>(pixels.begin(), pixels.end()));
  ForwardResult<T> result;
  auto pre1 = conv2d(image, conv1_w_, conv1_b_, c.conv1_stride);
  auto pre2 = conv2d(relu(pre1), conv2_w_, conv2_b_, c.conv2_stride);
  auto pre3 = fully_connected(relu(pre2), fc_w_, fc_b_);
  Tensor<T> features = relu(pre3);
  if (c.kge_dim > 0) {
    features = concat(features, Tensor<T>::constant({c.kge_dim}, std::vector<T>(kge.begin(), kge.end())));
  }
  auto next = lstm_cell(features, state.h, state.c, lstm_);
  result.pre_activations = {pre1, pre2, pre3};

  auto& out = result.output;
  for (std::size_t j = 0; j < c.n_joints; ++j) {
    auto logits = fully_connected(next.h, actor_w_[j], actor_b_[j]);
    auto z = logits.values();
    double peak = z[0];
    for (T v : z) peak = std::max<double>(peak, v);
    std::vector<double> p(z.size());
    double total = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) total += p[a] = std::exp(static_cast<double>(z[a]) - peak);
    for (double& v : p) v /= total;
    out.logits.push_back(std::move(logits));
    out.probabilities.push_back(std::move(p));
  }
  out.value = fully_connected(next.h, critic_w_, critic_b_);
  result.state = {next.h, next.c};
  return result;
}

template <typename T>
std::size_t PolicyNetwork<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

template <typename T>
std::vector<std::span<T>> PolicyNetwork<T>::value_blocks() {
  std::vector<std::span<T>> out;
  for (auto& p : params_) out.push_back(p.tensor.mutable_values());
  return out;
}

template <typename T>
std::vector<std::span<T>> PolicyNetwork<T>::grad_blocks() {
  std::vector<std::span<T>> out;
  for (auto& p : params_) out.push_back(p.tensor.mutable_grad());
  return out;
}

template <typename T>
std::vector<std::size_t> PolicyNetwork<T>::block_sizes() const {
  std::vector<std::size_t> out;
  for (const auto& p : params_) out.push_back(p.tensor.size());
  return out;
}

template <typename T>
void PolicyNetwork<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
template <typename U>
void PolicyNetwork<T>::assign(std::span<const std::vector<U>> blocks) {
  if (blocks.size() != params_.size()) {
    throw std::invalid_argument("assign: expected " + std::to_string(params_.size()) + " blocks");
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto dst = params_[b].tensor.mutable_values();
    if (dst.size() != blocks[b].size()) {
      throw std::invalid_argument("assign: size mismatch for " + params_[b].name);
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(blocks[b][i]);
  }
}

template struct RecurrentState<float>;
template struct RecurrentState<double>;
template class PolicyNetwork<float>;
template class PolicyNetwork<double>;
template void PolicyNetwork<float>::assign(std::span<const std::vector<float>>);
template void PolicyNetwork<float>::assign(std::span<const std::vector<double>>);
template void PolicyNetwork<double>::assign(std::span<const std::vector<float>>);
template void PolicyNetwork<double>::assign(std::span<const std::vector<double>>);

}  // namespace kgrl::policy
