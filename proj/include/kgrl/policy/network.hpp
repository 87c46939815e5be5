#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kgrl/autodiff/ops.hpp"
#include "kgrl/autodiff/tensor.hpp"

namespace kgrl::policy {

using autodiff::Tensor;

struct AgentConfig {
  std::size_t n_joints = 2;
  std::size_t actions_per_joint = 7;
  std::size_t kge_dim = 0;
  std::size_t image_size = 64;

  std::size_t conv1_channels = 32;
  std::size_t conv1_kernel = 3;
  std::size_t conv1_stride = 4;
  std::size_t conv2_channels = 32;
  std::size_t conv2_kernel = 5;
  std::size_t conv2_stride = 2;
  std::size_t fc_width = 128;
  std::size_t lstm_hidden = 128;

  double conv_gain = 1.4142135623730951;
  double lstm_gain = 1.0;
  double actor_gain = 0.01;
  double critic_gain = 1.0;

  std::size_t conv1_extent() const;
  std::size_t conv2_extent() const;
  std::size_t flatten_width() const;
  std::size_t lstm_input_width() const { return fc_width + kge_dim; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const AgentConfig&) const = default;
};

template <typename T>
struct RecurrentState {
  Tensor<T> h;
  Tensor<T> c;

  static RecurrentState zeros(std::size_t width);
  RecurrentState detached() const { return {h.detach(), c.detach()}; }
};

template <typename T>
struct PolicyOutput {
  std::vector<Tensor<T>> logits;                    // one per joint head
  std::vector<std::vector<double>> probabilities;   // softmax(logits), detached
  Tensor<T> value;                                  // scalar V(s)
};

template <typename T>
struct ForwardResult {
  PolicyOutput<T> output;
  RecurrentState<T> state;
  // Inputs of the three ReLUs (conv1, conv2, fc), for kink-aware gradient checks.
  std::vector<Tensor<T>> pre_activations;
};

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
};

// conv -> ReLU -> conv -> ReLU -> flatten -> FC -> ReLU -> concat(kge) -> LSTM
// -> {n_joints softmax actor heads, scalar critic}.
template <typename T>
class PolicyNetwork {
 public:
  PolicyNetwork(const AgentConfig& config, std::uint64_t seed);

  PolicyNetwork(const PolicyNetwork&) = delete;
  PolicyNetwork& operator=(const PolicyNetwork&) = delete;
  PolicyNetwork(PolicyNetwork&&) noexcept = default;
  PolicyNetwork& operator=(PolicyNetwork&&) noexcept = default;

  const AgentConfig& config() const { return config_; }

  // `pixels` is image_size x image_size x 3 in [0, 1], row-major HWC.
  // `kge` must be empty when kge_dim is 0 and kge_dim long otherwise.
  ForwardResult<T> forward(std::span<const float> pixels, std::span<const float> kge,
                           const RecurrentState<T>& state) const;

  RecurrentState<T> initial_state() const { return RecurrentState<T>::zeros(config_.lstm_hidden); }

  const std::vector<NamedParameter<T>>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  std::vector<std::span<T>> value_blocks();
  std::vector<std::span<T>> grad_blocks();
  std::vector<std::size_t> block_sizes() const;
  void zero_grad();

  // Overwrites parameter values block by block; sizes must match.
  template <typename U>
  void assign(std::span<const std::vector<U>> blocks);

 private:
  AgentConfig config_;
  std::vector<NamedParameter<T>> params_;
  // Handles sharing nodes with params_.
  Tensor<T> conv1_w_, conv1_b_, conv2_w_, conv2_b_, fc_w_, fc_b_;
  autodiff::LstmWeights<T> lstm_;
  std::vector<Tensor<T>> actor_w_, actor_b_;
  Tensor<T> critic_w_, critic_b_;
};

}  // namespace kgrl::policy
