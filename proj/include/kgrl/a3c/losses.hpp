#pragma once

#include <span>

#include "kgrl/autodiff/tensor.hpp"

namespace kgrl::a3c {

using autodiff::Tensor;

// -sum_t (log_prob_t * A_t - beta * H_t). log_prob_t and H_t are already
// summed over the joint heads. Advantages enter as constants: only their
// values are read, so no gradient reaches them.
template <typename T>
Tensor<T> policy_loss(std::span<const Tensor<T>> log_probs, const Tensor<T>& advantages,
                      std::span<const Tensor<T>> entropies, double beta);

template <typename T>
Tensor<T> policy_loss(std::span<const Tensor<T>> log_probs, std::span<const double> advantages,
                      std::span<const Tensor<T>> entropies, double beta);

// 1/2 * sum_t (R_t - V_t)^2
template <typename T>
Tensor<T> value_loss(std::span<const double> returns, std::span<const Tensor<T>> values);

}  // namespace kgrl::a3c
