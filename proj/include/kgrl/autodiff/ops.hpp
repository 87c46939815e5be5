#pragma once

#include <cstddef>
#include <span>

#include "kgrl/autodiff/tensor.hpp"

namespace kgrl::autodiff {

// Valid (unpadded) 2-D convolution over an HxWxCin image with a
// k x k x Cin x Cout kernel. Output is H'xW'xCout with
// H' = (H - k) / stride + 1.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 std::size_t stride);

std::size_t conv_output_extent(std::size_t extent, std::size_t kernel, std::size_t stride);

// output[j] = sum_i input[i] * weight[i][j] + bias[j]; weight is n x m.
// The input may have any shape with n entries (it is read flat).
template <typename T>
Tensor<T> fully_connected(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& logits);

// Gate blocks are laid out [input, forget, cell, output], each hidden wide.
template <typename T>
struct LstmWeights {
  Tensor<T> w_input;   // d_in x 4*d_h
  Tensor<T> w_hidden;  // d_h x 4*d_h
  Tensor<T> bias;      // 4*d_h
};

template <typename T>
struct LstmState {
  Tensor<T> h;
  Tensor<T> c;
};

template <typename T>
LstmState<T> lstm_cell(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& c,
                       const LstmWeights<T>& weights);

template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> slice(const Tensor<T>& input, std::size_t offset, std::size_t length);

template <typename T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& input, T factor);

template <typename T>
Tensor<T> sum(const Tensor<T>& input);

template <typename T>
Tensor<T> select(const Tensor<T>& input, std::size_t index);

// sum_i weights[i] * terms[i] over scalar tensors.
template <typename T>
Tensor<T> weighted_sum(std::span<const Tensor<T>> terms, std::span<const T> weights);

// 1/2 * sum_i (targets[i] - predictions[i])^2 over scalar predictions.
template <typename T>
Tensor<T> half_squared_error(std::span<const Tensor<T>> predictions, std::span<const T> targets);

}  // namespace kgrl::autodiff
