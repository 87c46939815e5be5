#include "kgrl/autodiff/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "kgrl/autodiff/tensor.hpp"

namespace kgrl::autodiff {

template <typename T>
void rmsprop_step(std::span<T> param, std::span<const T> grad, std::span<T> second_moment,
                  const RmsPropOptions& options) {
  if (param.size() != grad.size() || param.size() != second_moment.size()) {
    throw ShapeError("rmsprop_step: parameter, gradient and accumulator sizes differ");
  }
  const T decay = static_cast<T>(options.decay);
  const T keep = static_cast<T>(1.0 - options.decay);
  const T lr = static_cast<T>(options.learning_rate);
  const T eps = static_cast<T>(options.epsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    second_moment[i] = decay * second_moment[i] + keep * g * g;
    param[i] -= lr * g / std::sqrt(second_moment[i] + eps);
  }
}

template <typename T>
RmsProp<T>::RmsProp(std::vector<std::size_t> block_sizes, RmsPropOptions options)
    : options_(options) {
  if (!(options.decay > 0.0 && options.decay < 1.0)) {
    throw std::invalid_argument("rmsprop decay must lie in (0, 1)");
  }
  if (!(options.learning_rate > 0.0) || !(options.epsilon > 0.0)) {
    throw std::invalid_argument("rmsprop learning rate and epsilon must be positive");
  }
  second_moments_.reserve(block_sizes.size());
  for (std::size_t n : block_sizes) second_moments_.emplace_back(n, T{0});
}

template <typename T>
void RmsProp<T>::step(std::span<const std::span<T>> params,
                      std::span<const std::span<const T>> grads) {
  if (params.size() != second_moments_.size() || grads.size() != second_moments_.size()) {
    throw ShapeError("RmsProp::step: block count mismatch");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    rmsprop_step<T>(params[b], grads[b], second_moments_[b], options_);
  }
}

template <typename T>
double clip_global_norm(std::span<const std::span<T>> grads, double max_norm) {
  double sq = 0.0;
  for (auto block : grads) {
    for (T g : block) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto block : grads) {
      for (T& g : block) g *= factor;
    }
  }
  return norm;
}

template void rmsprop_step(std::span<float>, std::span<const float>, std::span<float>,
                           const RmsPropOptions&);
template void rmsprop_step(std::span<double>, std::span<const double>, std::span<double>,
                           const RmsPropOptions&);
template class RmsProp<float>;
template class RmsProp<double>;
template double clip_global_norm(std::span<const std::span<float>>, double);
template double clip_global_norm(std::span<const std::span<double>>, double);

}  // namespace kgrl::autodiff
