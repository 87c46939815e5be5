#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kgrl::autodiff {

struct RmsPropOptions {
  double learning_rate = 1e-4;
  double decay = 0.99;
  double epsilon = 1e-8;
};

// v <- decay * v + (1 - decay) * g^2
// param <- param - lr * g / sqrt(v + epsilon)
template <typename T>
void rmsprop_step(std::span<T> param, std::span<const T> grad, std::span<T> second_moment,
                  const RmsPropOptions& options);

// Second-moment accumulators for a fixed list of parameter blocks.
template <typename T>
class RmsProp {
 public:
  RmsProp(std::vector<std::size_t> block_sizes, RmsPropOptions options);

  const RmsPropOptions& options() const { return options_; }
  std::size_t block_count() const { return second_moments_.size(); }
  std::span<const T> second_moment(std::size_t block) const { return second_moments_[block]; }

  void step(std::span<const std::span<T>> params, std::span<const std::span<const T>> grads);

 private:
  RmsPropOptions options_;
  std::vector<std::vector<T>> second_moments_;
};

// Rescales all blocks in place so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double clip_global_norm(std::span<const std::span<T>> grads, double max_norm);

}  // namespace kgrl::autodiff
