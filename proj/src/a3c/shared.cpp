#include "kgrl/a3c/shared.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kgrl::a3c {

SharedParameters::SharedParameters(const policy::PolicyNetwork<float>& initial,
                                   autodiff::RmsPropOptions options, bool lock_free)
    : agent_(initial.config()), options_(options), lock_free_(lock_free) {
  // Validates the options.
  autodiff::RmsProp<float> check(initial.block_sizes(), options);
  (void)check;
  for (const auto& p : initial.parameters()) {
    sizes_.push_back(p.tensor.size());
    values_.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
    second_moments_.emplace_back(p.tensor.size(), 0.0f);
  }
}

void SharedParameters::copy_to(policy::PolicyNetwork<float>& network) const {
  if (network.block_sizes() != sizes_) {
    throw std::invalid_argument("copy_to: network layout differs from the shared parameters");
  }
  if (lock_free_) {
    network.assign<float>(snapshot());
    return;
  }
  std::lock_guard lock(mutex_);
  network.assign<float>(values_);
}

std::vector<std::vector<float>> SharedParameters::snapshot() const {
  if (!lock_free_) {
    std::lock_guard lock(mutex_);
    return values_;
  }
  std::vector<std::vector<float>> out(values_.size());
  for (std::size_t b = 0; b < values_.size(); ++b) {
    out[b].resize(values_[b].size());
    auto& src = const_cast<std::vector<float>&>(values_[b]);
    for (std::size_t i = 0; i < src.size(); ++i) {
      out[b][i] = std::atomic_ref<float>(src[i]).load(std::memory_order_relaxed);
    }
  }
  return out;
}

void SharedParameters::apply(std::span<const std::span<const float>> grads) {
  if (grads.size() != sizes_.size()) {
    throw std::invalid_argument("apply: expected " + std::to_string(sizes_.size()) +
                                " gradient blocks, got " + std::to_string(grads.size()));
  }
  for (std::size_t b = 0; b < grads.size(); ++b) {
    if (grads[b].size() != sizes_[b]) {
      throw std::invalid_argument("apply: gradient block " + std::to_string(b) + " has size " +
                                  std::to_string(grads[b].size()) + ", expected " +
                                  std::to_string(sizes_[b]));
    }
  }
  if (!lock_free_) {
    std::lock_guard lock(mutex_);
    for (std::size_t b = 0; b < grads.size(); ++b) {
      autodiff::rmsprop_step<float>(values_[b], grads[b], second_moments_[b], options_);
    }
    return;
  }
  const double rho = options_.decay;
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  for (std::size_t b = 0; b < grads.size(); ++b) {
    for (std::size_t i = 0; i < sizes_[b]; ++i) {
      std::atomic_ref<float> v(second_moments_[b][i]);
      std::atomic_ref<float> p(values_[b][i]);
      const double g = grads[b][i];
      const double vn = rho * v.load(std::memory_order_relaxed) + (1.0 - rho) * g * g;
      v.store(static_cast<float>(vn), std::memory_order_relaxed);
      p.store(static_cast<float>(p.load(std::memory_order_relaxed) - lr * g / std::sqrt(vn + eps)),
              std::memory_order_relaxed);
    }
  }
}

std::vector<std::vector<float>> SharedParameters::second_moments() const {
  std::lock_guard lock(mutex_);
  return second_moments_;
}

std::int64_t SharedParameters::advance(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("advance: negative step count");
  return steps_.fetch_add(n, std::memory_order_acq_rel) + n;
}

}  // namespace kgrl::a3c
