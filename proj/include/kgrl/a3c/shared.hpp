#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "kgrl/autodiff/optim.hpp"
#include "kgrl/policy/network.hpp"

namespace kgrl::a3c {

// Global parameters, shared RMSprop statistics and the global step counter.
// By default gradient application and reads are serialized by one mutex; in
// lock-free mode every element is updated through relaxed atomic references.
class SharedParameters {
 public:
  SharedParameters(const policy::PolicyNetwork<float>& initial, autodiff::RmsPropOptions options,
                   bool lock_free = false);

  SharedParameters(const SharedParameters&) = delete;
  SharedParameters& operator=(const SharedParameters&) = delete;

  const policy::AgentConfig& agent() const { return agent_; }
  bool lock_free() const { return lock_free_; }
  const std::vector<std::size_t>& block_sizes() const { return sizes_; }

  void copy_to(policy::PolicyNetwork<float>& network) const;
  std::vector<std::vector<float>> snapshot() const;

  // One RMSprop step with `grads` (one span per parameter block).
  void apply(std::span<const std::span<const float>> grads);
  std::vector<std::vector<float>> second_moments() const;

  std::int64_t steps() const { return steps_.load(std::memory_order_acquire); }
  // Adds n (>= 0) and returns the new total.
  std::int64_t advance(std::int64_t n);

 private:
  policy::AgentConfig agent_;
  autodiff::RmsPropOptions options_;
  bool lock_free_;
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<float>> values_;
  std::vector<std::vector<float>> second_moments_;
  mutable std::mutex mutex_;
  std::atomic<std::int64_t> steps_{0};
};

}  // namespace kgrl::a3c
