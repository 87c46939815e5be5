#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "kgrl/policy/network.hpp"

namespace kgrl::policy {

struct ActionSample {
  std::vector<int> indices;
  double log_prob = 0.0;  // summed over heads
  double entropy = 0.0;   // summed over heads
};

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform_unit(std::mt19937_64& rng);

// One categorical draw per head.
ActionSample sample_actions(const std::vector<std::vector<double>>& probabilities,
                            std::mt19937_64& rng);

// Argmax per head; ties go to the lowest index.
std::vector<int> greedy_actions(const std::vector<std::vector<double>>& probabilities);

double categorical_entropy(std::span<const double> probabilities);

// Differentiable per-step terms for the actor loss: sum over heads of
// log pi(a_j) and of the head entropies.
template <typename T>
struct ActionTerms {
  Tensor<T> log_prob;
  Tensor<T> entropy;
};

template <typename T>
ActionTerms<T> action_terms(const PolicyOutput<T>& output, std::span<const int> actions);

}  // namespace kgrl::policy
