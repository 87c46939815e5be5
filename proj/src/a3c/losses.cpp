#include "kgrl/a3c/losses.hpp"

#include <stdexcept>
#include <vector>

#include "kgrl/autodiff/ops.hpp"

namespace kgrl::a3c {

template <typename T>
Tensor<T> policy_loss(std::span<const Tensor<T>> log_probs, std::span<const double> advantages,
                      std::span<const Tensor<T>> entropies, double beta) {
  if (log_probs.size() != advantages.size() || log_probs.size() != entropies.size()) {
    throw std::invalid_argument("policy_loss: log_probs, advantages and entropies differ in length");
  }
  std::vector<Tensor<T>> terms;
  std::vector<T> weights;
  terms.reserve(2 * log_probs.size());
  weights.reserve(2 * log_probs.size());
  for (std::size_t t = 0; t < log_probs.size(); ++t) {
    terms.push_back(log_probs[t]);
    weights.push_back(static_cast<T>(-advantages[t]));
    terms.push_back(entropies[t]);
    weights.push_back(static_cast<T>(-beta));
  }
  return autodiff::weighted_sum<T>(terms, weights);
}

template <typename T>
Tensor<T> policy_loss(std::span<const Tensor<T>> log_probs, const Tensor<T>& advantages,
                      std::span<const Tensor<T>> entropies, double beta) {
  std::vector<double> a(advantages.values().begin(), advantages.values().end());
  return policy_loss<T>(log_probs, std::span<const double>(a), entropies, beta);
}

template <typename T>
Tensor<T> value_loss(std::span<const double> returns, std::span<const Tensor<T>> values) {
  if (returns.size() != values.size()) {
    throw std::invalid_argument("value_loss: returns and values differ in length");
  }
  std::vector<T> targets(returns.begin(), returns.end());
  return autodiff::half_squared_error<T>(values, targets);
}

template Tensor<float> policy_loss(std::span<const Tensor<float>>, std::span<const double>,
                                   std::span<const Tensor<float>>, double);
template Tensor<double> policy_loss(std::span<const Tensor<double>>, std::span<const double>,
                                    std::span<const Tensor<double>>, double);
template Tensor<float> policy_loss(std::span<const Tensor<float>>, const Tensor<float>&,
                                   std::span<const Tensor<float>>, double);
template Tensor<double> policy_loss(std::span<const Tensor<double>>, const Tensor<double>&,
                                    std::span<const Tensor<double>>, double);
template Tensor<float> value_loss(std::span<const double>, std::span<const Tensor<float>>);
template Tensor<double> value_loss(std::span<const double>, std::span<const Tensor<double>>);

}  // namespace kgrl::a3c
