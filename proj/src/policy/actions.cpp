#include "kgrl/policy/actions.hpp"

#include <cmath>
#include <stdexcept>

namespace kgrl::policy {

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double categorical_entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

ActionSample sample_actions(const std::vector<std::vector<double>>& probabilities,
                            std::mt19937_64& rng) {
  ActionSample out;
  for (const auto& head : probabilities) {
    const double u = uniform_unit(rng);
    double cumulative = 0.0;
    int chosen = -1;
    for (std::size_t a = 0; a < head.size(); ++a) {
      cumulative += head[a];
      if (u < cumulative && head[a] > 0.0) {
        chosen = static_cast<int>(a);
        break;
      }
    }
    if (chosen < 0) {  // rounding left u above the cumulative total
      for (std::size_t a = head.size(); a-- > 0;) {
        if (head[a] > 0.0) {
          chosen = static_cast<int>(a);
          break;
        }
      }
    }
    out.indices.push_back(chosen);
    out.log_prob += std::log(head[static_cast<std::size_t>(chosen)]);
    out.entropy += categorical_entropy(head);
  }
  return out;
}

std::vector<int> greedy_actions(const std::vector<std::vector<double>>& probabilities) {
  std::vector<int> out;
  out.reserve(probabilities.size());
  for (const auto& head : probabilities) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < head.size(); ++a) {
      if (head[a] > head[best]) best = a;
    }
    out.push_back(static_cast<int>(best));
  }
  return out;
}

template <typename T>
ActionTerms<T> action_terms(const PolicyOutput<T>& output, std::span<const int> actions) {
  using namespace autodiff;
  if (actions.size() != output.logits.size()) {
    throw std::invalid_argument("action_terms: one action per head required");
  }
  std::vector<Tensor<T>> log_probs, entropies;
  for (std::size_t j = 0; j < actions.size(); ++j) {
    const auto& logits = output.logits[j];
    if (actions[j] < 0 || static_cast<std::size_t>(actions[j]) >= logits.size()) {
      throw std::out_of_range("action index out of range for head " + std::to_string(j));
    }
    auto lp = log_softmax(logits);
    log_probs.push_back(select(lp, static_cast<std::size_t>(actions[j])));
    entropies.push_back(sum(mul(softmax(logits), lp)));
  }
  std::vector<T> plus(actions.size(), T{1}), minus(actions.size(), T{-1});
  return {weighted_sum<T>(log_probs, plus), weighted_sum<T>(entropies, minus)};
}

template ActionTerms<float> action_terms(const PolicyOutput<float>&, std::span<const int>);
template ActionTerms<double> action_terms(const PolicyOutput<double>&, std::span<const int>);

}  // namespace kgrl::policy
