#include "kgrl/a3c/advantage.hpp"

#include <stdexcept>
#include <string>

namespace kgrl::a3c {

double td_error(double reward, double value, double next_value, double gamma, bool terminal) {
  return reward + (terminal ? 0.0 : gamma * next_value) - value;
}

std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                double bootstrap, double gamma, double lambda) {
  if (rewards.size() != values.size()) {
    throw std::invalid_argument("compute_gae: " + std::to_string(rewards.size()) + " rewards but " +
                                std::to_string(values.size()) + " values");
  }
  const std::size_t n = rewards.size();
  std::vector<double> advantages(n);
  double next_advantage = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = t + 1 < n ? values[t + 1] : bootstrap;
    const double delta = td_error(rewards[t], values[t], next_value, gamma, false);
    next_advantage = gamma * lambda * next_advantage + delta;
    advantages[t] = next_advantage;
  }
  return advantages;
}

std::vector<double> n_step_returns(std::span<const double> rewards, double bootstrap, double gamma) {
  std::vector<double> returns(rewards.size());
  double running = bootstrap;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    returns[t] = running;
  }
  return returns;
}

}  // namespace kgrl::a3c
