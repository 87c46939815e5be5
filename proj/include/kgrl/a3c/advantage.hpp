#pragma once

#include <span>
#include <vector>

namespace kgrl::a3c {

// delta = r + gamma * v_next * (1 - terminal) - v
double td_error(double reward, double value, double next_value, double gamma, bool terminal);

// Backward recursion A_t = gamma * lambda * A_{t+1} + delta_t with A_n = 0.
// `bootstrap` is V(s_n) for a cut-off rollout and 0 after a terminal step.
std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                double bootstrap, double gamma, double lambda);

// R_t = sum_k gamma^k r_{t+k} + gamma^(n-t) * bootstrap
std::vector<double> n_step_returns(std::span<const double> rewards, double bootstrap, double gamma);

}  // namespace kgrl::a3c
