#include "kgrl/a3c/network_controller.hpp"

#include "kgrl/policy/actions.hpp"

namespace kgrl::a3c {

NetworkController::NetworkController(const policy::PolicyNetwork<float>& network,
                                     const KgeInput& kge, ActionMode mode)
    : network_(network), kge_(kge), mode_(mode), state_(network.initial_state()) {}

void NetworkController::begin_episode(const reacharena::ReachArena& env,
                                      std::uint64_t episode_seed) {
  state_ = network_.initial_state();
  embedding_ = kge_.for_episode(env.state(), env.config());
  rng_.seed(episode_seed ^ 0x9E3779B97F4A7C15ULL);
}

std::vector<int> NetworkController::act(const reacharena::ReachArena&,
                                        const reacharena::Image& observation) {
  auto result = network_.forward(observation.pixels, embedding_, state_);
  state_ = result.state.detached();
  if (mode_ == ActionMode::greedy) return policy::greedy_actions(result.output.probabilities);
  return policy::sample_actions(result.output.probabilities, rng_).indices;
}

}  // namespace kgrl::a3c
