#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "kgrl/a3c/kge_input.hpp"
#include "kgrl/policy/network.hpp"
#include "kgrl/reacharena/controllers.hpp"

namespace kgrl::a3c {

enum class ActionMode { sample, greedy };

// Drives the arena with a policy network. The recurrent state starts at zero
// each episode; sampling uses an RNG reseeded from the episode seed, so a
// fixed network and seed always give the same episode.
class NetworkController : public reacharena::Controller {
 public:
  NetworkController(const policy::PolicyNetwork<float>& network, const KgeInput& kge,
                    ActionMode mode);

  void begin_episode(const reacharena::ReachArena& env, std::uint64_t episode_seed) override;
  std::vector<int> act(const reacharena::ReachArena& env,
                       const reacharena::Image& observation) override;

 private:
  const policy::PolicyNetwork<float>& network_;
  const KgeInput& kge_;
  ActionMode mode_;
  policy::RecurrentState<float> state_;
  std::span<const float> embedding_;
  std::mt19937_64 rng_{0};
};

}  // namespace kgrl::a3c
