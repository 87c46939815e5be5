#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "kgrl/reacharena/arena.hpp"
#include "kgrl/reacharena/trace.hpp"

namespace kgrl::reacharena {

// Anything that picks one action index per joint each step.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void begin_episode(const ReachArena& env, std::uint64_t episode_seed) {
    (void)env;
    (void)episode_seed;
  }
  virtual std::vector<int> act(const ReachArena& env, const Image& observation) = 0;
};

// Closed-form inverse kinematics for 2- and 3-link arms. With three links
// the last joint sets the end-effector heading to `heading_deg`. Returns the
// in-range solution closest to `current`, or nothing if unreachable.
std::optional<std::vector<double>> planar_ik(const EnvConfig& config, Vec2 target,
                                             double heading_deg,
                                             const std::vector<double>& current);

// Scripted oracle: reads the true grasp point from the environment state and
// steps each joint toward the IK solution with the closest action.
class IkController : public Controller {
 public:
  std::vector<int> act(const ReachArena& env, const Image& observation) override;
};

// Uniformly random actions from a per-episode seed.
class RandomController : public Controller {
 public:
  void begin_episode(const ReachArena& env, std::uint64_t episode_seed) override;
  std::vector<int> act(const ReachArena& env, const Image& observation) override;

 private:
  std::mt19937_64 rng_{0};
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  TargetKind target_kind = TargetKind::mug;
  std::string realized_color;
  int steps = 0;
  double total_return = 0.0;
  StepInfo final_info;  // relative pose after the last step
  bool success = false;
  std::vector<TraceRow> trace;  // filled only when requested
};

// Resets `env` with `seed` and plays one episode to termination.
EpisodeResult run_episode(ReachArena& env, Controller& controller, std::uint64_t seed,
                          bool record_trace = false, std::size_t episode_index = 0);

}  // namespace kgrl::reacharena
