#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgrl/a3c/kge_input.hpp"
#include "kgrl/a3c/network_controller.hpp"
#include "kgrl/a3c/shared.hpp"
#include "kgrl/policy/network.hpp"
#include "kgrl/reacharena/arena.hpp"

namespace kgrl::a3c {

struct TrainConfig {
  double gamma = 0.99;
  double lambda = 1.0;
  double beta = 0.01;
  double learning_rate = 1e-4;
  double rmsprop_decay = 0.99;
  double rmsprop_epsilon = 1e-8;
  std::size_t n_workers = 17;
  std::int64_t total_steps = 500'000;
  std::size_t rollout_length = 20;
  std::int64_t interim_interval = 50'000;
  std::size_t interim_episodes = 40;
  double grad_clip_norm = 40.0;
  bool lock_free = false;
  ActionMode eval_action_mode = ActionMode::sample;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  autodiff::RmsPropOptions rmsprop() const {
    return {learning_rate, rmsprop_decay, rmsprop_epsilon};
  }
};

struct EvalLogEntry {
  std::int64_t step = 0;
  double avg_return = 0.0;
  double success_rate = 0.0;  // fraction in [0, 1]
  std::string checkpoint_path;
};

// Index of the entry with the highest average return; ties go to the
// earliest step.
std::size_t select_best(std::span<const EvalLogEntry> log);

// CSV columns: step, avg_return, success_rate, checkpoint_path.
void write_eval_log(std::span<const EvalLogEntry> log, const std::filesystem::path& path);
std::vector<EvalLogEntry> read_eval_log(const std::filesystem::path& path);

struct InterimResult {
  double avg_return = 0.0;
  double success_rate = 0.0;
  std::size_t episodes = 0;
};

// The frozen initial configurations (reset seeds) used by every interim
// evaluation of a run.
std::vector<std::uint64_t> interim_seeds(std::uint64_t run_seed, std::size_t n);

InterimResult interim_evaluate(const policy::PolicyNetwork<float>& network,
                               const reacharena::EnvConfig& env, const KgeInput& kge,
                               std::span<const std::uint64_t> seeds, ActionMode mode);

// Reset seed for worker `worker_id` of a run.
std::uint64_t worker_seed(std::uint64_t run_seed, std::size_t worker_id);

// One A3C worker: sync, roll out up to rollout_length steps, compute
// advantages and returns, backpropagate, clip, apply to the shared
// parameters and advance the global counter, until the step budget is spent
// or `stop` is set. `on_boundary(k * interim_interval)` is called right after
// the update that crossed each interval boundary.
void worker_loop(std::size_t worker_id, reacharena::ReachArena& env, SharedParameters& shared,
                 const KgeInput& kge, const TrainConfig& config,
                 const std::function<void(std::int64_t)>& on_boundary,
                 const std::atomic<bool>& stop);

struct TrainHooks {
  // Called by the evaluator after each evaluation; returning false stops
  // training early.
  std::function<bool(const EvalLogEntry&)> on_evaluation;
};

struct TrainResult {
  std::vector<EvalLogEntry> eval_log;  // ordered by step
  std::size_t best_index = 0;
  std::int64_t total_steps = 0;
  std::vector<std::vector<float>> final_parameters;
};

// Runs n_workers workers plus one evaluator thread. With a non-empty
// run_dir, writes checkpoints/step_<N>.kgck for every evaluation,
// eval_log.csv and best.txt (the best checkpoint path, relative to run_dir).
// A final evaluation is added when the budget does not end on a boundary.
TrainResult train(const policy::AgentConfig& agent, const reacharena::EnvConfig& env,
                  const KgeInput& kge, const TrainConfig& config,
                  const std::filesystem::path& run_dir = {}, const TrainHooks& hooks = {});

}  // namespace kgrl::a3c
