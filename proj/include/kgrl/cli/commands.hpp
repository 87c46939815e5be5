#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "kgrl/a3c/trainer.hpp"
#include "kgrl/cli/config.hpp"
#include "kgrl/evalstats/compare.hpp"
#include "kgrl/evalstats/evaluation.hpp"

namespace kgrl::cli {

enum class PolicyKind { network, ik, random };

// Entry point behind the kgrl executable. Returns the process exit code;
// failures print one "error: ..." line to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Run directory: config.ini, checkpoints/, eval_log.csv, best.txt.
a3c::TrainResult cmd_train(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                           std::ostream& log);

// The checkpoint named by run_dir/best.txt.
std::filesystem::path best_checkpoint(const std::filesystem::path& run_dir);

// Writes report.csv, episodes.csv and trace.csv into out_dir (if non-empty).
evalstats::EvalReport cmd_eval(const ExperimentConfig& config, PolicyKind policy,
                               const std::filesystem::path& checkpoint,
                               const std::filesystem::path& out_dir, std::ostream& out);

// Each run directory is one agent, evaluated with its own config.ini and
// best checkpoint over eval.compare_runs seeded batches of
// eval.compare_episodes episodes. Writes compare.csv and compare.txt.
evalstats::Comparison cmd_compare(const ExperimentConfig& config,
                                  const std::vector<std::filesystem::path>& run_dirs,
                                  const std::filesystem::path& out_dir, std::ostream& out);

struct DemoResult {
  std::size_t frames = 0;
  reacharena::EpisodeResult episode;
};

// One episode: out_dir/frames/frame_NNN.ppm per step, strip.ppm and trace.csv.
DemoResult cmd_demo(const ExperimentConfig& config, PolicyKind policy,
                    const std::filesystem::path& checkpoint, std::uint64_t episode_seed,
                    const std::filesystem::path& out_dir, std::ostream& out);

// Prints the selected subgraph, its sentence and the embedding summary.
void cmd_kg_inspect(const ExperimentConfig& config, std::ostream& out);

}  // namespace kgrl::cli
