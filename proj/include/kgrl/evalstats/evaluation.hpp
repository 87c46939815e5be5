#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "kgrl/evalstats/stats.hpp"
#include "kgrl/reacharena/controllers.hpp"

namespace kgrl::evalstats {

struct EvalOptions {
  std::size_t episodes = 1000;
  double dist_threshold = 0.10;  // meters
  double deg_threshold = 17.0;   // degrees
  std::uint64_t seed = 1;
  std::filesystem::path episodes_csv;  // per-episode rows, skipped when empty
  std::filesystem::path trace_csv;     // per-step rows, skipped when empty
};

struct FailureStats {
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::size_t n_episodes = 0;
  MeanStd episode_return;
  MeanStd episode_length;
  // Final rel_dist over episodes that end farther than the distance
  // threshold; absent when there are none.
  std::optional<FailureStats> failure_distance;
  double accuracy = 0.0;      // percent, final rel_dist <= dist_threshold
  double success_rate = 0.0;  // percent, distance and orientation thresholds both met
  std::vector<std::vector<double>> joint_samples;  // [joint][every step of every episode]
  std::vector<reacharena::EpisodeResult> episodes;
};

// Reset seeds for the evaluation episodes; disjoint in construction from the
// training and interim streams.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t seed, std::size_t n);

// Plays options.episodes episodes with the evaluation thresholds replacing
// the environment's training thresholds.
EvalReport evaluate(reacharena::Controller& controller, const reacharena::EnvConfig& env,
                    const EvalOptions& options);

// Two-column key,value CSV and an aligned text block.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
void print_report(const EvalReport& report, std::ostream& out);

}  // namespace kgrl::evalstats
