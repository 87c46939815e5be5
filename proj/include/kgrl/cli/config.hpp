#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "kgrl/a3c/kge_input.hpp"
#include "kgrl/a3c/trainer.hpp"
#include "kgrl/kge/scene_embedding.hpp"
#include "kgrl/policy/network.hpp"
#include "kgrl/reacharena/arena.hpp"

namespace kgrl::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KgeSettings {
  kge::KgeMode mode = kge::KgeMode::none;
  std::filesystem::path graph;         // empty: built-in scene graph
  std::filesystem::path word_vectors;  // empty: deterministic fallback table
  std::uint64_t fallback_seed = 0;
  std::size_t target_dim = 0;          // 0: 150, or 300 for full with color randomization
  bool per_episode = false;
};

struct EvalSettings {
  std::size_t episodes = 1000;
  double dist_threshold = 0.10;
  double deg_threshold = 17.0;
  std::uint64_t seed = 1;
  a3c::ActionMode action_mode = a3c::ActionMode::sample;
  std::size_t compare_runs = 30;
  std::size_t compare_episodes = 100;
};

struct ExperimentConfig {
  reacharena::EnvConfig env;
  policy::AgentConfig agent;  // n_joints, image_size and kge_dim follow env and kge
  a3c::TrainConfig train;
  KgeSettings kge;
  EvalSettings eval;
  std::filesystem::path output_dir = "runs/default";
  std::uint64_t seed = 0;

  std::size_t kge_dim() const;
};

// Sectioned key = value file ([env], [agent], [train], [kge], [eval], [run]).
// kge.mode is required; every other key has a default. Relative paths are
// resolved against the file's directory. Unknown keys, bad values and
// cross-field violations raise ConfigError naming the key.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir = {});

// Effective configuration in the same format; parse_config_text reads it back.
std::string dump_config(const ExperimentConfig& config);

kge::KnowledgeGraph experiment_graph(const ExperimentConfig& config);
kge::WordVectorTable experiment_word_vectors(const ExperimentConfig& config,
                                             const kge::KnowledgeGraph& graph);
a3c::KgeInput build_kge_input(const ExperimentConfig& config);

}  // namespace kgrl::cli
