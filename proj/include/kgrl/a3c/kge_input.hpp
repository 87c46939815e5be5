#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgrl/kge/scene_embedding.hpp"
#include "kgrl/reacharena/arena.hpp"

namespace kgrl::a3c {

// The semantic vector fed to the agent each step: nothing, one fixed
// experiment-level embedding, or a per-episode embedding keyed on the
// current object and its realized color.
class KgeInput {
 public:
  KgeInput() = default;

  static KgeInput fixed(std::vector<float> values);
  // Precomputes an embedding for every (kind, color) the environment can show.
  static KgeInput per_episode(const kge::KnowledgeGraph& graph, const kge::WordVectorTable& table,
                              kge::KgeMode mode, bool dr_enabled, std::size_t dim,
                              const reacharena::EnvConfig& env);

  std::size_t dim() const { return dim_; }
  bool dynamic() const { return !per_episode_.empty(); }

  std::span<const float> for_episode(const reacharena::EnvState& state,
                                     const reacharena::EnvConfig& env) const;

 private:
  std::size_t dim_ = 0;
  std::vector<float> fixed_;
  std::map<std::pair<std::string, std::string>, std::vector<float>> per_episode_;
};

}  // namespace kgrl::a3c
