#include "kgrl/a3c/kge_input.hpp"

#include <stdexcept>

namespace kgrl::a3c {

KgeInput KgeInput::fixed(std::vector<float> values) {
  KgeInput in;
  in.dim_ = values.size();
  in.fixed_ = std::move(values);
  return in;
}

KgeInput KgeInput::per_episode(const kge::KnowledgeGraph& graph, const kge::WordVectorTable& table,
                               kge::KgeMode mode, bool dr_enabled, std::size_t dim,
                               const reacharena::EnvConfig& env) {
  KgeInput in;
  if (mode == kge::KgeMode::none) return in;
  in.dim_ = dim == 0 ? kge::default_embedding_dim(mode, dr_enabled) : dim;
  for (const auto& t : env.targets) {
    const std::string kind(reacharena::to_string(t.kind));
    std::vector<std::string> colors{t.base_color_name};
    if (dr_enabled) colors.push_back(t.dr_alternate_color_name);
    for (const auto& color : colors) {
      auto e = kge::episode_embedding(graph, kind, color, mode, dr_enabled, table, in.dim_);
      in.per_episode_[{kind, color}] = e ? e->values : std::vector<float>(in.dim_, 0.0f);
    }
  }
  return in;
}

std::span<const float> KgeInput::for_episode(const reacharena::EnvState& state,
                                             const reacharena::EnvConfig& env) const {
  if (per_episode_.empty()) return fixed_;
  const std::string kind(reacharena::to_string(env.targets.at(state.target_index).kind));
  auto it = per_episode_.find({kind, state.realized_color_name});
  if (it == per_episode_.end()) {
    throw std::out_of_range("no embedding for " + kind + " in color " + state.realized_color_name);
  }
  return it->second;
}

}  // namespace kgrl::a3c
