#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgrl/kge/graph.hpp"
#include "kgrl/kge/word_vectors.hpp"

namespace kgrl::kge {

enum class KgeMode { none, partial, full };

KgeMode parse_kge_mode(std::string_view text);
std::string_view to_string(KgeMode mode);

struct SceneEmbedding {
  std::vector<float> values;
  std::string source_sentence;
  std::vector<std::string> unknown_tokens;
};

// Whitespace-tokenized word vectors concatenated in order, then zero-padded
// or truncated to target_dim. Unknown tokens contribute zero vectors.
SceneEmbedding embed_scene(const std::string& sentence, const WordVectorTable& table,
                           std::size_t target_dim);

// 150 for partial or full without color randomization, 300 for full with it,
// 0 for none.
std::size_t default_embedding_dim(KgeMode mode, bool dr_enabled);

// Drops every color triple from a graph (the partial-knowledge view).
KnowledgeGraph without_color_triples(const KnowledgeGraph& graph);

// Experiment-level embedding from an explicit perceived entity set.
// target_dim 0 selects default_embedding_dim.
std::optional<SceneEmbedding> scene_embedding(const KnowledgeGraph& graph,
                                              const std::vector<std::string>& perceived,
                                              KgeMode mode, bool dr_enabled,
                                              const WordVectorTable& table,
                                              std::size_t target_dim = 0);

// Static experiment embedding with the object types as the perceived set.
std::optional<SceneEmbedding> scene_embedding_for_mode(const KnowledgeGraph& graph, KgeMode mode,
                                                       bool dr_enabled,
                                                       const WordVectorTable& table,
                                                       std::size_t target_dim = 0);

// Per-episode variant: only the current object is perceived, and in full
// mode only its realized color is kept.
std::optional<SceneEmbedding> episode_embedding(const KnowledgeGraph& graph,
                                                const std::string& object_type,
                                                const std::string& realized_color, KgeMode mode,
                                                bool dr_enabled, const WordVectorTable& table,
                                                std::size_t target_dim = 0);

// Every token that can appear in a linearization of `graph`.
std::vector<std::string> graph_vocabulary(const KnowledgeGraph& graph);

}  // namespace kgrl::kge
