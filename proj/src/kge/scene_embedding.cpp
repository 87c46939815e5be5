#include "kgrl/kge/scene_embedding.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace kgrl::kge {

KgeMode parse_kge_mode(std::string_view text) {
  if (text == "none") return KgeMode::none;
  if (text == "partial") return KgeMode::partial;
  if (text == "full") return KgeMode::full;
  throw std::invalid_argument("unknown kge mode '" + std::string(text) +
                              "' (expected none, partial or full)");
}

std::string_view to_string(KgeMode mode) {
  switch (mode) {
    case KgeMode::none: return "none";
    case KgeMode::partial: return "partial";
    case KgeMode::full: return "full";
  }
  return "none";
}

SceneEmbedding embed_scene(const std::string& sentence, const WordVectorTable& table,
                           std::size_t target_dim) {
  SceneEmbedding out;
  out.source_sentence = sentence;
  out.values.reserve(target_dim);
  std::istringstream tokens(sentence);
  std::string token;
  while (tokens >> token) {
    auto vec = table.lookup(token);
    if (vec.empty()) {
      out.unknown_tokens.push_back(token);
      out.values.insert(out.values.end(), table.dim(), 0.0f);
    } else {
      out.values.insert(out.values.end(), vec.begin(), vec.end());
    }
    if (out.values.size() >= target_dim) break;
  }
  out.values.resize(target_dim, 0.0f);
  return out;
}

std::size_t default_embedding_dim(KgeMode mode, bool dr_enabled) {
  switch (mode) {
    case KgeMode::none: return 0;
    case KgeMode::partial: return 150;
    case KgeMode::full: return dr_enabled ? 300 : 150;
  }
  return 0;
}

KnowledgeGraph without_color_triples(const KnowledgeGraph& graph) {
  KnowledgeGraph out;
  for (const Triple& t : graph.triples()) {
    if (t.relation != kColorRelation) out.add(t);
  }
  return out;
}

std::optional<SceneEmbedding> scene_embedding(const KnowledgeGraph& graph,
                                              const std::vector<std::string>& perceived,
                                              KgeMode mode, bool dr_enabled,
                                              const WordVectorTable& table,
                                              std::size_t target_dim) {
  if (mode == KgeMode::none) return std::nullopt;
  if (target_dim == 0) target_dim = default_embedding_dim(mode, dr_enabled);
  KnowledgeGraph selected = select_subgraph(graph, perceived);
  if (mode == KgeMode::partial) selected = without_color_triples(selected);
  return embed_scene(linearize(selected), table, target_dim);
}

std::optional<SceneEmbedding> scene_embedding_for_mode(const KnowledgeGraph& graph, KgeMode mode,
                                                       bool dr_enabled,
                                                       const WordVectorTable& table,
                                                       std::size_t target_dim) {
  return scene_embedding(graph, object_type_entities(), mode, dr_enabled, table, target_dim);
}

std::optional<SceneEmbedding> episode_embedding(const KnowledgeGraph& graph,
                                                const std::string& object_type,
                                                const std::string& realized_color, KgeMode mode,
                                                bool dr_enabled, const WordVectorTable& table,
                                                std::size_t target_dim) {
  if (mode == KgeMode::none) return std::nullopt;
  if (target_dim == 0) target_dim = default_embedding_dim(mode, dr_enabled);
  KnowledgeGraph selected = select_subgraph(graph, {object_type});
  KnowledgeGraph kept;
  for (const Triple& t : selected.triples()) {
    if (t.relation == kColorRelation) {
      if (mode == KgeMode::partial) continue;
      if (t.head == object_type && t.tail != realized_color) continue;
    }
    kept.add(t);
  }
  return embed_scene(linearize(kept), table, target_dim);
}

std::vector<std::string> graph_vocabulary(const KnowledgeGraph& graph) {
  std::set<std::string> words(graph.entities().begin(), graph.entities().end());
  for (const std::string& relation : graph.relations()) {
    std::istringstream parts(split_camel_case(relation));
    std::string w;
    while (parts >> w) words.insert(w);
  }
  return {words.begin(), words.end()};
}

}  // namespace kgrl::kge
