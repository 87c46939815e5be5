#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgrl::kge {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

class UnknownEntityError : public std::invalid_argument {
 public:
  explicit UnknownEntityError(const std::string& entity)
      : std::invalid_argument("entity '" + entity + "' is not in the knowledge graph"),
        entity_(entity) {}
  const std::string& entity() const { return entity_; }

 private:
  std::string entity_;
};

// Set of labelled (head, relation, tail) edges. Entity and relation sets are
// derived from the triples and kept in sync on insertion.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  explicit KnowledgeGraph(const std::vector<Triple>& triples);

  // Returns false when the triple was already present.
  bool add(Triple triple);

  const std::set<Triple>& triples() const { return triples_; }
  const std::set<std::string>& entities() const { return entities_; }
  const std::set<std::string>& relations() const { return relations_; }
  bool contains_entity(const std::string& entity) const { return entities_.count(entity) != 0; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  bool operator==(const KnowledgeGraph& other) const { return triples_ == other.triples_; }

 private:
  std::set<Triple> triples_;
  std::set<std::string> entities_;
  std::set<std::string> relations_;
};

// Scene subgraph: the perceived entities, every entity one (undirected) edge
// away from them, and all triples whose endpoints both lie in that set.
KnowledgeGraph select_subgraph(const KnowledgeGraph& graph,
                               const std::vector<std::string>& perceived);

// "hasColor" -> "has color"
std::string split_camel_case(const std::string& label);

// Triples in lexicographic order, each as "head relation tail", joined by
// single spaces. Relation labels are split from camel case.
std::string linearize(const KnowledgeGraph& subgraph);

// Tab-separated "head<TAB>relation<TAB>tail" lines; '#' lines and blank
// lines are skipped.
KnowledgeGraph load_graph(const std::filesystem::path& path);
void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& path);

inline constexpr const char* kColorRelation = "hasColor";

// Object-type entities of the reaching scene.
const std::vector<std::string>& object_type_entities();

// Built-in desk-scene graph. With `dr_colors`, each object lists both of its
// possible colors.
KnowledgeGraph default_scene_graph(bool dr_colors);

}  // namespace kgrl::kge
