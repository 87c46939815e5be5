#include "kgrl/kge/graph.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace kgrl::kge {

KnowledgeGraph::KnowledgeGraph(const std::vector<Triple>& triples) {
  for (const Triple& t : triples) add(t);
}

bool KnowledgeGraph::add(Triple triple) {
  if (triple.head.empty() || triple.relation.empty() || triple.tail.empty()) {
    throw std::invalid_argument("triple labels must be non-empty");
  }
  entities_.insert(triple.head);
  entities_.insert(triple.tail);
  relations_.insert(triple.relation);
  return triples_.insert(std::move(triple)).second;
}

KnowledgeGraph select_subgraph(const KnowledgeGraph& graph,
                               const std::vector<std::string>& perceived) {
  std::set<std::string> seeds;
  for (const std::string& entity : perceived) {
    if (!graph.contains_entity(entity)) throw UnknownEntityError(entity);
    seeds.insert(entity);
  }
  std::set<std::string> nodes = seeds;
  for (const Triple& t : graph.triples()) {
    if (seeds.count(t.head)) nodes.insert(t.tail);
    if (seeds.count(t.tail)) nodes.insert(t.head);
  }
  KnowledgeGraph out;
  for (const Triple& t : graph.triples()) {
    if (nodes.count(t.head) && nodes.count(t.tail)) out.add(t);
  }
  return out;
}

std::string split_camel_case(const std::string& label) {
  std::string out;
  out.reserve(label.size() + 4);
  for (std::size_t i = 0; i < label.size(); ++i) {
    const unsigned char ch = static_cast<unsigned char>(label[i]);
    if (std::isupper(ch)) {
      if (i > 0) out.push_back(' ');
      out.push_back(static_cast<char>(std::tolower(ch)));
    } else {
      out.push_back(static_cast<char>(ch));
    }
  }
  return out;
}

std::string linearize(const KnowledgeGraph& subgraph) {
  std::string sentence;
  for (const Triple& t : subgraph.triples()) {  // std::set keeps (h, r, t) order
    if (!sentence.empty()) sentence.push_back(' ');
    sentence += t.head;
    sentence.push_back(' ');
    sentence += split_camel_case(t.relation);
    sentence.push_back(' ');
    sentence += t.tail;
  }
  return sentence;
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open knowledge graph file " + path.string());
  KnowledgeGraph graph;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected head<TAB>relation<TAB>tail");
    }
    graph.add({fields[0], fields[1], fields[2]});
  }
  return graph;
}

void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write knowledge graph file " + path.string());
  for (const Triple& t : graph.triples()) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

const std::vector<std::string>& object_type_entities() {
  static const std::vector<std::string> types{"mug", "bottle", "cereal_box"};
  return types;
}

KnowledgeGraph default_scene_graph(bool dr_colors) {
  KnowledgeGraph g({
      {"mug", "isConnectedTo", "handle"},
      {"mug", "isUsedFor", "drinking"},
      {"mug", "isMadeOf", "ceramic"},
      {"handle", "hasShape", "curved"},
      {"bottle", "hasShape", "cylindrical"},
      {"bottle", "hasPart", "stopper"},
      {"stopper", "isMadeOf", "cork"},
      {"cereal_box", "isMadeOf", "cardboard"},
      {"cereal_box", "hasShape", "rectangular"},
      {"cardboard", "isA", "material"},
      {"mug", kColorRelation, "red"},
      {"bottle", kColorRelation, "yellow"},
      {"cereal_box", kColorRelation, "brown"},
  });
  if (dr_colors) {
    g.add({"mug", kColorRelation, "blue"});
    g.add({"bottle", kColorRelation, "purple"});
    g.add({"cereal_box", kColorRelation, "light_blue"});
  }
  return g;
}

}  // namespace kgrl::kge
