#pragma once

#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kgrl/kge/graph.hpp"

namespace kgrl::testing {

// Random labelled multigraph over n_nodes entity names.
inline kge::KnowledgeGraph random_graph(std::mt19937_64& rng, std::size_t n_nodes,
                                        std::size_t n_edges) {
  const std::vector<std::string> relations{"isA", "hasPart", "hasColor", "isMadeOf", "usedFor"};
  kge::KnowledgeGraph g;
  std::uniform_int_distribution<std::size_t> node(0, n_nodes - 1), rel(0, relations.size() - 1);
  for (std::size_t e = 0; e < n_edges; ++e) {
    g.add({"n" + std::to_string(node(rng)), relations[rel(rng)], "n" + std::to_string(node(rng))});
  }
  return g;
}

// Breadth-first search to depth 1 over undirected adjacency, then the
// triples with both endpoints inside the reached set.
inline std::set<kge::Triple> bfs_radius_one(const kge::KnowledgeGraph& g,
                                            const std::vector<std::string>& seeds) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& t : g.triples()) {
    adj[t.head].push_back(t.tail);
    adj[t.tail].push_back(t.head);
  }
  std::map<std::string, int> depth;
  std::queue<std::string> q;
  for (const auto& s : seeds) {
    if (depth.emplace(s, 0).second) q.push(s);
  }
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    if (depth[u] == 1) continue;
    for (const auto& v : adj[u]) {
      if (depth.emplace(v, depth[u] + 1).second) q.push(v);
    }
  }
  std::set<kge::Triple> out;
  for (const auto& t : g.triples()) {
    if (depth.count(t.head) && depth.count(t.tail)) out.insert(t);
  }
  return out;
}

}  // namespace kgrl::testing
