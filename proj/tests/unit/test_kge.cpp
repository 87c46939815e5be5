#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "graph_oracle.hpp"
#include "kgrl/kge/graph.hpp"
#include "kgrl/kge/scene_embedding.hpp"
#include "kgrl/kge/word_vectors.hpp"

using namespace kgrl::kge;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto p = fs::temp_directory_path() / ("kgrl_test_" + name);
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_CASE("subgraph selection equals a radius-one BFS") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    auto g = kgrl::testing::random_graph(rng, n, 1 + rng() % (2 * n));
    std::vector<std::string> entities(g.entities().begin(), g.entities().end());
    std::shuffle(entities.begin(), entities.end(), rng);
    entities.resize(1 + rng() % std::min<std::size_t>(4, entities.size()));
    CHECK(select_subgraph(g, entities).triples() == kgrl::testing::bfs_radius_one(g, entities));
  }
}

TEST_CASE("subgraph selection small cases") {
  KnowledgeGraph g({{"mug", "hasColor", "red"}, {"red", "isA", "color"}, {"handle", "partOf", "mug"},
                    {"color", "isA", "concept"}});
  const auto s = select_subgraph(g, {"mug"});
  CHECK(s.triples() == std::set<Triple>{{"handle", "partOf", "mug"}, {"mug", "hasColor", "red"}});
  CHECK(select_subgraph(g, {}).empty());
  CHECK_THROWS_AS(select_subgraph(g, {"plate"}), UnknownEntityError);
}

TEST_CASE("linearization") {
  CHECK(split_camel_case("hasColor") == "has color");
  CHECK(split_camel_case("isConnectedTo") == "is connected to");
  CHECK(split_camel_case("isA") == "is a");
  CHECK(split_camel_case("made") == "made");
  KnowledgeGraph g({{"mug", "hasColor", "red"}, {"bottle", "hasShape", "cylindrical"}, {"mug", "hasColor", "blue"}});
  CHECK(linearize(g) == "bottle has shape cylindrical mug has color blue mug has color red");
  CHECK(linearize(KnowledgeGraph{}).empty());
}

TEST_CASE("graph files round-trip and report bad lines") {
  const auto g = default_scene_graph(true);
  const auto p = fs::temp_directory_path() / "kgrl_test_graph.tsv";
  save_graph(g, p);
  CHECK(load_graph(p) == g);
  const auto bad = temp_file("bad.tsv", "# comment\n\nmug\thasColor\tred\nmug hasColor\n");
  try {
    load_graph(bad);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(":4") != std::string::npos);
  }
  CHECK_THROWS(load_graph(fs::temp_directory_path() / "kgrl_no_such_graph.tsv"));
}

TEST_CASE("default scene graph contents") {
  const auto plain = default_scene_graph(false);
  const auto dr = default_scene_graph(true);
  CHECK(plain.triples().count({"mug", "hasColor", "red"}));
  CHECK_FALSE(plain.triples().count({"mug", "hasColor", "blue"}));
  CHECK(dr.triples().count({"mug", "hasColor", "blue"}));
  CHECK(dr.triples().count({"bottle", "hasColor", "purple"}));
  CHECK(dr.triples().count({"cereal_box", "hasColor", "light_blue"}));
  CHECK(dr.size() == plain.size() + 3);
  // Colors hang only off the objects, so perceiving the colors as well adds nothing.
  std::vector<std::string> with_colors = object_type_entities();
  for (const auto& t : dr.triples()) {
    if (t.relation == kColorRelation) with_colors.push_back(t.tail);
  }
  CHECK(select_subgraph(dr, with_colors) == select_subgraph(dr, object_type_entities()));
}

TEST_CASE("word vector loading") {
  const auto p = temp_file("vec.txt", "mug 1 2 3 4 5\nred 0.5 -0.5 0.25 0 1e-3\n");
  const auto t = load_word_vectors(p, 3);
  CHECK(t.size() == 2);
  REQUIRE(t.lookup("mug").size() == 3);
  CHECK(t.lookup("mug")[2] == 3.0f);
  CHECK(t.lookup("red")[1] == -0.5f);
  CHECK(t.lookup("plate").empty());
  CHECK_THROWS(load_word_vectors(temp_file("short.txt", "mug 1 2\n"), 3));
  CHECK_THROWS(load_word_vectors(temp_file("nan.txt", "mug 1 x 3\n"), 3));
  WordVectorTable table(2);
  CHECK_THROWS(table.insert("a", {1.0f}));
}

TEST_CASE("fallback vectors are deterministic and seed dependent") {
  const std::vector<std::string> vocab{"mug", "red", "has"};
  const auto a = fallback_word_vectors(vocab, kWordDim, 7);
  const auto b = fallback_word_vectors(vocab, kWordDim, 7);
  const auto c = fallback_word_vectors(vocab, kWordDim, 8);
  for (const auto& w : vocab) {
    REQUIRE(a.lookup(w).size() == kWordDim);
    CHECK(std::equal(a.lookup(w).begin(), a.lookup(w).end(), b.lookup(w).begin()));
    CHECK_FALSE(std::equal(a.lookup(w).begin(), a.lookup(w).end(), c.lookup(w).begin()));
    for (float v : a.lookup(w)) CHECK((v >= -1.0f && v < 1.0f));
  }
  CHECK_FALSE(std::equal(a.lookup("mug").begin(), a.lookup("mug").end(), a.lookup("red").begin()));
}

TEST_CASE("scene embedding concatenates, pads and truncates") {
  WordVectorTable t(2);
  t.insert("mug", {1, 2});
  t.insert("red", {3, 4});
  auto e = embed_scene("mug has red", t, 8);
  CHECK(e.values == std::vector<float>{1, 2, 0, 0, 3, 4, 0, 0});
  CHECK(e.unknown_tokens == std::vector<std::string>{"has"});
  CHECK(embed_scene("mug red mug", t, 3).values == std::vector<float>{1, 2, 3});
  CHECK(embed_scene("", t, 2).values == std::vector<float>{0, 0});
}

TEST_CASE("embedding dimensions and modes") {
  CHECK(default_embedding_dim(KgeMode::none, true) == 0);
  CHECK(default_embedding_dim(KgeMode::partial, false) == 150);
  CHECK(default_embedding_dim(KgeMode::partial, true) == 150);
  CHECK(default_embedding_dim(KgeMode::full, false) == 150);
  CHECK(default_embedding_dim(KgeMode::full, true) == 300);
  CHECK(parse_kge_mode("full") == KgeMode::full);
  CHECK_THROWS(parse_kge_mode("fulll"));

  const auto g = default_scene_graph(true);
  const auto table = fallback_word_vectors(graph_vocabulary(g), kWordDim, 0);
  CHECK_FALSE(scene_embedding_for_mode(g, KgeMode::none, true, table).has_value());
  const auto full = scene_embedding_for_mode(g, KgeMode::full, true, table);
  const auto partial = scene_embedding_for_mode(g, KgeMode::partial, true, table);
  REQUIRE(full);
  REQUIRE(partial);
  CHECK(full->values.size() == 300);
  CHECK(partial->values.size() == 150);
  CHECK(full->source_sentence.find("has color") != std::string::npos);
  CHECK(partial->source_sentence.find("has color") == std::string::npos);
  CHECK(full->unknown_tokens.empty());

  const auto red = episode_embedding(g, "mug", "red", KgeMode::full, true, table);
  const auto blue = episode_embedding(g, "mug", "blue", KgeMode::full, true, table);
  REQUIRE(red);
  REQUIRE(blue);
  CHECK(red->source_sentence.find("blue") == std::string::npos);
  CHECK(blue->source_sentence.find("blue") != std::string::npos);
  CHECK(red->values != blue->values);
}
