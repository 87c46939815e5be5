#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace kgrl::kge {

inline constexpr std::size_t kWordDim = 40;

class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dim = kWordDim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  bool contains(const std::string& token) const { return vectors_.count(token) != 0; }

  // Replaces any existing entry. Throws if the vector length differs from dim().
  void insert(const std::string& token, std::vector<float> vector);
  // Empty span for unknown tokens.
  std::span<const float> lookup(const std::string& token) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

// Pretrained text format: "token v1 v2 ... vD" per line. Vectors longer than
// expected_dim are truncated to their leading entries.
WordVectorTable load_word_vectors(const std::filesystem::path& path, std::size_t expected_dim);

// Deterministic stand-in vectors: uniform(-1, 1) entries from a generator
// seeded by hash(token) mixed with `seed`.
WordVectorTable fallback_word_vectors(const std::vector<std::string>& vocabulary, std::size_t dim,
                                      std::uint64_t seed);

}  // namespace kgrl::kge
