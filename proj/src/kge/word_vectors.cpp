#include "kgrl/kge/word_vectors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kgrl::kge {

void WordVectorTable::insert(const std::string& token, std::vector<float> vector) {
  if (vector.size() != dim_) {
    throw std::invalid_argument("word vector for '" + token + "' has " +
                                std::to_string(vector.size()) + " entries, table expects " +
                                std::to_string(dim_));
  }
  vectors_[token] = std::move(vector);
}

std::span<const float> WordVectorTable::lookup(const std::string& token) const {
  auto it = vectors_.find(token);
  if (it == vectors_.end()) return {};
  return it->second;
}

WordVectorTable load_word_vectors(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word-vector file " + path.string());
  WordVectorTable table(expected_dim);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<float> vec;
    std::string number;
    while (fields >> number) {
      float v = 0.0f;
      auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), v);
      if (ec != std::errc() || ptr != number.data() + number.size()) {
        fail("malformed number '" + number + "'");
      }
      // Native dimensions beyond expected_dim are dropped.
      if (vec.size() < expected_dim) vec.push_back(v);
    }
    if (vec.size() < expected_dim) {
      fail("vector for '" + token + "' has fewer than " + std::to_string(expected_dim) + " entries");
    }
    table.insert(token, std::move(vec));
  }
  return table;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

WordVectorTable fallback_word_vectors(const std::vector<std::string>& vocabulary, std::size_t dim,
                                      std::uint64_t seed) {
  WordVectorTable table(dim);
  for (const std::string& token : vocabulary) {
    std::uint64_t state = fnv1a(token) ^ (seed * 0xD1B54A32D192ED03ULL);
    std::vector<float> vec(dim);
    for (float& v : vec) {
      const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
      v = static_cast<float>(2.0 * unit - 1.0);
    }
    table.insert(token, std::move(vec));
  }
  return table;
}

}  // namespace kgrl::kge
