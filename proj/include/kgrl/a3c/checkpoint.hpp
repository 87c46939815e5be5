#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgrl/policy/network.hpp"

namespace kgrl::a3c {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParameterBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::int64_t step = 0;
  policy::AgentConfig agent;
  std::vector<ParameterBlock> blocks;
};

// Layout: magic "KGA3C\x01"; u32 header length + "key=value" header text
// (step and agent configuration); u32 tensor count; per tensor u32 name
// length, name, u32 rank, u64 dims, u64 offset; u64 float count; then
// little-endian float32 data. Written to a temporary file and renamed.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Loads and checks that the recorded agent configuration equals `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const policy::AgentConfig& expected);

Checkpoint make_checkpoint(const policy::PolicyNetwork<float>& network, std::int64_t step);
Checkpoint make_checkpoint(const policy::AgentConfig& agent,
                           const std::vector<std::string>& names,
                           const std::vector<std::vector<std::size_t>>& shapes,
                           const std::vector<std::vector<float>>& values, std::int64_t step);

// Copies checkpoint values into a network built with the same configuration.
void apply_checkpoint(const Checkpoint& checkpoint, policy::PolicyNetwork<float>& network);

}  // namespace kgrl::a3c
