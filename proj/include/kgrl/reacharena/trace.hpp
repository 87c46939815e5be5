#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <vector>

#include "kgrl/reacharena/arena.hpp"

namespace kgrl::reacharena {

struct TraceRow {
  std::size_t episode = 0;
  int step = 0;
  std::vector<double> joint_angles;
  std::vector<int> actions;
  double reward = 0.0;
  double rel_dist = 0.0;
  double rel_deg = 0.0;
  bool done = false;
  bool success = false;
};

// CSV columns: episode, step, q0..q{n-1}, a0..a{n-1}, reward, rel_dist,
// rel_deg, done, success.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, std::size_t n_joints);
  void write(const TraceRow& row);

 private:
  std::ofstream out_;
  std::size_t n_joints_;
};

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

// Binary PPM (P6), 8 bits per channel.
void write_ppm(const Image& image, const std::filesystem::path& path);

}  // namespace kgrl::reacharena
