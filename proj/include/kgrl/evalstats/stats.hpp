#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "kgrl/reacharena/trace.hpp"

namespace kgrl::evalstats {

// 100 * #{d <= threshold} / N.
double accuracy(std::span<const double> final_dists, double threshold);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (divide by N)
};

// Welford accumulation; empty input gives {0, 0}.
MeanStd mean_std(std::span<const double> samples);

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> counts;  // equal-width bins; values outside are clamped to the ends

  double bin_width() const { return (upper - lower) / static_cast<double>(counts.size()); }
};

Histogram histogram(std::span<const double> samples, double lower, double upper, std::size_t bins);

struct JointAngleStats {
  double mean = 0.0;  // radians
  double std = 0.0;   // radians, population
  std::size_t samples = 0;
  Histogram histogram;
};

// Over every step of every logged episode.
JointAngleStats joint_angle_stats(std::span<const reacharena::TraceRow> rows, std::size_t joint,
                                  double lower, double upper, std::size_t bins = 36);

// Reads a trace CSV; a missing q<joint> column is an error.
JointAngleStats joint_angle_stats(const std::filesystem::path& trace_csv, std::size_t joint,
                                  double lower, double upper, std::size_t bins = 36);

}  // namespace kgrl::evalstats
