#include "kgrl/evalstats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kgrl::evalstats {

double accuracy(std::span<const double> final_dists, double threshold) {
  if (final_dists.empty()) throw std::invalid_argument("accuracy: no distances given");
  const auto hits = std::count_if(final_dists.begin(), final_dists.end(),
                                  [threshold](double d) { return d <= threshold; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(final_dists.size());
}

MeanStd mean_std(std::span<const double> samples) {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double x : samples) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  if (n == 0) return {};
  return {mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(n)))};
}

Histogram histogram(std::span<const double> samples, double lower, double upper, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram: bins must be positive");
  if (!(upper > lower)) throw std::invalid_argument("histogram: upper must exceed lower");
  Histogram h{lower, upper, std::vector<std::size_t>(bins, 0)};
  const double width = h.bin_width();
  for (double x : samples) {
    auto b = static_cast<long long>(std::floor((x - lower) / width));
    b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

JointAngleStats joint_angle_stats(std::span<const reacharena::TraceRow> rows, std::size_t joint,
                                  double lower, double upper, std::size_t bins) {
  std::vector<double> samples;
  samples.reserve(rows.size());
  for (const auto& r : rows) {
    if (joint >= r.joint_angles.size()) {
      throw std::out_of_range("joint_angle_stats: trace has no joint " + std::to_string(joint));
    }
    samples.push_back(r.joint_angles[joint]);
  }
  const MeanStd ms = mean_std(samples);
  return {ms.mean, ms.std, samples.size(), histogram(samples, lower, upper, bins)};
}

JointAngleStats joint_angle_stats(const std::filesystem::path& trace_csv, std::size_t joint,
                                  double lower, double upper, std::size_t bins) {
  const std::string column = "q" + std::to_string(joint);
  {
    std::ifstream in(trace_csv);
    std::string header;
    if (!in || !std::getline(in, header)) {
      throw std::runtime_error("cannot read trace " + trace_csv.string());
    }
    std::istringstream fields(header);
    std::string name;
    bool found = false;
    while (std::getline(fields, name, ',')) found = found || name == column;
    if (!found) throw std::runtime_error(trace_csv.string() + ": missing column '" + column + "'");
  }
  const auto rows = reacharena::read_trace_csv(trace_csv);
  return joint_angle_stats(rows, joint, lower, upper, bins);
}

}  // namespace kgrl::evalstats
