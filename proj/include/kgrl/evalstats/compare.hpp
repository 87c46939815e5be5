#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kgrl/evalstats/anova.hpp"

namespace kgrl::evalstats {

struct AgentSummary {
  std::string name;
  double accuracy = 0.0;  // percent
  std::int64_t best_step = 0;
  std::vector<double> success_rates;  // one per seed or run
};

struct ComparisonRow {
  std::string agent;
  double accuracy = 0.0;
  std::int64_t best_step = 0;
  // Against the first row; absent for the first row itself and when either
  // group has fewer than two success rates.
  std::optional<AnovaResult> anova;
};

struct PairwiseAnova {
  std::size_t first = 0;
  std::size_t second = 0;
  AnovaResult anova;
};

struct Comparison {
  std::vector<ComparisonRow> rows;     // input order
  std::vector<PairwiseAnova> pairwise; // every pair i < j with enough data
};

Comparison compare_agents(std::span<const AgentSummary> agents);

// Columns: agent, accuracy, best_step, F, p.
void write_comparison_csv(const Comparison& comparison, const std::filesystem::path& path);
void print_comparison(const Comparison& comparison, std::span<const AgentSummary> agents,
                      std::ostream& out);

}  // namespace kgrl::evalstats
