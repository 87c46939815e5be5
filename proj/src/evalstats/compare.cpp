#include "kgrl/evalstats/compare.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace kgrl::evalstats {

namespace {

std::optional<AnovaResult> maybe_anova(const AgentSummary& a, const AgentSummary& b) {
  if (a.success_rates.size() < 2 || b.success_rates.size() < 2) return std::nullopt;
  return anova_oneway(a.success_rates, b.success_rates);
}

std::string fmt(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

Comparison compare_agents(std::span<const AgentSummary> agents) {
  if (agents.size() < 2) throw std::invalid_argument("compare_agents: need at least two agents");
  Comparison c;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    ComparisonRow row{agents[i].name, agents[i].accuracy, agents[i].best_step, std::nullopt};
    if (i > 0) row.anova = maybe_anova(agents[0], agents[i]);
    c.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      if (auto r = maybe_anova(agents[i], agents[j])) c.pairwise.push_back({i, j, *r});
    }
  }
  return c;
}

void write_comparison_csv(const Comparison& comparison, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17) << "agent,accuracy,best_step,F,p\n";
  for (const auto& r : comparison.rows) {
    out << r.agent << ',' << r.accuracy << ',' << r.best_step << ',';
    if (r.anova) out << r.anova->f << ',' << r.anova->p;
    else out << ',';
    out << '\n';
  }
}

void print_comparison(const Comparison& comparison, std::span<const AgentSummary> agents,
                      std::ostream& out) {
  std::size_t width = 5;
  for (const auto& r : comparison.rows) width = std::max(width, r.agent.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "agent" << std::right
      << std::setw(10) << "accuracy" << std::setw(12) << "best_step" << std::setw(12) << "F"
      << std::setw(12) << "p" << '\n';
  for (const auto& r : comparison.rows) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << r.agent << std::right
        << std::setw(10) << fmt(r.accuracy, 2) << std::setw(12) << r.best_step;
    if (r.anova) out << std::setw(12) << fmt(r.anova->f, 4) << std::setw(12) << fmt(r.anova->p, 6);
    else out << std::setw(12) << "-" << std::setw(12) << "-";
    out << '\n';
  }
  if (!comparison.pairwise.empty()) {
    out << "\npairwise one-way ANOVA on per-run success rates\n";
    for (const auto& pw : comparison.pairwise) {
      out << "  " << agents[pw.first].name << " vs " << agents[pw.second].name << ": F("
          << pw.anova.df_between << ", " << pw.anova.df_within << ") = " << fmt(pw.anova.f, 4)
          << ", p = " << fmt(pw.anova.p, 6);
      if (!pw.anova.warning.empty()) out << "  [" << pw.anova.warning << "]";
      out << '\n';
    }
  }
}

}  // namespace kgrl::evalstats
