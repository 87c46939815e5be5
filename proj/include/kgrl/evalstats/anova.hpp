#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kgrl::evalstats {

// I_x(a, b) by Lentz's continued fraction, using the symmetry
// I_x(a, b) = 1 - I_{1-x}(b, a) where it converges faster.
double regularized_incomplete_beta(double a, double b, double x);

// P(F' > f) for F' ~ F(d1, d2).
double f_survival(double f, double d1, double d2);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  std::vector<double> group_means;
  std::string warning;  // non-empty for degenerate data
};

// One-way ANOVA over k >= 2 groups of at least two observations each.
// With zero within-group variance: equal means give F = 0, p = 1; different
// means give F = +inf, p = 0 and a warning.
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);
AnovaResult anova_oneway(std::span<const double> group_a, std::span<const double> group_b);

}  // namespace kgrl::evalstats
