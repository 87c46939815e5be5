#include "kgrl/evalstats/anova.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kgrl::evalstats {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_survival: degrees of freedom must be positive");
  if (std::isnan(f)) throw std::invalid_argument("f_survival: F is NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw std::invalid_argument("anova: need at least two groups");
  std::size_t n_total = 0;
  AnovaResult r;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw std::invalid_argument("anova: group " + std::to_string(g) + " has fewer than two observations");
    }
    double sum = 0.0;
    for (double x : groups[g]) sum += x;
    r.group_means.push_back(sum / static_cast<double>(groups[g].size()));
    n_total += groups[g].size();
  }
  // Pairwise form of the between-group sum of squares: exactly zero when the
  // group means coincide.
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double dm = r.group_means[i] - r.group_means[j];
      r.ss_between += static_cast<double>(groups[i].size()) *
                      static_cast<double>(groups[j].size()) * dm * dm;
    }
  }
  r.ss_between /= static_cast<double>(n_total);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (double x : groups[g]) {
      const double dx = x - r.group_means[g];
      r.ss_within += dx * dx;
    }
  }
  r.df_between = groups.size() - 1;
  r.df_within = n_total - groups.size();

  const bool same_means = r.ss_between == 0.0;
  if (r.ss_within == 0.0) {
    if (same_means) {
      r.f = 0.0;
      r.p = 1.0;
    } else {
      r.f = std::numeric_limits<double>::infinity();
      r.p = 0.0;
      r.warning = "degenerate data: zero within-group variance with different group means";
    }
    return r;
  }
  const double ms_between = r.ss_between / static_cast<double>(r.df_between);
  const double ms_within = r.ss_within / static_cast<double>(r.df_within);
  r.f = ms_between / ms_within;
  r.p = f_survival(r.f, static_cast<double>(r.df_between), static_cast<double>(r.df_within));
  return r;
}

AnovaResult anova_oneway(std::span<const double> group_a, std::span<const double> group_b) {
  const std::vector<std::vector<double>> groups{{group_a.begin(), group_a.end()},
                                                {group_b.begin(), group_b.end()}};
  return anova_oneway(groups);
}

}  // namespace kgrl::evalstats
