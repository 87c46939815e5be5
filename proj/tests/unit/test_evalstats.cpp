#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "kgrl/evalstats/anova.hpp"
#include "kgrl/evalstats/compare.hpp"
#include "kgrl/evalstats/evaluation.hpp"
#include "kgrl/evalstats/stats.hpp"

using namespace kgrl::evalstats;
namespace fs = std::filesystem;
namespace ra = kgrl::reacharena;

namespace {

// Textbook sums of squares around the grand mean.
std::pair<double, double> two_pass_ss(const std::vector<std::vector<double>>& groups) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    for (double x : g) total += x;
    n += g.size();
  }
  const double grand = total / static_cast<double>(n);
  double between = 0.0, within = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double x : g) m += x;
    m /= static_cast<double>(g.size());
    between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) within += (x - m) * (x - m);
  }
  return {between, within};
}

double welch_free_t_squared(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double ma = mean(a), mb = mean(b);
  double ss = 0.0;
  for (double x : a) ss += (x - ma) * (x - ma);
  for (double x : b) ss += (x - mb) * (x - mb);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled = ss / (na + nb - 2.0);
  const double t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  return t * t;
}

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, double mu, double sigma) {
  std::normal_distribution<double> d(mu, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy(std::vector<double>{0.05, 0.12, 0.08}, 0.10) == doctest::Approx(200.0 / 3.0).epsilon(1e-12));
  CHECK(accuracy(std::vector<double>{0.10}, 0.10) == 100.0);
  CHECK(accuracy(std::vector<double>{0.1000001}, 0.10) == 0.0);
  CHECK_THROWS(accuracy(std::vector<double>{}, 0.1));
}

TEST_CASE("mean and population std") {
  const auto ms = mean_std(std::vector<double>{0.0, std::numbers::pi / 2});
  CHECK(ms.mean == doctest::Approx(std::numbers::pi / 4));
  CHECK(ms.std == doctest::Approx(std::numbers::pi / 4));
  const auto empty = mean_std(std::vector<double>{});
  CHECK(empty.mean == 0.0);
  CHECK(empty.std == 0.0);

  std::mt19937_64 rng(4);
  const auto v = draw(rng, 5000, 1e6, 0.5);
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  const double sd = std::sqrt(s / static_cast<double>(v.size()));
  const auto w = mean_std(v);
  CHECK(std::fabs(w.mean - m) < 1e-6);
  CHECK(std::fabs(w.std - sd) / sd < 1e-9);
}

TEST_CASE("histogram clamps out-of-range samples") {
  const auto h = histogram(std::vector<double>{-5.0, 0.1, 0.5, 0.99, 1.0, 7.0}, 0.0, 1.0, 4);
  REQUIRE(h.counts.size() == 4);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[2] == 1);
  CHECK(h.counts[3] == 3);
  CHECK(h.bin_width() == 0.25);
  CHECK_THROWS(histogram(std::vector<double>{}, 1.0, 0.0, 4));
  CHECK_THROWS(histogram(std::vector<double>{}, 0.0, 1.0, 0));
}

TEST_CASE("joint angle statistics over trace rows and files") {
  std::vector<ra::TraceRow> rows(2);
  rows[0].joint_angles = {0.0, 1.0};
  rows[0].actions = {3, 3};
  rows[1].joint_angles = {std::numbers::pi / 2, -1.0};
  rows[1].actions = {3, 3};
  const auto s = joint_angle_stats(rows, 0, -std::numbers::pi, std::numbers::pi);
  CHECK(s.mean == doctest::Approx(std::numbers::pi / 4));
  CHECK(s.std == doctest::Approx(std::numbers::pi / 4));
  CHECK(s.samples == 2);
  CHECK(s.histogram.counts.size() == 36);
  CHECK_THROWS(joint_angle_stats(rows, 2, -1.0, 1.0));

  const auto p = fs::temp_directory_path() / "kgrl_joint_trace.csv";
  {
    ra::TraceWriter w(p, 2);
    for (const auto& r : rows) w.write(r);
  }
  const auto f = joint_angle_stats(p, 1, -2.6, 2.6);
  CHECK(f.mean == doctest::Approx(0.0));
  CHECK(f.std == doctest::Approx(1.0));
  try {
    joint_angle_stats(p, 2, -2.6, 2.6);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("missing column") != std::string::npos);
  }
}

TEST_CASE("regularized incomplete beta against boost") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ab(0.1, 200.0), xs(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double a = ab(rng), b = ab(rng), x = xs(rng);
    const double ref = boost::math::ibeta(a, b, x);
    const double got = regularized_incomplete_beta(a, b, x);
    worst = std::max(worst, std::fabs(got - ref));
  }
  CHECK(worst < 1e-12);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("F survival against frozen reference values") {
  // F distribution upper tails from an independent statistics package.
  struct Ref {
    double f, d1, d2, p;
  };
  const Ref refs[] = {{1.5, 1, 4, 0.2878641347266907},      {3.2, 2, 27, 0.05660222640850086},
                      {0.4, 3, 96, 0.7533065439448701},     {10.0, 1, 58, 0.0024904186848548593},
                      {2.0, 5, 10, 0.1641949508997387},     {0.0, 2, 9, 1.0},
                      {50.0, 1, 198, 2.5806165219366375e-11}};
  for (const auto& r : refs) {
    CAPTURE(r.f);
    CHECK(std::fabs(f_survival(r.f, r.d1, r.d2) - r.p) <= 1e-12 + 1e-9 * r.p);
  }
  CHECK(f_survival(std::numeric_limits<double>::infinity(), 2, 9) == 0.0);
}

TEST_CASE("one-way ANOVA examples") {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  const auto r = anova_oneway(a, b);
  CHECK(r.f == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(r.df_between == 1);
  CHECK(r.df_within == 4);
  CHECK(r.ss_between == doctest::Approx(1.5));
  CHECK(r.ss_within == doctest::Approx(4.0));
  CHECK(r.p == doctest::Approx(0.2878641347266907).epsilon(1e-10));

  const std::vector<std::vector<double>> three{{1, 2, 3, 4}, {4, 5, 6}, {0, 9, 2, 2, 1}};
  const auto t = anova_oneway(three);
  CHECK(t.f == doctest::Approx(0.9692906574394464).epsilon(1e-12));
  CHECK(t.p == doctest::Approx(0.4156873364384915).epsilon(1e-10));
  CHECK(t.group_means.size() == 3);

  const auto same = anova_oneway(a, a);
  CHECK(same.f == 0.0);
  CHECK(same.p == 1.0);

  const std::vector<double> c0{1, 1, 1}, c1{2, 2, 2};
  const auto deg = anova_oneway(c0, c1);
  CHECK(std::isinf(deg.f));
  CHECK(deg.p == 0.0);
  CHECK_FALSE(deg.warning.empty());
  const auto flat = anova_oneway(c0, c0);
  CHECK(flat.f == 0.0);
  CHECK(flat.p == 1.0);

  CHECK_THROWS(anova_oneway(std::vector<double>{1.0}, a));
  const std::vector<std::vector<double>> one{{1, 2}};
  CHECK_THROWS(anova_oneway(one));
}

TEST_CASE("ANOVA agrees with a two-pass oracle and the pooled t statistic") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> groups;
    const std::size_t k = 2 + trial % 4;
    for (std::size_t g = 0; g < k; ++g) groups.push_back(draw(rng, 2 + (trial + g) % 9, 0.3 * static_cast<double>(g), 1.0));
    const auto r = anova_oneway(groups);
    const auto [sb, sw] = two_pass_ss(groups);
    CHECK(std::fabs(r.ss_between - sb) <= 1e-10 * (1.0 + sb));
    CHECK(std::fabs(r.ss_within - sw) <= 1e-10 * (1.0 + sw));
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    const double f = (sb / static_cast<double>(k - 1)) / (sw / static_cast<double>(n - k));
    CHECK(std::fabs(r.f - f) <= 1e-9 * (1.0 + f));
    CHECK(std::fabs(r.p - boost::math::ibeta((n - k) / 2.0, (k - 1) / 2.0,
                                             (n - k) / ((n - k) + (k - 1) * f))) < 1e-12);
    if (k == 2) {
      const double t2 = welch_free_t_squared(groups[0], groups[1]);
      CHECK(std::fabs(r.f - t2) <= 1e-9 * (1.0 + t2));
    }
  }
}

TEST_CASE("ANOVA invariances and monotonicity") {
  std::mt19937_64 rng(5);
  const auto a = draw(rng, 30, 0.0, 1.0), b = draw(rng, 30, 0.4, 1.0);
  const auto base = anova_oneway(a, b);
  auto shifted_a = a, shifted_b = b, scaled_a = a, scaled_b = b;
  for (auto& x : shifted_a) x += 100.0;
  for (auto& x : shifted_b) x += 100.0;
  for (auto& x : scaled_a) x *= 7.5;
  for (auto& x : scaled_b) x *= 7.5;
  CHECK(anova_oneway(shifted_a, shifted_b).f == doctest::Approx(base.f).epsilon(1e-9));
  CHECK(anova_oneway(scaled_a, scaled_b).f == doctest::Approx(base.f).epsilon(1e-9));
  CHECK(anova_oneway(b, a).f == doctest::Approx(base.f).epsilon(1e-12));

  double prev_f = -1.0, prev_p = 2.0;
  for (double gap : {0.0, 0.2, 0.5, 1.0, 2.0}) {
    auto moved = b;
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = a[i] + gap;
    const auto r = anova_oneway(a, moved);
    CHECK(r.f >= prev_f);
    CHECK(r.p <= prev_p);
    prev_f = r.f;
    prev_p = r.p;
  }
}

TEST_CASE("evaluation of the scripted baselines") {
  auto env = ra::EnvConfig::planar(2);
  env.image_size = 32;
  EvalOptions opts;
  opts.episodes = 100;
  opts.dist_threshold = 0.05;
  opts.deg_threshold = 180.0;
  ra::IkController ik;
  const auto r = evaluate(ik, env, opts);
  CHECK(r.n_episodes == 100);
  CHECK(r.accuracy == 100.0);
  CHECK(r.success_rate == 100.0);
  CHECK_FALSE(r.failure_distance.has_value());
  CHECK(r.episode_length.mean < 50.0);
  CHECK(r.joint_samples.size() == 2);

  for (std::uint64_t seed : {1, 2, 3}) {
    opts.seed = seed;
    ra::RandomController random;
    const auto rr = evaluate(random, env, opts);
    CHECK(rr.accuracy < r.accuracy);
    REQUIRE(rr.failure_distance.has_value());
    CHECK(rr.failure_distance->mean > 0.05);
    CHECK(rr.failure_distance->max >= rr.failure_distance->mean);
  }
}

TEST_CASE("evaluation is deterministic and writes its files") {
  auto env = ra::EnvConfig::planar(2);
  env.image_size = 16;
  const auto dir = fs::temp_directory_path() / "kgrl_eval_files";
  fs::create_directories(dir);
  EvalOptions opts;
  opts.episodes = 12;
  opts.episodes_csv = dir / "episodes.csv";
  opts.trace_csv = dir / "trace.csv";
  ra::RandomController c1, c2;
  const auto a = evaluate(c1, env, opts);
  opts.episodes_csv.clear();
  opts.trace_csv.clear();
  const auto b = evaluate(c2, env, opts);
  CHECK(a.episode_return.mean == b.episode_return.mean);
  CHECK(evaluation_seeds(1, 12) == evaluation_seeds(1, 12));
  CHECK(evaluation_seeds(1, 12) != evaluation_seeds(2, 12));

  std::ifstream in(dir / "episodes.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "episode,seed,target_kind,realized_color,steps,return,final_rel_dist,final_rel_deg,success");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 12);
  const auto trace = ra::read_trace_csv(dir / "trace.csv");
  std::size_t steps = 0;
  for (const auto& e : a.episodes) steps += static_cast<std::size_t>(e.steps);
  CHECK(trace.size() == steps);

  write_report_csv(a, dir / "report.csv");
  std::ifstream rep(dir / "report.csv");
  std::getline(rep, header);
  CHECK(header == "metric,value");
  std::ostringstream text;
  print_report(a, text);
  CHECK(text.str().find("accuracy") != std::string::npos);
}

TEST_CASE("agent comparison") {
  std::vector<AgentSummary> agents{{"bm", 40.0, 300000, {0.3, 0.4, 0.35, 0.45}},
                                   {"kge", 55.0, 250000, {0.5, 0.55, 0.6, 0.52}},
                                   {"tiny", 10.0, 50000, {0.1}}};
  const auto cmp = compare_agents(agents);
  REQUIRE(cmp.rows.size() == 3);
  CHECK(cmp.rows[0].agent == "bm");
  CHECK_FALSE(cmp.rows[0].anova.has_value());
  REQUIRE(cmp.rows[1].anova.has_value());
  CHECK(cmp.rows[1].anova->f ==
        doctest::Approx(anova_oneway(agents[0].success_rates, agents[1].success_rates).f));
  CHECK_FALSE(cmp.rows[2].anova.has_value());
  CHECK(cmp.pairwise.size() == 1);

  const auto p = fs::temp_directory_path() / "kgrl_compare.csv";
  write_comparison_csv(cmp, p);
  std::ifstream in(p);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "agent,accuracy,best_step,F,p");
  CHECK(first.rfind("bm,", 0) == 0);
  CHECK(second.rfind("kge,", 0) == 0);
  std::ostringstream text;
  print_comparison(cmp, agents, text);
  CHECK(text.str().find("kge") != std::string::npos);

  CHECK_THROWS(compare_agents(std::span<const AgentSummary>(agents.data(), 1)));
}
