#include "kgrl/evalstats/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace kgrl::evalstats {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t seed, std::size_t n) {
  std::vector<std::uint64_t> seeds(n);
  std::uint64_t s = splitmix64(seed ^ 0xE7A1'0000'0000'1000ULL);
  for (auto& v : seeds) {
    v = s;
    s = splitmix64(s);
  }
  return seeds;
}

EvalReport evaluate(reacharena::Controller& controller, const reacharena::EnvConfig& env,
                    const EvalOptions& options) {
  if (options.episodes == 0) throw std::invalid_argument("evaluate: episodes must be positive");
  reacharena::EnvConfig cfg = env;
  cfg.success_dist = options.dist_threshold;
  cfg.success_deg = options.deg_threshold;
  cfg.validate();
  reacharena::ReachArena arena(cfg);

  std::ofstream episodes_out;
  if (!options.episodes_csv.empty()) {
    episodes_out.open(options.episodes_csv, std::ios::trunc);
    if (!episodes_out) throw std::runtime_error("cannot write " + options.episodes_csv.string());
    episodes_out << "episode,seed,target_kind,realized_color,steps,return,final_rel_dist,final_rel_deg,success\n";
    episodes_out << std::setprecision(17);
  }
  std::optional<reacharena::TraceWriter> trace;
  if (!options.trace_csv.empty()) trace.emplace(options.trace_csv, cfg.n_links);

  EvalReport report;
  report.n_episodes = options.episodes;
  report.joint_samples.resize(cfg.n_links);
  std::vector<double> returns, lengths, final_dists, failures;
  std::size_t successes = 0;
  const auto seeds = evaluation_seeds(options.seed, options.episodes);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    auto ep = reacharena::run_episode(arena, controller, seeds[i], true, i);
    returns.push_back(ep.total_return);
    lengths.push_back(ep.steps);
    final_dists.push_back(ep.final_info.rel_dist);
    if (ep.final_info.rel_dist > options.dist_threshold) failures.push_back(ep.final_info.rel_dist);
    if (ep.success) ++successes;
    for (const auto& row : ep.trace) {
      for (std::size_t j = 0; j < cfg.n_links; ++j) report.joint_samples[j].push_back(row.joint_angles[j]);
      if (trace) trace->write(row);
    }
    if (episodes_out.is_open()) {
      episodes_out << i << ',' << ep.seed << ',' << reacharena::to_string(ep.target_kind) << ','
                   << ep.realized_color << ',' << ep.steps << ',' << ep.total_return << ','
                   << ep.final_info.rel_dist << ',' << ep.final_info.rel_deg << ','
                   << (ep.success ? 1 : 0) << '\n';
    }
    ep.trace.clear();
    ep.trace.shrink_to_fit();
    report.episodes.push_back(std::move(ep));
  }
  report.episode_return = mean_std(returns);
  report.episode_length = mean_std(lengths);
  report.accuracy = accuracy(final_dists, options.dist_threshold);
  report.success_rate = 100.0 * static_cast<double>(successes) / static_cast<double>(options.episodes);
  if (!failures.empty()) {
    const MeanStd ms = mean_std(failures);
    report.failure_distance = FailureStats{ms.mean, ms.std,
                                           *std::max_element(failures.begin(), failures.end()),
                                           failures.size()};
  }
  return report;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17) << "metric,value\n";
  out << "n_episodes," << report.n_episodes << '\n'
      << "mean_return," << report.episode_return.mean << '\n'
      << "std_return," << report.episode_return.std << '\n'
      << "mean_length," << report.episode_length.mean << '\n'
      << "std_length," << report.episode_length.std << '\n';
  if (report.failure_distance) {
    out << "mean_failure_distance," << report.failure_distance->mean << '\n'
        << "std_failure_distance," << report.failure_distance->std << '\n'
        << "max_failure_distance," << report.failure_distance->max << '\n'
        << "failures," << report.failure_distance->count << '\n';
  } else {
    out << "mean_failure_distance,\nstd_failure_distance,\nmax_failure_distance,\nfailures,0\n";
  }
  out << "accuracy," << report.accuracy << '\n' << "success_rate," << report.success_rate << '\n';
  for (std::size_t j = 0; j < report.joint_samples.size(); ++j) {
    const MeanStd ms = mean_std(report.joint_samples[j]);
    out << "joint" << j << "_mean," << ms.mean << '\n' << "joint" << j << "_std," << ms.std << '\n';
  }
}

void print_report(const EvalReport& report, std::ostream& out) {
  auto row = [&out](const char* name, const std::string& value) {
    out << std::left << std::setw(24) << name << value << '\n';
  };
  auto num = [](double v, int precision = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
  };
  row("episodes", std::to_string(report.n_episodes));
  row("return (mean, std)", num(report.episode_return.mean) + "  " + num(report.episode_return.std));
  row("length (mean, std)", num(report.episode_length.mean, 2) + "  " + num(report.episode_length.std, 2));
  if (report.failure_distance) {
    const auto& f = *report.failure_distance;
    row("failure dist (m)", num(f.mean) + "  " + num(f.std) + "  max " + num(f.max) + "  n " +
                                std::to_string(f.count));
  } else {
    row("failure dist (m)", "-");
  }
  row("accuracy (%)", num(report.accuracy, 2));
  row("success rate (%)", num(report.success_rate, 2));
  for (std::size_t j = 0; j < report.joint_samples.size(); ++j) {
    const MeanStd ms = mean_std(report.joint_samples[j]);
    const std::string name = "joint " + std::to_string(j) + " (mean, std)";
    row(name.c_str(), num(ms.mean) + "  " + num(ms.std));
  }
}

}  // namespace kgrl::evalstats
