#include "kgrl/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "kgrl/a3c/checkpoint.hpp"
#include "kgrl/a3c/network_controller.hpp"
#include "kgrl/reacharena/trace.hpp"

namespace kgrl::cli {

namespace fs = std::filesystem;

namespace {

// Owns whatever a controller needs to outlive the episode loop.
struct LoadedController {
  std::unique_ptr<policy::PolicyNetwork<float>> network;
  a3c::KgeInput kge;
  std::unique_ptr<reacharena::Controller> controller;
};

LoadedController load_controller(const ExperimentConfig& config, PolicyKind policy,
                                 const fs::path& checkpoint) {
  LoadedController lc;
  switch (policy) {
    case PolicyKind::ik:
      lc.controller = std::make_unique<reacharena::IkController>();
      return lc;
    case PolicyKind::random:
      lc.controller = std::make_unique<reacharena::RandomController>();
      return lc;
    case PolicyKind::network:
      break;
  }
  if (checkpoint.empty()) throw std::invalid_argument("a network policy needs --checkpoint");
  const auto ckpt = a3c::load_checkpoint(checkpoint, config.agent);
  lc.network = std::make_unique<policy::PolicyNetwork<float>>(config.agent, 0);
  a3c::apply_checkpoint(ckpt, *lc.network);
  lc.kge = build_kge_input(config);
  lc.controller = std::make_unique<a3c::NetworkController>(*lc.network, lc.kge, config.eval.action_mode);
  return lc;
}

evalstats::EvalOptions eval_options(const ExperimentConfig& config) {
  evalstats::EvalOptions o;
  o.episodes = config.eval.episodes;
  o.dist_threshold = config.eval.dist_threshold;
  o.deg_threshold = config.eval.deg_threshold;
  o.seed = config.eval.seed;
  return o;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

PolicyKind parse_policy(const std::string& text) {
  if (text == "network") return PolicyKind::network;
  if (text == "ik") return PolicyKind::ik;
  if (text == "random") return PolicyKind::random;
  throw std::invalid_argument("unknown policy '" + text + "' (expected network, ik or random)");
}

std::string agent_name(const fs::path& dir) {
  fs::path p = dir;
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

std::int64_t checkpoint_step(const fs::path& run_dir, const fs::path& checkpoint) {
  const auto log_path = run_dir / "eval_log.csv";
  if (fs::exists(log_path)) {
    for (const auto& e : a3c::read_eval_log(log_path)) {
      if (run_dir / e.checkpoint_path == checkpoint) return e.step;
    }
  }
  return a3c::load_checkpoint(checkpoint).step;
}

}  // namespace

a3c::TrainResult cmd_train(const ExperimentConfig& config, const fs::path& run_dir, std::ostream& log) {
  fs::create_directories(run_dir);
  {
    std::ofstream snap(run_dir / "config.ini", std::ios::trunc);
    if (!snap) throw std::runtime_error("cannot write " + (run_dir / "config.ini").string());
    snap << dump_config(config);
  }
  const a3c::KgeInput kge = build_kge_input(config);
  a3c::TrainHooks hooks;
  hooks.on_evaluation = [&log](const a3c::EvalLogEntry& e) {
    log << "eval step " << e.step << " avg_return " << std::fixed << std::setprecision(3)
        << e.avg_return << " success_rate " << e.success_rate << std::defaultfloat << std::endl;
    return true;
  };
  auto result = a3c::train(config.agent, config.env, kge, config.train, run_dir, hooks);
  const auto& best = result.eval_log[result.best_index];
  log << "trained " << result.total_steps << " steps; best step " << best.step << " ("
      << best.checkpoint_path << ")\n";
  return result;
}

fs::path best_checkpoint(const fs::path& run_dir) {
  const auto pointer = run_dir / "best.txt";
  std::ifstream in(pointer);
  if (!in) throw std::runtime_error("missing best-checkpoint pointer " + pointer.string());
  std::string rel;
  std::getline(in, rel);
  if (rel.empty()) throw std::runtime_error(pointer.string() + " is empty");
  return run_dir / rel;
}

evalstats::EvalReport cmd_eval(const ExperimentConfig& config, PolicyKind policy,
                               const fs::path& checkpoint, const fs::path& out_dir, std::ostream& out) {
  auto lc = load_controller(config, policy, checkpoint);
  auto options = eval_options(config);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    options.episodes_csv = out_dir / "episodes.csv";
    options.trace_csv = out_dir / "trace.csv";
  }
  auto report = evalstats::evaluate(*lc.controller, config.env, options);
  if (!out_dir.empty()) evalstats::write_report_csv(report, out_dir / "report.csv");
  evalstats::print_report(report, out);
  return report;
}

evalstats::Comparison cmd_compare(const ExperimentConfig& config, const std::vector<fs::path>& run_dirs,
                                  const fs::path& out_dir, std::ostream& out) {
  if (run_dirs.size() < 2) throw std::invalid_argument("compare needs at least two run directories");
  std::vector<evalstats::AgentSummary> agents;
  for (const auto& dir : run_dirs) {
    if (!fs::is_directory(dir)) throw std::runtime_error("run directory " + dir.string() + " does not exist");
    const fs::path ckpt = best_checkpoint(dir);
    ExperimentConfig run_config = parse_config(dir / "config.ini");
    run_config.eval = config.eval;
    auto lc = load_controller(run_config, PolicyKind::network, ckpt);

    evalstats::AgentSummary summary;
    summary.name = agent_name(dir);
    summary.best_step = checkpoint_step(dir, ckpt);
    double accuracy_sum = 0.0;
    for (std::size_t r = 0; r < config.eval.compare_runs; ++r) {
      auto options = eval_options(run_config);
      options.episodes = config.eval.compare_episodes;
      options.seed = config.eval.seed + 1'000'003ULL * (r + 1);
      const auto report = evalstats::evaluate(*lc.controller, run_config.env, options);
      summary.success_rates.push_back(report.accuracy / 100.0);
      accuracy_sum += report.accuracy;
    }
    summary.accuracy = accuracy_sum / static_cast<double>(config.eval.compare_runs);
    agents.push_back(std::move(summary));
  }
  auto comparison = evalstats::compare_agents(agents);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    evalstats::write_comparison_csv(comparison, out_dir / "compare.csv");
    std::ofstream text(out_dir / "compare.txt", std::ios::trunc);
    evalstats::print_comparison(comparison, agents, text);
  }
  evalstats::print_comparison(comparison, agents, out);
  return comparison;
}

DemoResult cmd_demo(const ExperimentConfig& config, PolicyKind policy, const fs::path& checkpoint,
                    std::uint64_t episode_seed, const fs::path& out_dir, std::ostream& out) {
  auto lc = load_controller(config, policy, checkpoint);
  fs::create_directories(out_dir / "frames");
  reacharena::ReachArena arena(config.env);
  reacharena::TraceWriter trace(out_dir / "trace.csv", config.env.n_links);

  DemoResult result;
  auto& ep = result.episode;
  ep.seed = episode_seed;
  reacharena::Image obs = arena.reset(episode_seed);
  ep.target_kind = arena.target().kind;
  ep.realized_color = arena.state().realized_color_name;
  lc.controller->begin_episode(arena, episode_seed);
  std::vector<reacharena::Image> frames;
  while (!arena.state().done) {
    const auto actions = lc.controller->act(arena, obs);
    auto step = arena.step(actions);
    ep.total_return += step.reward;
    ep.final_info = step.info;
    ep.success = step.info.success;
    trace.write({0, arena.state().step_count, arena.state().joint_angles, actions, step.reward,
                 step.info.rel_dist, step.info.rel_deg, step.done, step.info.success});
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.ppm", arena.state().step_count);
    reacharena::write_ppm(step.observation, out_dir / "frames" / name);
    frames.push_back(step.observation);
    obs = std::move(step.observation);
  }
  ep.steps = arena.state().step_count;
  result.frames = frames.size();

  if (!frames.empty()) {
    const std::size_t h = frames.front().height, w = frames.front().width;
    reacharena::Image strip{h, w * frames.size(), std::vector<float>(h * w * frames.size() * 3)};
    for (std::size_t f = 0; f < frames.size(); ++f) {
      for (std::size_t y = 0; y < h; ++y) {
        std::copy_n(frames[f].pixels.begin() + static_cast<std::ptrdiff_t>(y * w * 3), w * 3,
                    strip.pixels.begin() + static_cast<std::ptrdiff_t>((y * strip.width + f * w) * 3));
      }
    }
    reacharena::write_ppm(strip, out_dir / "strip.ppm");
  }
  out << "target " << reacharena::to_string(ep.target_kind) << " (" << ep.realized_color << "), "
      << ep.steps << " steps, return " << ep.total_return << ", final rel_dist "
      << ep.final_info.rel_dist << " m, rel_deg " << ep.final_info.rel_deg << ", "
      << (ep.success ? "success" : "no success") << '\n';
  return result;
}

void cmd_kg_inspect(const ExperimentConfig& config, std::ostream& out) {
  const auto graph = experiment_graph(config);
  out << "mode: " << kge::to_string(config.kge.mode) << "  (color randomization "
      << (config.env.dr_colors ? "on" : "off") << ")\n";
  out << "graph: " << graph.size() << " triples, " << graph.entities().size() << " entities\n";
  if (config.kge.mode == kge::KgeMode::none) {
    out << "no embedding (kge_dim 0)\n";
    return;
  }
  const auto& perceived = kge::object_type_entities();
  auto selected = kge::select_subgraph(graph, perceived);
  if (config.kge.mode == kge::KgeMode::partial) selected = kge::without_color_triples(selected);
  out << "selected subgraph (" << selected.size() << " triples):\n";
  for (const auto& t : selected.triples()) out << "  " << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  const auto table = experiment_word_vectors(config, graph);
  auto e = kge::scene_embedding_for_mode(graph, config.kge.mode, config.env.dr_colors, table, config.kge_dim());
  out << "sentence: " << e->source_sentence << '\n';
  std::istringstream words(e->source_sentence);
  std::size_t n_words = 0;
  for (std::string w; words >> w;) ++n_words;
  out << "embedding: " << e->values.size() << " values from " << n_words << " words ("
      << std::min(n_words, e->values.size() / kge::kWordDim) << " fit)\n";
  if (!e->unknown_tokens.empty()) {
    out << "unknown tokens:";
    for (const auto& t : e->unknown_tokens) out << ' ' << t;
    out << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-graph-augmented A3C reaching agent"};
  app.require_subcommand(1);
  std::string config_path, checkpoint, out_dir, policy = "network";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::optional<std::size_t> workers;
  std::vector<std::string> run_dirs;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration file")->required();
    sub->add_option("--seed", seed, "global seed (train), evaluation seed (eval, compare) or episode seed (demo)");
    sub->add_option("--out", out_dir, "output directory");
  };
  auto* train = app.add_subcommand("train", "train an agent and write a run directory");
  common(train);
  train->add_option("--steps", steps, "total environment steps")->check(CLI::PositiveNumber);
  train->add_option("--workers", workers, "number of worker threads")->check(CLI::PositiveNumber);
  auto* eval = app.add_subcommand("eval", "post-training evaluation");
  common(eval);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file or run directory");
  eval->add_option("--policy", policy, "network, ik or random");
  auto* compare = app.add_subcommand("compare", "evaluate and compare run directories");
  common(compare);
  compare->add_option("runs", run_dirs, "run directories, baseline first")->required()->expected(2, -1);
  auto* demo = app.add_subcommand("demo", "render one episode to frames and a trace");
  common(demo);
  demo->add_option("--checkpoint", checkpoint, "checkpoint file or run directory");
  demo->add_option("--policy", policy, "network, ik or random");
  auto* inspect = app.add_subcommand("kg-inspect", "print the selected subgraph and sentence");
  common(inspect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    ExperimentConfig config = parse_config(config_path);
    auto resolve_checkpoint = [&]() -> fs::path {
      if (checkpoint.empty()) return {};
      fs::path p(checkpoint);
      return fs::is_directory(p) ? best_checkpoint(p) : p;
    };
    if (train->parsed()) {
      if (seed) {
        config.seed = *seed;
        config.train.seed = *seed;
      }
      if (steps) config.train.total_steps = *steps;
      if (workers) config.train.n_workers = *workers;
      cmd_train(config, out_dir.empty() ? config.output_dir : fs::path(out_dir), out);
    } else if (eval->parsed()) {
      if (seed) config.eval.seed = *seed;
      cmd_eval(config, parse_policy(policy), resolve_checkpoint(), out_dir, out);
    } else if (compare->parsed()) {
      if (seed) config.eval.seed = *seed;
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      cmd_compare(config, dirs, out_dir, out);
    } else if (demo->parsed()) {
      cmd_demo(config, parse_policy(policy), resolve_checkpoint(), seed.value_or(config.eval.seed),
               out_dir.empty() ? fs::path("demo") : fs::path(out_dir), out);
    } else if (inspect->parsed()) {
      cmd_kg_inspect(config, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace kgrl::cli
