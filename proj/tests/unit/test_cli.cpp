#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgrl/a3c/checkpoint.hpp"
#include "kgrl/cli/commands.hpp"
#include "kgrl/cli/config.hpp"

using namespace kgrl::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmallRun = R"([kge]
mode = none
[env]
image_size = 16
[agent]
conv1_channels = 4
conv1_stride = 2
conv2_channels = 4
fc_width = 16
lstm_hidden = 16
[train]
n_workers = 2
total_steps = 5000
interim_interval = 2500
interim_episodes = 3
[eval]
episodes = 5
compare_runs = 3
compare_episodes = 4
)";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("kgrl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "kgrl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const auto c = parse_config_text("[kge]\nmode = none\n");
  CHECK(c.train.gamma == 0.99);
  CHECK(c.train.lambda == 1.0);
  CHECK(c.train.beta == 0.01);
  CHECK(c.train.learning_rate == 1e-4);
  CHECK(c.train.rollout_length == 20);
  CHECK(c.train.grad_clip_norm == 40.0);
  CHECK(c.env.image_size == 64);
  CHECK(c.env.max_steps == 50);
  CHECK(c.agent.kge_dim == 0);
  CHECK(c.eval.dist_threshold == 0.10);
  CHECK(c.eval.deg_threshold == 17.0);

  const auto full = parse_config_text("[kge]\nmode = full\n[env]\ndr_colors = true\nn_links = 3\n");
  CHECK(full.agent.kge_dim == 300);
  CHECK(full.agent.n_joints == 3);
  CHECK(parse_config_text("[kge]\nmode = partial\n").agent.kge_dim == 150);
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error("[env]\nimage_size = 32\n").find("kge.mode") != std::string::npos);
  CHECK(config_error("[kge]\nmode = none\ntarget_dim = 150\n").find("kge.target_dim") != std::string::npos);
  CHECK(config_error("[kge]\nmode = full\ntarget_dim = 0\n").find("kge.target_dim") != std::string::npos);
  CHECK(config_error("[kge]\nmode = none\n[train]\ngammma = 0.9\n").find("unknown key 'train.gammma'") !=
        std::string::npos);
  CHECK(config_error("[kge]\nmode = none\n[train]\ngamma = abc\n").find("train.gamma") != std::string::npos);
  CHECK(config_error("[kge]\nmode = sideways\n").find("kge.mode") != std::string::npos);
  CHECK(config_error("[kge]\nmode = none\nper_episode = true\n").find("kge.per_episode") != std::string::npos);
  CHECK(config_error("[kge]\nmode = none\n[env]\nn_links = 3\nlink_lengths = 0.2,0.2\n").find("env.link_lengths") !=
        std::string::npos);
  CHECK_FALSE(config_error("[kge]\nmode = none\n[train]\ngamma = 1.5\n").empty());
  CHECK_THROWS_AS(parse_config("/nonexistent/kgrl.ini"), ConfigError);
}

TEST_CASE("dumped config parses back to the same values") {
  const auto dir = scratch("dump");
  write_file(dir / "graph.tsv", "mug\thas_color\tred\nmug\tis_a\tcontainer\n");
  const auto c = parse_config(write_file(dir / "c.ini",
      "[kge]\nmode = partial\ngraph = graph.tsv\ntarget_dim = 60\n[env]\nn_links = 3\nimage_size = 32\n"
      "[train]\nlearning_rate = 0.0003\nlock_free = true\n[run]\nseed = 17\n"));
  CHECK(c.kge.graph == dir / "graph.tsv");
  const auto back = parse_config_text(dump_config(c));
  CHECK(back.env.n_links == 3);
  CHECK(back.env.link_lengths == c.env.link_lengths);
  CHECK(back.agent == c.agent);
  CHECK(back.train.learning_rate == 0.0003);
  CHECK(back.train.lock_free);
  CHECK(back.seed == 17);
  CHECK(back.kge.graph == c.kge.graph);
  CHECK(back.kge.target_dim == 60);
  CHECK(dump_config(back) == dump_config(c));
}

TEST_CASE("embedding input follows the config") {
  const auto none = parse_config_text("[kge]\nmode = none\n");
  CHECK(build_kge_input(none).dim() == 0);
  const auto full = parse_config_text("[kge]\nmode = full\nper_episode = true\n[env]\ndr_colors = true\n");
  const auto in = build_kge_input(full);
  CHECK(in.dim() == 300);
  CHECK(in.dynamic());
}

TEST_CASE("train, eval, compare and demo on a small run") {
  const auto dir = scratch("pipeline");
  const auto cfg_path = write_file(dir / "small.ini", kSmallRun);
  const auto config = parse_config(cfg_path);

  std::ostringstream log;
  const auto result = cmd_train(config, dir / "run", log);
  CHECK(result.total_steps >= 5000);
  CHECK(result.eval_log.size() >= 2);
  CHECK(fs::exists(dir / "run" / "config.ini"));
  CHECK(fs::exists(best_checkpoint(dir / "run")));
  CHECK(parse_config(dir / "run" / "config.ini").agent == config.agent);
  CHECK(log.str().find("eval step 2500") != std::string::npos);

  std::ostringstream text;
  const auto report = cmd_eval(config, PolicyKind::network, best_checkpoint(dir / "run"), dir / "eval", text);
  CHECK(report.n_episodes == 5);
  CHECK(fs::exists(dir / "eval" / "report.csv"));
  CHECK(fs::exists(dir / "eval" / "episodes.csv"));
  CHECK(fs::exists(dir / "eval" / "trace.csv"));

  // The same run compared with itself: identical groups.
  const auto cmp = cmd_compare(config, {dir / "run", dir / "run"}, dir / "cmp", text);
  REQUIRE(cmp.rows.size() == 2);
  REQUIRE(cmp.rows[1].anova.has_value());
  CHECK(cmp.rows[1].anova->f == 0.0);
  CHECK(cmp.rows[1].anova->p == 1.0);
  CHECK(fs::exists(dir / "cmp" / "compare.csv"));
  CHECK_THROWS(cmd_compare(config, {dir / "run", dir / "missing"}, dir / "cmp2", text));

  const auto demo = cmd_demo(config, PolicyKind::network, best_checkpoint(dir / "run"), 4, dir / "demo", text);
  CHECK(demo.frames == static_cast<std::size_t>(demo.episode.steps));
  CHECK(fs::exists(dir / "demo" / "strip.ppm"));
}

TEST_CASE("training through the CLI is reproducible with one worker") {
  const auto dir = scratch("repeat");
  std::string text = kSmallRun;
  text.replace(text.find("n_workers = 2"), 13, "n_workers = 1");
  text.replace(text.find("total_steps = 5000"), 18, "total_steps = 1000");
  text.replace(text.find("interim_interval = 2500"), 23, "interim_interval = 500");
  const auto cfg = write_file(dir / "one.ini", text);
  REQUIRE(run_cli({"train", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "9"}) == 0);
  REQUIRE(run_cli({"train", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "9"}) == 0);
  const auto a = kgrl::a3c::read_eval_log(dir / "a" / "eval_log.csv");
  const auto b = kgrl::a3c::read_eval_log(dir / "b" / "eval_log.csv");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].avg_return == b[i].avg_return);
  const auto ca = kgrl::a3c::load_checkpoint(best_checkpoint(dir / "a"));
  const auto cb = kgrl::a3c::load_checkpoint(best_checkpoint(dir / "b"));
  REQUIRE(ca.blocks.size() == cb.blocks.size());
  for (std::size_t i = 0; i < ca.blocks.size(); ++i) CHECK(ca.blocks[i].values == cb.blocks[i].values);
}

TEST_CASE("demo with the scripted oracle stops early") {
  const auto dir = scratch("demo");
  const auto cfg = write_file(dir / "c.ini", "[kge]\nmode = none\n[env]\nimage_size = 32\nsuccess_deg = 180\n");
  std::string out;
  REQUIRE(run_cli({"demo", "--config", cfg.string(), "--policy", "ik", "--seed", "3", "--out", (dir / "d").string()},
                  &out) == 0);
  std::size_t frames = 0;
  for (const auto& e : fs::directory_iterator(dir / "d" / "frames")) frames += e.path().extension() == ".ppm";
  CHECK(frames > 0);
  CHECK(frames < 50);
  CHECK(out.find("success") != std::string::npos);
}

TEST_CASE("exit codes and error lines") {
  const auto dir = scratch("codes");
  const auto good = write_file(dir / "good.ini", "[kge]\nmode = full\n");
  const auto bad = write_file(dir / "bad.ini", "[kge]\nmode = none\n[train]\ngammma = 0.9\n");
  std::string out, err;
  CHECK(run_cli({"--help"}, &out) == 0);
  CHECK(run_cli({}, &out, &err) == 2);
  CHECK(run_cli({"train"}, &out, &err) == 2);
  CHECK(err.rfind("error: ", 0) == 0);
  CHECK(run_cli({"frobnicate"}, &out, &err) == 2);
  CHECK(run_cli({"train", "--config", bad.string(), "--out", (dir / "r").string()}, &out, &err) == 1);
  CHECK(err.find("unknown key 'train.gammma'") != std::string::npos);
  CHECK(std::count(err.begin(), err.end(), '\n') == 1);
  CHECK(run_cli({"eval", "--config", good.string(), "--policy", "network"}, &out, &err) == 1);
  CHECK(run_cli({"compare", "--config", good.string(), (dir / "nope").string()}, &out, &err) == 2);
  CHECK(run_cli({"kg-inspect", "--config", good.string()}, &out, &err) == 0);
  CHECK(out.find("full") != std::string::npos);
}
