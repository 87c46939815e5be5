#include "kgrl/a3c/trainer.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kgrl/a3c/advantage.hpp"
#include "kgrl/a3c/checkpoint.hpp"
#include "kgrl/a3c/losses.hpp"
#include "kgrl/autodiff/ops.hpp"
#include "kgrl/policy/actions.hpp"

namespace kgrl::a3c {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string checkpoint_name(std::int64_t step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "step_%09lld.kgck", static_cast<long long>(step));
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("train." + field + " " + why);
  };
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma", "must lie in (0, 1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) fail("lambda", "must lie in (0, 1]");
  if (!(beta >= 0.0)) fail("beta", "must be nonnegative");
  if (!(learning_rate > 0.0)) fail("learning_rate", "must be positive");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) fail("rmsprop_decay", "must lie in (0, 1)");
  if (!(rmsprop_epsilon > 0.0)) fail("rmsprop_epsilon", "must be positive");
  if (n_workers == 0) fail("n_workers", "must be at least 1");
  if (total_steps <= 0) fail("total_steps", "must be positive");
  if (rollout_length == 0) fail("rollout_length", "must be at least 1");
  if (interim_interval <= 0) fail("interim_interval", "must be positive");
  if (interim_episodes == 0) fail("interim_episodes", "must be at least 1");
  if (!(grad_clip_norm > 0.0)) fail("grad_clip_norm", "must be positive");
}

std::size_t select_best(std::span<const EvalLogEntry> log) {
  if (log.empty()) throw std::invalid_argument("select_best: the evaluation log is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    const auto& a = log[i];
    const auto& b = log[best];
    if (a.avg_return > b.avg_return || (a.avg_return == b.avg_return && a.step < b.step)) best = i;
  }
  return best;
}

void write_eval_log(std::span<const EvalLogEntry> log, const std::filesystem::path& path) {
  std::ostringstream os;
  os.precision(17);
  os << "step,avg_return,success_rate,checkpoint_path\n";
  for (const auto& e : log) {
    os << e.step << ',' << e.avg_return << ',' << e.success_rate << ',' << e.checkpoint_path << '\n';
  }
  write_text_atomic(path, os.str());
}

std::vector<EvalLogEntry> read_eval_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open evaluation log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,avg_return,success_rate,checkpoint_path") {
    throw std::runtime_error(path.string() + ": unexpected evaluation log header");
  }
  std::vector<EvalLogEntry> log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string step, ret, rate;
    EvalLogEntry e;
    if (!std::getline(row, step, ',') || !std::getline(row, ret, ',') ||
        !std::getline(row, rate, ',')) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": too few fields");
    }
    std::getline(row, e.checkpoint_path);
    try {
      e.step = std::stoll(step);
      e.avg_return = std::stod(ret);
      e.success_rate = std::stod(rate);
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    log.push_back(std::move(e));
  }
  return log;
}

std::vector<std::uint64_t> interim_seeds(std::uint64_t run_seed, std::size_t n) {
  std::vector<std::uint64_t> seeds(n);
  std::uint64_t s = splitmix64(run_seed ^ 0xE7A1'5EED'0000'0040ULL);
  for (auto& seed : seeds) {
    seed = s;
    s = splitmix64(s);
  }
  return seeds;
}

InterimResult interim_evaluate(const policy::PolicyNetwork<float>& network,
                               const reacharena::EnvConfig& env, const KgeInput& kge,
                               std::span<const std::uint64_t> seeds, ActionMode mode) {
  reacharena::ReachArena arena(env);
  NetworkController controller(network, kge, mode);
  InterimResult r;
  for (std::uint64_t seed : seeds) {
    auto ep = reacharena::run_episode(arena, controller, seed);
    r.avg_return += ep.total_return;
    r.success_rate += ep.success ? 1.0 : 0.0;
    ++r.episodes;
  }
  if (r.episodes) {
    r.avg_return /= static_cast<double>(r.episodes);
    r.success_rate /= static_cast<double>(r.episodes);
  }
  return r;
}

std::uint64_t worker_seed(std::uint64_t run_seed, std::size_t worker_id) {
  return splitmix64(splitmix64(run_seed) + 0x1000 * (worker_id + 1));
}

void worker_loop(std::size_t worker_id, reacharena::ReachArena& env, SharedParameters& shared,
                 const KgeInput& kge, const TrainConfig& config,
                 const std::function<void(std::int64_t)>& on_boundary,
                 const std::atomic<bool>& stop) {
  using autodiff::Tensor;
  if (kge.dim() != shared.agent().kge_dim) {
    throw std::invalid_argument("worker: embedding width " + std::to_string(kge.dim()) +
                                " does not match agent kge_dim " +
                                std::to_string(shared.agent().kge_dim));
  }
  policy::PolicyNetwork<float> local(shared.agent(), 0);
  std::mt19937_64 rng(worker_seed(config.seed, worker_id));

  reacharena::Image obs = env.reset(rng());
  std::span<const float> embedding = kge.for_episode(env.state(), env.config());
  policy::RecurrentState<float> state = local.initial_state();

  std::vector<Tensor<float>> log_probs, entropies, values;
  std::vector<double> rewards, value_estimates;
  while (!stop.load(std::memory_order_relaxed) && shared.steps() < config.total_steps) {
    shared.copy_to(local);
    state = state.detached();
    log_probs.clear();
    entropies.clear();
    values.clear();
    rewards.clear();
    value_estimates.clear();

    bool terminal = false;
    for (std::size_t t = 0; t < config.rollout_length; ++t) {
      auto fr = local.forward(obs.pixels, embedding, state);
      const auto sample = policy::sample_actions(fr.output.probabilities, rng);
      auto terms = policy::action_terms(fr.output, std::span<const int>(sample.indices));
      reacharena::StepOutcome out = env.step(sample.indices);
      log_probs.push_back(terms.log_prob);
      entropies.push_back(terms.entropy);
      values.push_back(fr.output.value);
      value_estimates.push_back(fr.output.value.item());
      rewards.push_back(out.reward);
      state = fr.state;
      obs = std::move(out.observation);
      if (out.done) {
        terminal = true;
        break;
      }
    }

    double bootstrap = 0.0;
    if (!terminal) bootstrap = local.forward(obs.pixels, embedding, state).output.value.item();
    const auto advantages = compute_gae(rewards, value_estimates, bootstrap, config.gamma, config.lambda);
    const auto returns = n_step_returns(rewards, bootstrap, config.gamma);

    auto loss = autodiff::add(
        policy_loss<float>(log_probs, std::span<const double>(advantages), entropies, config.beta),
        value_loss<float>(returns, values));
    local.zero_grad();
    autodiff::backward(loss);
    auto grads = local.grad_blocks();
    autodiff::clip_global_norm<float>(grads, config.grad_clip_norm);
    std::vector<std::span<const float>> const_grads(grads.begin(), grads.end());
    shared.apply(const_grads);

    const auto n = static_cast<std::int64_t>(rewards.size());
    const std::int64_t after = shared.advance(n);
    const std::int64_t before = after - n;
    for (std::int64_t k = before / config.interim_interval + 1;
         k * config.interim_interval <= after; ++k) {
      if (on_boundary) on_boundary(k * config.interim_interval);
    }

    if (terminal) {
      obs = env.reset(rng());
      embedding = kge.for_episode(env.state(), env.config());
      state = local.initial_state();
    }
  }
}

namespace {

struct EvalJob {
  std::int64_t step;
  std::vector<std::vector<float>> parameters;
};

class Evaluator {
 public:
  Evaluator(const policy::AgentConfig& agent, const reacharena::EnvConfig& env, const KgeInput& kge,
            const TrainConfig& config, std::filesystem::path run_dir, const TrainHooks& hooks,
            std::atomic<bool>& stop)
      : agent_(agent), env_(env), kge_(kge), config_(config), run_dir_(std::move(run_dir)),
        hooks_(hooks), stop_(stop), seeds_(interim_seeds(config.seed, config.interim_episodes)),
        network_(agent, 0) {
    if (!run_dir_.empty()) std::filesystem::create_directories(run_dir_ / "checkpoints");
    thread_ = std::thread([this] { run(); });
  }

  ~Evaluator() { finish(); }

  void submit(EvalJob job) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(job));
    }
    cv_.notify_one();
  }

  void finish() {
    {
      std::lock_guard lock(mutex_);
      closing_ = true;
    }
    cv_.notify_one();
    if (thread_.joinable()) thread_.join();
  }

  std::vector<EvalLogEntry> log() const {
    std::lock_guard lock(mutex_);
    return log_;
  }
  std::optional<std::int64_t> last_step() const {
    std::lock_guard lock(mutex_);
    return last_submitted_;
  }
  void note_submitted(std::int64_t step) {
    std::lock_guard lock(mutex_);
    last_submitted_ = std::max(last_submitted_.value_or(step), step);
  }
  std::exception_ptr error() const { return error_; }

 private:
  void run() {
    for (;;) {
      EvalJob job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return closing_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      if (error_) continue;
      try {
        evaluate(job);
      } catch (...) {
        error_ = std::current_exception();
        stop_.store(true);
      }
    }
  }

  void evaluate(const EvalJob& job) {
    network_.assign<float>(job.parameters);
    const InterimResult r = interim_evaluate(network_, env_, kge_, seeds_, config_.eval_action_mode);
    EvalLogEntry entry{job.step, r.avg_return, r.success_rate, {}};
    if (!run_dir_.empty()) {
      const auto rel = std::filesystem::path("checkpoints") / checkpoint_name(job.step);
      save_checkpoint(make_checkpoint(network_, job.step), run_dir_ / rel);
      entry.checkpoint_path = rel.generic_string();
    }
    std::vector<EvalLogEntry> snapshot;
    {
      std::lock_guard lock(mutex_);
      log_.push_back(entry);
      std::sort(log_.begin(), log_.end(),
                [](const EvalLogEntry& a, const EvalLogEntry& b) { return a.step < b.step; });
      snapshot = log_;
    }
    if (!run_dir_.empty()) {
      write_eval_log(snapshot, run_dir_ / "eval_log.csv");
      const auto& best = snapshot[select_best(snapshot)];
      write_text_atomic(run_dir_ / "best.txt", best.checkpoint_path + "\n");
    }
    if (hooks_.on_evaluation && !hooks_.on_evaluation(entry)) stop_.store(true);
  }

  policy::AgentConfig agent_;
  reacharena::EnvConfig env_;
  const KgeInput& kge_;
  TrainConfig config_;
  std::filesystem::path run_dir_;
  const TrainHooks& hooks_;
  std::atomic<bool>& stop_;
  std::vector<std::uint64_t> seeds_;
  policy::PolicyNetwork<float> network_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<EvalJob> queue_;
  bool closing_ = false;
  std::vector<EvalLogEntry> log_;
  std::optional<std::int64_t> last_submitted_;
  std::exception_ptr error_;
  std::thread thread_;
};

}  // namespace

TrainResult train(const policy::AgentConfig& agent, const reacharena::EnvConfig& env,
                  const KgeInput& kge, const TrainConfig& config,
                  const std::filesystem::path& run_dir, const TrainHooks& hooks) {
  config.validate();
  agent.validate();
  env.validate();
  if (agent.image_size != env.image_size) {
    throw std::invalid_argument("agent.image_size " + std::to_string(agent.image_size) +
                                " differs from env.image_size " + std::to_string(env.image_size));
  }
  if (agent.n_joints != env.n_links) {
    throw std::invalid_argument("agent.n_joints " + std::to_string(agent.n_joints) +
                                " differs from env.n_links " + std::to_string(env.n_links));
  }
  if (kge.dim() != agent.kge_dim) {
    throw std::invalid_argument("embedding width " + std::to_string(kge.dim()) +
                                " differs from agent.kge_dim " + std::to_string(agent.kge_dim));
  }

  policy::PolicyNetwork<float> initial(agent, config.seed);
  SharedParameters shared(initial, config.rmsprop(), config.lock_free);
  std::atomic<bool> stop{false};
  Evaluator evaluator(agent, env, kge, config, run_dir, hooks, stop);

  auto on_boundary = [&](std::int64_t step) {
    evaluator.note_submitted(step);
    evaluator.submit({step, shared.snapshot()});
  };

  std::vector<std::exception_ptr> errors(config.n_workers);
  auto body = [&](std::size_t id) {
    try {
      reacharena::ReachArena arena(env);
      worker_loop(id, arena, shared, kge, config, on_boundary, stop);
    } catch (const std::exception& e) {
      errors[id] = std::make_exception_ptr(
          std::runtime_error("worker " + std::to_string(id) + ": " + e.what()));
      stop.store(true);
    } catch (...) {
      errors[id] = std::current_exception();
      stop.store(true);
    }
  };
  if (config.n_workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t id = 0; id < config.n_workers; ++id) threads.emplace_back(body, id);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      evaluator.finish();
      std::rethrow_exception(e);
    }
  }

  const std::int64_t total = shared.steps();
  const auto last = evaluator.last_step();
  if (!last || *last < total) {
    if (!evaluator.error()) evaluator.submit({total, shared.snapshot()});
  }
  evaluator.finish();
  if (evaluator.error()) std::rethrow_exception(evaluator.error());

  TrainResult result;
  result.eval_log = evaluator.log();
  result.best_index = select_best(result.eval_log);
  result.total_steps = total;
  result.final_parameters = shared.snapshot();
  return result;
}

}  // namespace kgrl::a3c
