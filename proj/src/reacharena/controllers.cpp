#include "kgrl/reacharena/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kgrl::reacharena {

namespace {

double wrap_pi(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

}  // namespace

std::optional<std::vector<double>> planar_ik(const EnvConfig& config, Vec2 target,
                                             double heading_deg,
                                             const std::vector<double>& current) {
  if (config.n_links != 2 && config.n_links != 3) {
    throw std::invalid_argument("planar_ik supports 2- or 3-link arms");
  }
  const double heading = heading_deg * std::numbers::pi / 180.0;
  Vec2 wrist = target;
  if (config.n_links == 3) {
    wrist.x -= config.link_lengths[2] * std::cos(heading);
    wrist.y -= config.link_lengths[2] * std::sin(heading);
  }
  const double l1 = config.link_lengths[0], l2 = config.link_lengths[1];
  const double r2 = wrist.x * wrist.x + wrist.y * wrist.y;
  const double cos_elbow = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (cos_elbow < -1.0 - 1e-9 || cos_elbow > 1.0 + 1e-9) return std::nullopt;
  const double elbow = std::acos(std::clamp(cos_elbow, -1.0, 1.0));

  std::optional<std::vector<double>> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double q2 : {elbow, -elbow}) {
    const double q1 =
        wrap_pi(std::atan2(wrist.y, wrist.x) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2)));
    std::vector<double> q{q1, q2};
    if (config.n_links == 3) q.push_back(wrap_pi(heading - q1 - q2));
    bool ok = true;
    double cost = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (q[j] < config.joint_lower[j] || q[j] > config.joint_upper[j]) ok = false;
      if (j < current.size()) cost += std::abs(q[j] - current[j]);
    }
    if (ok && cost < best_cost) {
      best_cost = cost;
      best = std::move(q);
    }
  }
  return best;
}

std::vector<int> IkController::act(const ReachArena& env, const Image&) {
  const auto& config = env.config();
  const auto& q = env.state().joint_angles;
  auto goal = planar_ik(config, env.grasp_point(), env.target().grasp_orientation_deg, q);
  std::vector<int> actions(config.n_links, 3);
  if (!goal) return actions;
  for (std::size_t j = 0; j < config.n_links; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kActionsPerJoint; ++a) {
      const double next = std::clamp(q[j] + action_decode(a, config.mpi), config.joint_lower[j],
                                     config.joint_upper[j]);
      const double err = std::abs(next - (*goal)[j]);
      if (err < best) {
        best = err;
        actions[j] = a;
      }
    }
  }
  return actions;
}

void RandomController::begin_episode(const ReachArena&, std::uint64_t episode_seed) {
  rng_.seed(episode_seed ^ 0x5DEECE66DULL);
}

std::vector<int> RandomController::act(const ReachArena& env, const Image&) {
  std::vector<int> actions(env.config().n_links);
  for (int& a : actions) a = static_cast<int>(rng_() % kActionsPerJoint);
  return actions;
}

EpisodeResult run_episode(ReachArena& env, Controller& controller, std::uint64_t seed,
                          bool record_trace, std::size_t episode_index) {
  EpisodeResult result;
  result.seed = seed;
  Image obs = env.reset(seed);
  result.target_kind = env.target().kind;
  result.realized_color = env.state().realized_color_name;
  result.final_info = env.relative_pose();
  controller.begin_episode(env, seed);
  while (!env.state().done) {
    const std::vector<int> actions = controller.act(env, obs);
    StepOutcome out = env.step(actions);
    result.total_return += out.reward;
    result.final_info = out.info;
    result.success = out.info.success;
    if (record_trace) {
      result.trace.push_back({episode_index, env.state().step_count, env.state().joint_angles,
                              actions, out.reward, out.info.rel_dist, out.info.rel_deg, out.done,
                              out.info.success});
    }
    obs = std::move(out.observation);
  }
  result.steps = env.state().step_count;
  return result;
}

}  // namespace kgrl::reacharena
