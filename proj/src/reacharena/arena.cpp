#include "kgrl/reacharena/arena.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kgrl::reacharena {

namespace {

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::mug: return "mug";
    case TargetKind::bottle: return "bottle";
    case TargetKind::cereal_box: return "cereal_box";
  }
  return "mug";
}

std::vector<TargetSpec> default_targets() {
  return {
      {TargetKind::mug, {1.0f, 0.0f, 0.0f}, "red", {0.0f, 0.0f, 1.0f}, "blue", {0.045, 0.0}, 45.0},
      {TargetKind::bottle, {1.0f, 1.0f, 0.0f}, "yellow", {0.4f, 0.0f, 0.9f}, "purple", {0.0, 0.05},
       90.0},
      {TargetKind::cereal_box, {0.55f, 0.27f, 0.07f}, "brown", {0.5f, 0.7f, 0.9f}, "light_blue",
       {0.04, 0.01}, 0.0},
  };
}

Rgb Image::at(std::size_t row, std::size_t col) const {
  const std::size_t i = (row * width + col) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

EnvConfig EnvConfig::planar(std::size_t n_links) {
  EnvConfig c;
  c.n_links = n_links;
  if (n_links == 2) return c;
  if (n_links == 3) {
    c.link_lengths = {0.22, 0.18, 0.07};
    c.joint_lower = {-std::numbers::pi, -2.6, -std::numbers::pi};
    c.joint_upper = {std::numbers::pi, 2.6, std::numbers::pi};
    return c;
  }
  throw std::invalid_argument("planar presets exist for 2 or 3 links");
}

void EnvConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("env." + what); };
  if (n_links < 2) fail("n_links must be at least 2");
  if (link_lengths.size() != n_links) fail("link_lengths must have n_links entries");
  if (joint_lower.size() != n_links || joint_upper.size() != n_links) {
    fail("joint_lower/joint_upper must have n_links entries");
  }
  for (std::size_t j = 0; j < n_links; ++j) {
    if (!(link_lengths[j] > 0.0)) fail("link_lengths entries must be positive");
    if (!(joint_lower[j] < joint_upper[j])) fail("joint_lower must be below joint_upper");
  }
  if (!(mpi > 0.0)) fail("mpi must be positive");
  if (!(x_min < x_max) || !(y_min < y_max)) fail("workspace rectangle is empty");
  if (image_size == 0) fail("image_size must be positive");
  if (!(success_dist > 0.0) || !(success_deg > 0.0)) fail("success thresholds must be positive");
  if (max_steps <= 0) fail("max_steps must be positive");
  if (!(view_half_extent > 0.0)) fail("view_half_extent must be positive");
  if (targets.empty()) fail("targets must not be empty");
  for (const auto& t : targets) {
    for (const Rgb& c : {t.base_color, t.dr_alternate_color}) {
      for (float v : {c.r, c.g, c.b}) {
        if (v < 0.0f || v > 1.0f) fail("target colors must lie in [0, 1]");
      }
    }
  }

  double total = 0.0, longest = 0.0;
  for (double l : link_lengths) {
    total += l;
    longest = std::max(longest, l);
  }
  const double inner = std::max(0.0, 2.0 * longest - total);
  const double far_x = std::max(std::abs(x_min), std::abs(x_max));
  const double far_y = std::max(std::abs(y_min), std::abs(y_max));
  const double near_x = (x_min <= 0.0 && x_max >= 0.0) ? 0.0 : std::min(std::abs(x_min), std::abs(x_max));
  const double near_y = (y_min <= 0.0 && y_max >= 0.0) ? 0.0 : std::min(std::abs(y_min), std::abs(y_max));
  if (std::hypot(far_x, far_y) > total || std::hypot(near_x, near_y) < inner) {
    fail("workspace rectangle must lie inside the arm's reachable annulus");
  }
}

double action_decode(int index, double mpi) {
  static constexpr double kScale[kActionsPerJoint] = {-1.0, -0.1, -0.01, 0.0, 0.01, 0.1, 1.0};
  if (index < 0 || index >= kActionsPerJoint) {
    throw std::out_of_range("action index " + std::to_string(index) + " outside [0, 7)");
  }
  return kScale[index] * mpi;
}

double rel_deg(double heading_a_deg, double heading_b_deg) {
  double d = std::fmod(heading_a_deg - heading_b_deg, 360.0);
  if (d < 0.0) d += 360.0;
  return d > 180.0 ? 360.0 - d : d;
}

double step_reward(double rel_dist, double rel_deg_value, bool success) {
  if (success) return 100.0;
  return -2.0 * rel_dist * rel_dist - rel_deg_value / 70.0;
}

Pose forward_kinematics(std::span<const double> link_lengths, std::span<const double> joints) {
  Pose pose;
  double angle = 0.0;
  for (std::size_t j = 0; j < link_lengths.size(); ++j) {
    angle += joints[j];
    pose.position.x += link_lengths[j] * std::cos(angle);
    pose.position.y += link_lengths[j] * std::sin(angle);
  }
  pose.heading_deg = angle * 180.0 / std::numbers::pi;
  return pose;
}

ReachArena::ReachArena(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  state_.joint_angles.assign(config_.n_links, 0.0);
  state_.target_position = {(config_.x_min + config_.x_max) / 2, (config_.y_min + config_.y_max) / 2};
  state_.realized_color = config_.targets[0].base_color;
  state_.realized_color_name = config_.targets[0].base_color_name;
}

Image ReachArena::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EnvState s;
  const std::size_t n_targets = config_.targets.size();
  s.target_index = std::min(n_targets - 1, static_cast<std::size_t>(uniform_unit(rng) * n_targets));
  s.target_position = {uniform(rng, config_.x_min, config_.x_max),
                       uniform(rng, config_.y_min, config_.y_max)};
  const TargetSpec& t = config_.targets[s.target_index];
  s.realized_color = t.base_color;
  s.realized_color_name = t.base_color_name;
  if (config_.dr_colors && uniform_unit(rng) >= 0.5) {
    s.realized_color = t.dr_alternate_color;
    s.realized_color_name = t.dr_alternate_color_name;
  }
  s.joint_angles.assign(config_.n_links, 0.0);
  for (std::size_t j = 0; j < std::min<std::size_t>(2, config_.n_links); ++j) {
    s.joint_angles[j] = uniform(rng, 0.15 * config_.joint_lower[j], 0.15 * config_.joint_upper[j]);
  }
  set_state(std::move(s));
  return render();
}

void ReachArena::set_state(EnvState state) {
  if (state.joint_angles.size() != config_.n_links) {
    throw std::invalid_argument("state has the wrong number of joints");
  }
  if (state.target_index >= config_.targets.size()) throw std::invalid_argument("bad target index");
  for (std::size_t j = 0; j < config_.n_links; ++j) {
    state.joint_angles[j] = std::clamp(state.joint_angles[j], config_.joint_lower[j], config_.joint_upper[j]);
  }
  state_ = std::move(state);
}

Pose ReachArena::end_effector() const {
  return forward_kinematics(config_.link_lengths, state_.joint_angles);
}

Vec2 ReachArena::grasp_point() const {
  const TargetSpec& t = target();
  return {state_.target_position.x + t.grasp_offset.x, state_.target_position.y + t.grasp_offset.y};
}

StepInfo ReachArena::relative_pose() const {
  const Pose ee = end_effector();
  const Vec2 g = grasp_point();
  StepInfo info;
  info.rel_dist = std::hypot(ee.position.x - g.x, ee.position.y - g.y);
  info.rel_deg = rel_deg(ee.heading_deg, target().grasp_orientation_deg);
  info.success = info.rel_dist < config_.success_dist && info.rel_deg < config_.success_deg;
  return info;
}

StepOutcome ReachArena::step(std::span<const int> actions) {
  if (state_.done) throw std::logic_error("step called on a finished episode; call reset first");
  if (actions.size() != config_.n_links) {
    throw std::invalid_argument("expected " + std::to_string(config_.n_links) + " action indices, got " +
                                std::to_string(actions.size()));
  }
  std::vector<double> deltas(actions.size());
  for (std::size_t j = 0; j < actions.size(); ++j) deltas[j] = action_decode(actions[j], config_.mpi);
  for (std::size_t j = 0; j < actions.size(); ++j) {
    state_.joint_angles[j] = std::clamp(state_.joint_angles[j] + deltas[j], config_.joint_lower[j],
                                        config_.joint_upper[j]);
  }
  ++state_.step_count;

  StepOutcome out;
  out.info = relative_pose();
  out.reward = step_reward(out.info.rel_dist, out.info.rel_deg, out.info.success);
  out.done = out.info.success || state_.step_count >= config_.max_steps;
  state_.done = out.done;
  out.observation = render();
  return out;
}

}  // namespace kgrl::reacharena
