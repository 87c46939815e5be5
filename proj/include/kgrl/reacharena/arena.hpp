#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgrl::reacharena {

struct Rgb {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;
  bool operator==(const Rgb&) const = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class TargetKind { mug, bottle, cereal_box };

std::string_view to_string(TargetKind kind);

struct TargetSpec {
  TargetKind kind = TargetKind::mug;
  Rgb base_color;
  std::string base_color_name;
  Rgb dr_alternate_color;
  std::string dr_alternate_color_name;
  Vec2 grasp_offset;               // meters, relative to the object origin
  double grasp_orientation_deg = 0.0;
};

// Mug, bottle and cereal box with their fixed and randomized colors.
std::vector<TargetSpec> default_targets();

// HxWx3 row-major float image in [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;

  Rgb at(std::size_t row, std::size_t col) const;
  bool operator==(const Image&) const = default;
};

struct EnvConfig {
  std::size_t n_links = 2;
  std::vector<double> link_lengths{0.25, 0.20};
  std::vector<double> joint_lower{-3.141592653589793, -2.6};
  std::vector<double> joint_upper{3.141592653589793, 2.6};
  double mpi = 0.15;  // maximum position increment, radians
  double x_min = 0.15, x_max = 0.35;
  double y_min = -0.125, y_max = 0.125;
  std::size_t image_size = 64;
  bool dr_colors = false;
  Rgb arm_color{0.95f, 0.95f, 0.95f};
  double success_dist = 0.05;  // meters
  double success_deg = 15.0;   // degrees
  int max_steps = 50;
  // Square camera window (world meters) seen by the top-down camera.
  double view_center_x = 0.2, view_center_y = 0.0, view_half_extent = 0.25;
  double link_width = 0.025;
  std::vector<TargetSpec> targets = default_targets();

  // Desk-scale defaults for a 2- or 3-link arm.
  static EnvConfig planar(std::size_t n_links);

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct EnvState {
  std::vector<double> joint_angles;
  std::size_t target_index = 0;
  Vec2 target_position;
  Rgb realized_color;
  std::string realized_color_name;
  int step_count = 0;
  bool done = false;
};

struct StepInfo {
  double rel_dist = 0.0;  // meters
  double rel_deg = 0.0;   // degrees in [0, 180]
  bool success = false;
};

struct StepOutcome {
  Image observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct Pose {
  Vec2 position;
  double heading_deg = 0.0;
};

// Fixed ordering [-MPI, -MPI/10, -MPI/100, 0, +MPI/100, +MPI/10, +MPI].
inline constexpr int kActionsPerJoint = 7;
double action_decode(int index, double mpi);

// Absolute heading difference wrapped to [0, 180] degrees.
double rel_deg(double heading_a_deg, double heading_b_deg);

// -2 * rel_dist^2 - rel_deg / 70, or 100 on success.
double step_reward(double rel_dist, double rel_deg, bool success);

Pose forward_kinematics(std::span<const double> link_lengths, std::span<const double> joints);

// Planar n-link arm reaching one of three colored objects, observed only
// through a rendered top-down RGB image.
class ReachArena {
 public:
  explicit ReachArena(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }
  const TargetSpec& target() const { return config_.targets[state_.target_index]; }

  Image reset(std::uint64_t seed);
  StepOutcome step(std::span<const int> actions);
  Image render() const;

  // Overrides the episode state (evaluation replays, tests). Joint angles
  // are clamped to the working range.
  void set_state(EnvState state);

  Pose end_effector() const;
  Vec2 grasp_point() const;
  StepInfo relative_pose() const;

 private:
  EnvConfig config_;
  EnvState state_;
};

}  // namespace kgrl::reacharena
