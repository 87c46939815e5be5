#include <algorithm>
#include <cmath>

#include "kgrl/reacharena/arena.hpp"

namespace kgrl::reacharena {

namespace {

constexpr Rgb kBackground{0.5f, 0.5f, 0.5f};

struct Box {  // axis-aligned, centered
  double cx, cy, half_w, half_h;
  bool contains(double x, double y) const {
    return std::abs(x - cx) <= half_w && std::abs(y - cy) <= half_h;
  }
};

struct Bar {  // segment a->b swept by +-half_width, flat ends
  double ax, ay, bx, by, half_width;
  bool contains(double x, double y) const {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    const double t = ((x - ax) * dx + (y - ay) * dy) / len2;
    if (t < 0.0 || t > 1.0) return false;
    const double px = ax + t * dx - x, py = ay + t * dy - y;
    return px * px + py * py <= half_width * half_width;
  }
};

bool inside_target(TargetKind kind, double x, double y) {
  switch (kind) {
    case TargetKind::mug:
      return x * x + y * y <= 0.03 * 0.03 || Box{0.035, 0.0, 0.012, 0.008}.contains(x, y);
    case TargetKind::bottle:
      return Box{0.0, 0.0, 0.015, 0.04}.contains(x, y) || Box{0.0, 0.045, 0.009, 0.006}.contains(x, y);
    case TargetKind::cereal_box:
      return Box{0.0, 0.0, 0.04, 0.025}.contains(x, y);
  }
  return false;
}

}  // namespace

Image ReachArena::render() const {
  const std::size_t n = config_.image_size;
  Image img{n, n, std::vector<float>(n * n * 3)};
  const double extent = 2.0 * config_.view_half_extent;
  const double left = config_.view_center_x - config_.view_half_extent;
  const double top = config_.view_center_y + config_.view_half_extent;

  std::vector<Bar> links;
  double angle = 0.0, x = 0.0, y = 0.0;
  for (std::size_t j = 0; j < config_.n_links; ++j) {
    angle += state_.joint_angles[j];
    const double nx = x + config_.link_lengths[j] * std::cos(angle);
    const double ny = y + config_.link_lengths[j] * std::sin(angle);
    links.push_back({x, y, nx, ny, config_.link_width / 2});
    x = nx;
    y = ny;
  }
  const TargetKind kind = target().kind;
  const Vec2 origin = state_.target_position;

  for (std::size_t row = 0; row < n; ++row) {
    const double wy = top - (static_cast<double>(row) + 0.5) * extent / static_cast<double>(n);
    for (std::size_t col = 0; col < n; ++col) {
      const double wx = left + (static_cast<double>(col) + 0.5) * extent / static_cast<double>(n);
      Rgb c = kBackground;
      if (inside_target(kind, wx - origin.x, wy - origin.y)) c = state_.realized_color;
      for (const Bar& link : links) {
        if (link.contains(wx, wy)) {
          c = config_.arm_color;
          break;
        }
      }
      float* px = img.pixels.data() + (row * n + col) * 3;
      px[0] = c.r;
      px[1] = c.g;
      px[2] = c.b;
    }
  }
  return img;
}

}  // namespace kgrl::reacharena
