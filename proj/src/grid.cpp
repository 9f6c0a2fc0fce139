#include "swarmloc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace swarmloc::sim {

OccupancyGrid::OccupancyGrid(const Eigen::Vector2d& origin, double resolution,
                             int nx, int ny)
    : origin_(origin), res_(resolution), nx_(nx), ny_(ny) {
  if (resolution <= 0.0) throw std::invalid_argument("grid resolution <= 0");
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid dims must be >= 1");
  cells_.assign(static_cast<std::size_t>(nx) * ny, 0);
}

bool OccupancyGrid::world_to_cell(const Eigen::Vector2d& p, int& cx,
                                  int& cy) const {
  if (empty()) return false;
  cx = static_cast<int>(std::floor((p.x() - origin_.x()) / res_));
  cy = static_cast<int>(std::floor((p.y() - origin_.y()) / res_));
  return cx >= 0 && cx < nx_ && cy >= 0 && cy < ny_;
}

void OccupancyGrid::set_occupied(int cx, int cy, bool occ) {
  if (cx < 0 || cx >= nx_ || cy < 0 || cy >= ny_)
    throw std::invalid_argument("cell index outside grid");
  cells_[static_cast<std::size_t>(cy) * nx_ + cx] = occ ? 1 : 0;
}

void OccupancyGrid::mark_rect(const Eigen::Vector2d& lo,
                              const Eigen::Vector2d& hi) {
  if (empty()) throw std::invalid_argument("mark_rect on empty grid");
  if (lo.x() > hi.x() || lo.y() > hi.y())
    throw std::invalid_argument("rect lo > hi");
  int x0 = static_cast<int>(std::floor((lo.x() - origin_.x()) / res_));
  int y0 = static_cast<int>(std::floor((lo.y() - origin_.y()) / res_));
  int x1 = static_cast<int>(std::floor((hi.x() - origin_.x()) / res_));
  int y1 = static_cast<int>(std::floor((hi.y() - origin_.y()) / res_));
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, nx_ - 1);
  y1 = std::min(y1, ny_ - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) set_occupied(x, y);
}

bool OccupancyGrid::occupied(int cx, int cy) const {
  if (cx < 0 || cx >= nx_ || cy < 0 || cy >= ny_) return false;
  return cells_[static_cast<std::size_t>(cy) * nx_ + cx] != 0;
}

bool OccupancyGrid::occupied_world(const Eigen::Vector2d& p) const {
  int cx, cy;
  if (!world_to_cell(p, cx, cy)) return false;
  return occupied(cx, cy);
}

Aabb2 OccupancyGrid::bounds() const {
  Aabb2 b;
  b.lo = origin_;
  b.hi = origin_ + Eigen::Vector2d(nx_ * res_, ny_ * res_);
  return b;
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(
      std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

namespace {

constexpr double kCornerTol = 1e-12;

// closed-interval sweep of one row (or column) in cell units, endpoints on
// boundaries included on both sides
bool scan_axis(const OccupancyGrid& g, double u0, double u1, int fixed,
               bool row) {
  if (u1 < u0) std::swap(u0, u1);
  int c0 = static_cast<int>(std::floor(u0));
  int c1 = static_cast<int>(std::floor(u1));
  if (u0 == std::floor(u0)) c0 -= 1;  // start touches the previous cell's edge
  for (int c = c0; c <= c1; ++c) {
    bool occ = row ? g.occupied(c, fixed) : g.occupied(fixed, c);
    if (occ) return true;
  }
  return false;
}

}  // namespace

bool OccupancyGrid::segment_blocked(const Eigen::Vector2d& a,
                                    const Eigen::Vector2d& b) const {
  if (empty()) return false;

  // work in cell units, boundaries at integers
  const double ax = (a.x() - origin_.x()) / res_;
  const double ay = (a.y() - origin_.y()) / res_;
  const double bx = (b.x() - origin_.x()) / res_;
  const double by = (b.y() - origin_.y()) / res_;
  const double dx = bx - ax, dy = by - ay;

  const bool on_col = ax == std::floor(ax);
  const bool on_row = ay == std::floor(ay);

  if (dx == 0.0 && dy == 0.0) {
    // zero-length segment: every cell whose closure contains the point
    const int cx = static_cast<int>(std::floor(ax));
    const int cy = static_cast<int>(std::floor(ay));
    if (occupied(cx, cy)) return true;
    if (on_col && occupied(cx - 1, cy)) return true;
    if (on_row && occupied(cx, cy - 1)) return true;
    if (on_col && on_row && occupied(cx - 1, cy - 1)) return true;
    return false;
  }
  if (dy == 0.0 && on_row) {
    // runs along a horizontal grid line: touches the rows on both sides
    const int cy = static_cast<int>(std::floor(ay));
    return scan_axis(*this, ax, bx, cy, true) ||
           scan_axis(*this, ax, bx, cy - 1, true);
  }
  if (dx == 0.0 && on_col) {
    const int cx = static_cast<int>(std::floor(ax));
    return scan_axis(*this, ay, by, cx, false) ||
           scan_axis(*this, ay, by, cx - 1, false);
  }

  // grid traversal; at an exact corner crossing both cells sharing the
  // corner are checked before stepping diagonally
  int cx = static_cast<int>(std::floor(ax));
  int cy = static_cast<int>(std::floor(ay));
  if (occupied(cx, cy)) return true;

  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double t_delta_x = step_x ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = step_y ? 1.0 / std::abs(dy) : inf;
  double t_max_x = inf, t_max_y = inf;
  if (step_x > 0)
    t_max_x = (std::floor(ax) + 1.0 - ax) / dx;
  else if (step_x < 0)
    t_max_x = (ax - std::floor(ax)) / -dx;
  if (step_y > 0)
    t_max_y = (std::floor(ay) + 1.0 - ay) / dy;
  else if (step_y < 0)
    t_max_y = (ay - std::floor(ay)) / -dy;

  while (true) {
    if (t_max_x < t_max_y - kCornerTol) {
      if (t_max_x > 1.0 + kCornerTol) break;
      cx += step_x;
      t_max_x += t_delta_x;
      if (occupied(cx, cy)) return true;
    } else if (t_max_y < t_max_x - kCornerTol) {
      if (t_max_y > 1.0 + kCornerTol) break;
      cy += step_y;
      t_max_y += t_delta_y;
      if (occupied(cx, cy)) return true;
    } else {
      // exact corner
      if (t_max_x > 1.0 + kCornerTol) break;
      if (occupied(cx + step_x, cy)) return true;
      if (occupied(cx, cy + step_y)) return true;
      cx += step_x;
      cy += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
      if (occupied(cx, cy)) return true;
    }
  }
  return false;
}

}  // namespace swarmloc::sim
