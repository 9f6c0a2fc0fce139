#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace swarmloc::sim {

struct Aabb2 {
  Eigen::Vector2d lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d hi = Eigen::Vector2d::Zero();
  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() &&
           p.y() <= hi.y();
  }
};

// 2D occupancy grid in the horizontal plane. Sight lines are tested with a
// supercover traversal: every cell the segment touches counts, and a segment
// passing exactly through a cell corner counts both cells meeting diagonally
// at that corner, so grazing contact with an occupied corner blocks the line.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const Eigen::Vector2d& origin, double resolution, int nx,
                int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return res_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  bool empty() const { return nx_ == 0 || ny_ == 0; }

  // cell index of a world point; false when outside the grid
  bool world_to_cell(const Eigen::Vector2d& p, int& cx, int& cy) const;

  void set_occupied(int cx, int cy, bool occ = true);
  // mark every cell overlapping the axis-aligned world rectangle [lo, hi]
  void mark_rect(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi);

  // cells outside the grid are free
  bool occupied(int cx, int cy) const;
  bool occupied_world(const Eigen::Vector2d& p) const;

  // true when the open segment a->b touches any occupied cell
  bool segment_blocked(const Eigen::Vector2d& a,
                       const Eigen::Vector2d& b) const;

  // extent of the mapped (known) region in world coordinates
  Aabb2 bounds() const;

  std::size_t occupied_count() const;

 private:
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  double res_ = 1.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::uint8_t> cells_;
};

}  // namespace swarmloc::sim
