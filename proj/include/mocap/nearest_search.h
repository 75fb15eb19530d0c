#pragma once

#include <span>
#include <vector>

#include "mocap/body_model.h"

namespace mocap {

/// Exact nearest-neighbour search over a point subset. Consecutive entries of
/// the subset are grouped into small blocks, and consecutive blocks into
/// groups, each with a bounding box; a box is opened only if it can hold a
/// point at least as close as the best so far. Results equal a brute-force
/// scan with ties broken by the lowest index.
class NearestSearch {
 public:
  /// `subset` lists rows of `points` to index; empty means all rows.
  NearestSearch(const Points& points, std::span<const int> subset = {}, int blockSize = 32);

  struct Hit {
    int index = -1; // row in `points`
    double squaredDistance = 0.0;
  };

  Hit nearest(const Vec3& query) const;

 private:
  const Points& points_;
  std::vector<int> ids_;
  int blockSize_;
  std::vector<Vec3> lo_; // per block
  std::vector<Vec3> hi_;
  std::vector<Vec3> groupLo_; // per group of kGroup blocks
  std::vector<Vec3> groupHi_;
};

/// Reorders `subset` (empty = all rows) so consecutive runs of `leafSize`
/// entries are spatially compact: recursive median splits along the longest
/// box axis. Useful as the subset argument of NearestSearch when the points
/// deform only mildly from `points`.
std::vector<int> spatialOrder(const Points& points, std::span<const int> subset = {}, int leafSize = 32);

} // namespace mocap
