#include "mocap/nearest_search.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mocap {

namespace {

constexpr size_t kGroup = 8;

double boxDistance2(const Vec3& lo, const Vec3& hi, const Vec3& q) {
  const Vec3 below = (lo - q).cwiseMax(0.0);
  const Vec3 above = (q - hi).cwiseMax(0.0);
  return (below + above).squaredNorm();
}

} // namespace

namespace {

void splitRange(const Points& points, std::vector<int>& ids, size_t begin, size_t end, size_t leaf) {
  if (end - begin <= leaf) {
    return;
  }
  Vec3 lo = points.row(ids[begin]).transpose();
  Vec3 hi = lo;
  for (size_t k = begin + 1; k < end; ++k) {
    lo = lo.cwiseMin(points.row(ids[k]).transpose());
    hi = hi.cwiseMax(points.row(ids[k]).transpose());
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  // split on a leaf boundary so every leaf but the last is full
  const size_t leaves = (end - begin + leaf - 1) / leaf;
  const size_t mid = begin + (leaves / 2) * leaf;
  std::nth_element(ids.begin() + begin, ids.begin() + mid, ids.begin() + end, [&](int a, int b) {
    const double pa = points(a, axis);
    const double pb = points(b, axis);
    return pa < pb || (pa == pb && a < b);
  });
  splitRange(points, ids, begin, mid, leaf);
  splitRange(points, ids, mid, end, leaf);
}

} // namespace

std::vector<int> spatialOrder(const Points& points, std::span<const int> subset, int leafSize) {
  if (leafSize < 1) {
    throw std::invalid_argument("spatialOrder: leaf size must be positive");
  }
  std::vector<int> ids;
  if (subset.empty()) {
    ids.resize(points.rows());
    std::iota(ids.begin(), ids.end(), 0);
  } else {
    ids.assign(subset.begin(), subset.end());
  }
  splitRange(points, ids, 0, ids.size(), static_cast<size_t>(leafSize));
  return ids;
}

NearestSearch::NearestSearch(const Points& points, std::span<const int> subset, int blockSize)
    : points_(points), blockSize_(blockSize) {
  if (blockSize < 1) {
    throw std::invalid_argument("NearestSearch: block size must be positive");
  }
  if (subset.empty()) {
    ids_.resize(points.rows());
    std::iota(ids_.begin(), ids_.end(), 0);
  } else {
    ids_.assign(subset.begin(), subset.end());
  }
  const size_t blocks = (ids_.size() + blockSize_ - 1) / blockSize_;
  lo_.resize(blocks);
  hi_.resize(blocks);
  for (size_t b = 0; b < blocks; ++b) {
    const size_t end = std::min(ids_.size(), (b + 1) * blockSize_);
    Vec3 lo = points.row(ids_[b * blockSize_]).transpose();
    Vec3 hi = lo;
    for (size_t k = b * blockSize_ + 1; k < end; ++k) {
      const Vec3 p = points.row(ids_[k]).transpose();
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    lo_[b] = lo;
    hi_[b] = hi;
  }
  const size_t groups = (blocks + kGroup - 1) / kGroup;
  groupLo_.resize(groups);
  groupHi_.resize(groups);
  for (size_t g = 0; g < groups; ++g) {
    groupLo_[g] = lo_[g * kGroup];
    groupHi_[g] = hi_[g * kGroup];
    for (size_t b = g * kGroup + 1; b < std::min(blocks, (g + 1) * kGroup); ++b) {
      groupLo_[g] = groupLo_[g].cwiseMin(lo_[b]);
      groupHi_[g] = groupHi_[g].cwiseMax(hi_[b]);
    }
  }
}

NearestSearch::Hit NearestSearch::nearest(const Vec3& query) const {
  Hit best{-1, std::numeric_limits<double>::infinity()};
  const size_t groups = groupLo_.size();
  if (groups == 0) {
    return best;
  }
  const auto scanBlock = [&](size_t b) {
    const size_t end = std::min(ids_.size(), (b + 1) * blockSize_);
    for (size_t k = b * blockSize_; k < end; ++k) {
      const int i = ids_[k];
      const double d = (points_.row(i).transpose() - query).squaredNorm();
      if (d < best.squaredDistance || (d == best.squaredDistance && i < best.index)) {
        best = {i, d};
      }
    }
  };
  const auto scanGroup = [&](size_t g, size_t skipBlock) {
    for (size_t b = g * kGroup; b < std::min(lo_.size(), (g + 1) * kGroup); ++b) {
      if (b != skipBlock && boxDistance2(lo_[b], hi_[b], query) <= best.squaredDistance) {
        scanBlock(b);
      }
    }
  };

  thread_local std::vector<double> bound;
  bound.resize(groups);
  size_t firstGroup = 0;
  for (size_t g = 0; g < groups; ++g) {
    bound[g] = boxDistance2(groupLo_[g], groupHi_[g], query);
    if (bound[g] < bound[firstGroup]) {
      firstGroup = g;
    }
  }
  // seed with the closest block of the closest group
  size_t firstBlock = firstGroup * kGroup;
  double firstBound = std::numeric_limits<double>::infinity();
  for (size_t b = firstGroup * kGroup; b < std::min(lo_.size(), (firstGroup + 1) * kGroup); ++b) {
    const double d = boxDistance2(lo_[b], hi_[b], query);
    if (d < firstBound) {
      firstBound = d;
      firstBlock = b;
    }
  }
  scanBlock(firstBlock);
  scanGroup(firstGroup, firstBlock);
  for (size_t g = 0; g < groups; ++g) {
    if (g != firstGroup && bound[g] <= best.squaredDistance) {
      scanGroup(g, lo_.size());
    }
  }
  return best;
}

} // namespace mocap
