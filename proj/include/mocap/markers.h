#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mocap/body_model.h"

namespace mocap {

using VisibilityMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// T frames of M unlabeled marker positions with per-frame visibility.
struct MarkerSequence {
  std::vector<Points> positions; // T entries of M x 3, meters
  VisibilityMask visible; // T x M
  double frameRate = 30.0;
  std::vector<std::string> markerIds;

  int numFrames() const {
    return static_cast<int>(positions.size());
  }
  int numMarkers() const {
    return static_cast<int>(visible.cols());
  }
  Vec3 position(int t, int m) const {
    return positions[t].row(m).transpose();
  }
  long visibleCount() const {
    return visible.count();
  }

  /// Throws std::invalid_argument on inconsistent sizes or non-finite visible positions.
  void validate() const;

  /// Copy keeping only the listed markers, in the given order.
  MarkerSequence selectMarkers(const std::vector<int>& keep) const;
};

/// Marks every position exactly equal to the origin as invisible.
void maskOriginResets(MarkerSequence& markers);

} // namespace mocap
