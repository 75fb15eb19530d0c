#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mocap/markers.h"

namespace mocap {

struct AffinityResult {
  Eigen::MatrixXd affinity; // M x M, meters; +inf where a pair is co-visible in < 2 frames
  std::vector<std::string> warnings;
};

/// Population standard deviation of every pairwise marker distance over the
/// frames in which both markers are visible.
AffinityResult distanceStdAffinity(const MarkerSequence& markers);

struct ClusterAssignment {
  std::vector<int> labels; // per marker, in [0, K)
  int numClusters = 0;

  std::vector<std::vector<int>> members() const;
};

/// Bottom-up average-linkage clustering. Merges continue while the smallest
/// inter-cluster average linkage is <= threshold; ties merge the pair with the
/// lowest (smallest member index) identifiers first. Labels are numbered by
/// first appearance in marker order.
ClusterAssignment clusterMarkers(const Eigen::MatrixXd& affinity, double threshold = 0.005);

struct MarkerSegmentation {
  std::vector<int> markers; // input indices of the markers visible at least once
  AffinityResult affinity; // over `markers`
  ClusterAssignment clusters; // over `markers`
};

/// Drops never-visible markers, then builds the affinity and clusters the rest.
/// Throws std::invalid_argument if no marker is ever visible.
MarkerSegmentation segmentMarkers(const MarkerSequence& markers, double threshold = 0.005);

} // namespace mocap
