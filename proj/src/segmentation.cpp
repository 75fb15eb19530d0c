#include "mocap/segmentation.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mocap {

void MarkerSequence::validate() const {
  const int T = numFrames();
  if (visible.rows() != T) {
    throw std::invalid_argument("MarkerSequence: visibility rows != frame count");
  }
  if (static_cast<int>(markerIds.size()) != numMarkers()) {
    throw std::invalid_argument("MarkerSequence: marker id count != marker count");
  }
  if (!(frameRate > 0.0)) {
    throw std::invalid_argument("MarkerSequence: frame rate must be positive");
  }
  for (int t = 0; t < T; ++t) {
    if (positions[t].rows() != numMarkers()) {
      throw std::invalid_argument("MarkerSequence: frame " + std::to_string(t) + " has wrong marker count");
    }
    for (int m = 0; m < numMarkers(); ++m) {
      if (visible(t, m) && !positions[t].row(m).allFinite()) {
        throw std::invalid_argument("MarkerSequence: non-finite visible marker position");
      }
    }
  }
}

MarkerSequence MarkerSequence::selectMarkers(const std::vector<int>& keep) const {
  MarkerSequence out;
  out.frameRate = frameRate;
  out.visible.resize(numFrames(), static_cast<int>(keep.size()));
  out.positions.resize(numFrames());
  for (int t = 0; t < numFrames(); ++t) {
    out.positions[t].resize(static_cast<int>(keep.size()), 3);
    for (size_t k = 0; k < keep.size(); ++k) {
      out.positions[t].row(static_cast<int>(k)) = positions[t].row(keep[k]);
      out.visible(t, static_cast<int>(k)) = visible(t, keep[k]);
    }
  }
  for (const int m : keep) {
    out.markerIds.push_back(markerIds[m]);
  }
  return out;
}

void maskOriginResets(MarkerSequence& markers) {
  for (int t = 0; t < markers.numFrames(); ++t) {
    for (int m = 0; m < markers.numMarkers(); ++m) {
      const auto row = markers.positions[t].row(m);
      if (row[0] == 0.0 && row[1] == 0.0 && row[2] == 0.0) {
        markers.visible(t, m) = false;
      }
    }
  }
}

AffinityResult distanceStdAffinity(const MarkerSequence& markers) {
  const int M = markers.numMarkers();
  const int T = markers.numFrames();
  if (M < 1) {
    throw std::invalid_argument("distanceStdAffinity: no markers");
  }
  AffinityResult out;
  out.affinity = Eigen::MatrixXd::Zero(M, M);
  std::vector<double> dist;
  dist.reserve(T);
  for (int i = 0; i < M; ++i) {
    for (int j = i + 1; j < M; ++j) {
      dist.clear();
      for (int t = 0; t < T; ++t) {
        if (markers.visible(t, i) && markers.visible(t, j)) {
          dist.push_back((markers.positions[t].row(i) - markers.positions[t].row(j)).norm());
        }
      }
      double value;
      if (dist.size() < 2) {
        value = std::numeric_limits<double>::infinity();
        out.warnings.push_back(
            "markers " + markers.markerIds[i] + " and " + markers.markerIds[j] + " are co-visible in " +
            std::to_string(dist.size()) + " frame(s); kept apart");
      } else {
        double mean = 0.0;
        for (const double d : dist) {
          mean += d;
        }
        mean /= static_cast<double>(dist.size());
        double var = 0.0;
        for (const double d : dist) {
          var += (d - mean) * (d - mean);
        }
        value = std::sqrt(var / static_cast<double>(dist.size()));
      }
      out.affinity(i, j) = value;
      out.affinity(j, i) = value;
    }
  }
  return out;
}

std::vector<std::vector<int>> ClusterAssignment::members() const {
  std::vector<std::vector<int>> out(numClusters);
  for (size_t m = 0; m < labels.size(); ++m) {
    out[labels[m]].push_back(static_cast<int>(m));
  }
  return out;
}

ClusterAssignment clusterMarkers(const Eigen::MatrixXd& affinity, double threshold) {
  const int M = static_cast<int>(affinity.rows());
  if (affinity.cols() != M) {
    throw std::invalid_argument("clusterMarkers: affinity must be square");
  }
  // Active clusters are identified by their smallest member index; linkage
  // between clusters is maintained with the Lance-Williams average update.
  Eigen::MatrixXd link = affinity;
  std::vector<int> size(M, 1);
  std::vector<int> owner(M);
  std::vector<bool> active(M, true);
  for (int m = 0; m < M; ++m) {
    owner[m] = m;
  }

  while (true) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < M; ++i) {
      if (!active[i]) {
        continue;
      }
      for (int j = i + 1; j < M; ++j) {
        if (active[j] && link(i, j) < best) {
          best = link(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0 || !(best <= threshold)) {
      break;
    }
    for (int k = 0; k < M; ++k) {
      if (!active[k] || k == bi || k == bj) {
        continue;
      }
      const double merged = (size[bi] * link(bi, k) + size[bj] * link(bj, k)) / (size[bi] + size[bj]);
      link(bi, k) = merged;
      link(k, bi) = merged;
    }
    size[bi] += size[bj];
    active[bj] = false;
    for (int m = 0; m < M; ++m) {
      if (owner[m] == bj) {
        owner[m] = bi;
      }
    }
  }

  ClusterAssignment out;
  out.labels.assign(M, -1);
  std::vector<int> labelOfOwner(M, -1);
  for (int m = 0; m < M; ++m) {
    int& lab = labelOfOwner[owner[m]];
    if (lab < 0) {
      lab = out.numClusters++;
    }
    out.labels[m] = lab;
  }
  return out;
}

MarkerSegmentation segmentMarkers(const MarkerSequence& markers, double threshold) {
  MarkerSegmentation seg;
  for (int m = 0; m < markers.numMarkers(); ++m) {
    if (markers.visible.col(m).any()) {
      seg.markers.push_back(m);
    }
  }
  if (seg.markers.empty()) {
    throw std::invalid_argument("segmentMarkers: no marker is ever visible");
  }
  const int dropped = markers.numMarkers() - static_cast<int>(seg.markers.size());
  seg.affinity = distanceStdAffinity(markers.selectMarkers(seg.markers));
  if (dropped > 0) {
    seg.affinity.warnings.insert(seg.affinity.warnings.begin(),
                                 std::to_string(dropped) + " never-visible marker(s) ignored");
  }
  seg.clusters = clusterMarkers(seg.affinity.affinity, threshold);
  return seg;
}

} // namespace mocap
