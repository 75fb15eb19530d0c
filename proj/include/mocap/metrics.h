#pragma once

#include <string>
#include <vector>

#include "mocap/markers.h"

namespace mocap {

/// Mean per-joint position error, millimeters.
double mpjpe(const std::vector<Points>& predJoints, const std::vector<Points>& refJoints);

/// Mean norm of the per-joint velocity difference over adjacent frames, mm/s.
double mpjve(const std::vector<Points>& predJoints, const std::vector<Points>& refJoints, double frameRate);

/// Mean vertex-to-vertex distance, millimeters.
double v2v(const std::vector<Points>& predVertices, const std::vector<Points>& refVertices);

/// Closest point on triangle (a, b, c) to p.
Vec3 closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct MarkerSurfaceResult {
  double meanMm = 0.0;
  int skippedFaces = 0; // zero-area triangles ignored
  std::vector<std::string> warnings;
};

/// Mean over visible (frame, marker) pairs of the exact distance from the
/// marker to the posed triangle mesh, millimeters.
MarkerSurfaceResult markerToSurface(const MarkerSequence& markers, const std::vector<Points>& vertices, const Faces& faces);

inline double m2s(const MarkerSequence& markers, const std::vector<Points>& vertices, const Faces& faces) {
  return markerToSurface(markers, vertices, faces).meanMm;
}

} // namespace mocap
