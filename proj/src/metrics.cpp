#include "mocap/metrics.h"

#include <limits>
#include <stdexcept>

namespace mocap {

namespace {

void checkTracks(const std::vector<Points>& a, const std::vector<Points>& b, const char* what) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument(std::string(what) + ": frame count mismatch or empty input");
  }
  for (size_t t = 0; t < a.size(); ++t) {
    if (a[t].rows() != b[t].rows()) {
      throw std::invalid_argument(std::string(what) + ": point count mismatch");
    }
  }
}

double meanDistanceMm(const std::vector<Points>& a, const std::vector<Points>& b) {
  double sum = 0.0;
  long count = 0;
  for (size_t t = 0; t < a.size(); ++t) {
    sum += (a[t] - b[t]).rowwise().norm().sum();
    count += a[t].rows();
  }
  return count > 0 ? 1000.0 * sum / static_cast<double>(count) : 0.0;
}

} // namespace

double mpjpe(const std::vector<Points>& predJoints, const std::vector<Points>& refJoints) {
  checkTracks(predJoints, refJoints, "mpjpe");
  return meanDistanceMm(predJoints, refJoints);
}

double mpjve(const std::vector<Points>& predJoints, const std::vector<Points>& refJoints, double frameRate) {
  checkTracks(predJoints, refJoints, "mpjve");
  if (predJoints.size() < 2) {
    throw std::invalid_argument("mpjve: needs at least two frames");
  }
  double sum = 0.0;
  long count = 0;
  for (size_t t = 0; t + 1 < predJoints.size(); ++t) {
    const Points predVel = (predJoints[t + 1] - predJoints[t]) * frameRate;
    const Points refVel = (refJoints[t + 1] - refJoints[t]) * frameRate;
    sum += (predVel - refVel).rowwise().norm().sum();
    count += predVel.rows();
  }
  return 1000.0 * sum / static_cast<double>(count);
}

double v2v(const std::vector<Points>& predVertices, const std::vector<Points>& refVertices) {
  checkTracks(predVertices, refVertices, "v2v");
  return meanDistanceMm(predVertices, refVertices);
}

Vec3 closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk over vertices, edges and face
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return a + (d1 / (d1 - d3)) * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return a + (d2 / (d2 - d6)) * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

MarkerSurfaceResult markerToSurface(const MarkerSequence& markers, const std::vector<Points>& vertices, const Faces& faces) {
  if (static_cast<int>(vertices.size()) != markers.numFrames()) {
    throw std::invalid_argument("m2s: frame count mismatch");
  }
  MarkerSurfaceResult res;
  double sum = 0.0;
  long count = 0;
  std::vector<int> usable;
  for (int t = 0; t < markers.numFrames(); ++t) {
    const Points& V = vertices[t];
    usable.clear();
    for (int f = 0; f < faces.rows(); ++f) {
      const Vec3 a = V.row(faces(f, 0)).transpose();
      const Vec3 b = V.row(faces(f, 1)).transpose();
      const Vec3 c = V.row(faces(f, 2)).transpose();
      if ((b - a).cross(c - a).squaredNorm() > 0.0) {
        usable.push_back(f);
      }
    }
    const int skipped = static_cast<int>(faces.rows()) - static_cast<int>(usable.size());
    if (skipped > res.skippedFaces) {
      res.skippedFaces = skipped;
    }
    for (int m = 0; m < markers.numMarkers(); ++m) {
      if (!markers.visible(t, m)) {
        continue;
      }
      const Vec3 p = markers.position(t, m);
      double best = std::numeric_limits<double>::infinity();
      for (const int f : usable) {
        const Vec3 q = closestPointOnTriangle(
            p, V.row(faces(f, 0)).transpose(), V.row(faces(f, 1)).transpose(), V.row(faces(f, 2)).transpose());
        best = std::min(best, (q - p).squaredNorm());
      }
      sum += std::sqrt(best);
      ++count;
    }
  }
  if (res.skippedFaces > 0) {
    res.warnings.push_back("skipped " + std::to_string(res.skippedFaces) + " zero-area triangle(s)");
  }
  if (count == 0) {
    throw std::invalid_argument("m2s: no visible markers");
  }
  res.meanMm = 1000.0 * sum / static_cast<double>(count);
  return res;
}

} // namespace mocap
