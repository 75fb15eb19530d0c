#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mocap/markers.h"

namespace mocap {

/// Marker attachment points on the template surface.
struct MarkerPlacement {
  std::vector<int> triangles;
  Eigen::MatrixXd barycentric; // N x 3, rows sum to 1
  std::vector<double> offsets; // meters along the posed face normal

  int size() const {
    return static_cast<int>(triangles.size());
  }
  /// First n placements.
  MarkerPlacement prefix(int n) const;
  void validate(const BodyModel& model) const;
};

/// Area-weighted uniform surface sampling. Markers are drawn one after another
/// from a single stream, so a smaller layout with the same seed is a prefix of
/// a larger one. `faceSubset` restricts sampling to those triangles.
MarkerPlacement sampleLayout(
    const BodyModel& model,
    int numMarkers,
    std::uint64_t seed,
    const std::vector<int>& faceSubset = {},
    double offset = 0.0095);

/// Triangles whose three vertices all belong to `partVertices(bones)`.
std::vector<int> partFaces(const BodyModel& model, std::span<const int> bones);

/// Markers attached to the posed mesh; every marker is visible.
MarkerSequence animateMarkers(
    const BodyModel& model,
    const BodyParams& params,
    const MarkerPlacement& placement,
    double frameRate = 30.0);

/// Each visible marker starts a hidden interval of `durationFrames` frames
/// with probability `probability` per frame.
MarkerSequence dropout(const MarkerSequence& markers, double probability, int durationFrames, std::uint64_t seed);

struct PriorNoise {
  double sigmaTheta = 0.0; // radians, per axis-angle coordinate
  double sigmaBeta = 0.0;
  double yaw = 0.0; // radians, pre-multiplied onto the root orientation
  bool invalidateTranslation = false;
  std::vector<std::pair<int, int>> gaps; // [first, last] frames reported missing
};

struct SyntheticPrior {
  BodyParams params;
  std::vector<bool> present; // false inside gaps
};

SyntheticPrior perturbPrior(const BodyParams& truth, const PriorNoise& noise, std::uint64_t seed,
                            const Vec3& upAxis = Vec3::UnitY());

/// Names accepted by `generateMotion`.
const std::vector<std::string>& motionNames();

/// Procedural ground-truth motion ("walk", "squat", "arm_raise", "static").
/// The seed varies body shape, amplitudes and phase.
BodyParams generateMotion(const BodyModel& model, const std::string& name, int numFrames, double frameRate,
                          std::uint64_t seed);

/// One synthetic benchmark sequence: motion, marker layout, markers and prior.
struct ScenarioSpec {
  std::string motion = "walk";
  int frames = 150;
  double frameRate = 30.0;
  int markers = 50;
  std::string part; // model part name; empty places markers on the whole body
  std::uint64_t seed = 0;
  double sigmaThetaDeg = 5.0;
  double sigmaBeta = 0.2;
  std::optional<double> yawDeg; // prior yaw offset; unset draws one of 0/90/180/270 from the seed
  bool invalidateTranslation = true;
  std::vector<std::pair<int, int>> priorGaps; // [first, last] frames missing from the prior
  double dropoutProbability = 0.0;
  int dropoutFrames = 10;
};

struct Scenario {
  BodyParams truth;
  MarkerPlacement placement;
  MarkerSequence markers;
  SyntheticPrior prior;
  double yawDeg = 0.0;
};

/// Builds a scenario. Layout, motion, yaw, prior noise and dropout use separate
/// streams derived from `spec.seed`, so changing the marker count keeps the
/// layout nested and leaves the motion and prior unchanged.
Scenario makeScenario(const BodyModel& model, const ScenarioSpec& spec, const Vec3& upAxis = Vec3::UnitY());

} // namespace mocap
