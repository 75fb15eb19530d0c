#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mocap/markers.h"
#include "mocap/objectives.h"

namespace fixtures {

using mocap::BodyModel;
using mocap::BodyParams;
using mocap::MarkerSequence;
using mocap::Points;

/// Small random skinned model: 6 bones (branching tree), `numVertices`
/// vertices with 1 to 3 influences, random triangles and 4 shape directions.
BodyModel toyModel(std::uint64_t seed, int numVertices = 40);

BodyParams randomParams(const BodyModel& model, int numFrames, std::mt19937_64& rng, double spread = 0.4);

/// Markers scattered around random vertices of `tracks`; each entry is hidden
/// with probability `hideProbability`, but every frame keeps one visible marker.
MarkerSequence markersNear(const std::vector<Points>& tracks, int numMarkers, std::mt19937_64& rng,
                           double hideProbability = 0.2, double noise = 0.02);

MarkerSequence randomMarkers(int numFrames, int numMarkers, std::mt19937_64& rng, double hideProbability = 0.2);

std::vector<Points> randomTracks(int numFrames, int numPoints, std::mt19937_64& rng);

/// |a - b| / max(|a|, |b|), zero when both vanish.
double relativeError(double a, double b);
/// Vector form with Euclidean norms.
double relativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Central finite differences of the weighted energy over every parameter
/// (beta, yaw, all rotations, all translations) against the analytic gradient.
struct GradientCheck {
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
  double relError = 0.0;
};
GradientCheck checkGradient(const mocap::EnergyInputs& in, const mocap::EnergyWeights& w, const BodyParams& params,
                            double yaw, double h = 1e-5, const std::vector<int>& coords = {});

} // namespace fixtures
