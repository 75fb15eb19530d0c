#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mocap/part_localization.h"

namespace mocap {

/// Per-frame body prior used for initialization and regularization.
struct Prior {
  BodyParams params; // beta holds the sequence-level shape
  std::vector<bool> valid; // false on frames filled in by interpolation
};

struct SolverConfig {
  std::vector<double> yawHypothesesDeg{0.0, 90.0, 180.0, 270.0};
  double delta = 0.0095;
  double clusterThreshold = 0.005;

  double stage2Lambda3d = 10.0;
  double stage2LambdaBeta = 1.0;
  double stage2LambdaTheta = 1.0;
  OptimSettings stage2Optim{.learningRate = 0.1};

  double stage4LambdaM = 1.0;
  double stage4LambdaTheta = 0.1;
  double stage4LambdaBeta = 1.0;
  OptimSettings stage4Optim{.learningRate = 1.0};

  LocalizationConfig localization;
  int refinementRepeats = 1;
  char upAxis = 'y';
  bool parallelHypotheses = false;

  /// Throws std::invalid_argument on negative weights, non-positive delta,
  /// an empty hypothesis set or invalid optimizer settings.
  void validate() const;
};

/// Energy terms and optimizer outcome of one stage.
struct StageDiagnostics {
  std::string stage; // "localization", "stage2", "stage4", "stage5"
  double yawDeg = 0.0; // hypothesis the stage ran under
  double chamfer = 0.0; // whole-body E_3D of the stage output
  double markerOffset = -1.0; // -1 when no correspondence exists yet
  double shape = 0.0;
  double pose = 0.0;
  double objective = 0.0; // the weighted energy the stage minimized
  int iterations = 0;
  OptimStatus status = OptimStatus::MaxIters;
};

struct StageOutcome {
  BodyParams params;
  double yaw = 0.0; // radians, only stage 2 uses a separate yaw
  EnergyTerms terms;
  OptimResult optim;
};

struct HypothesisResult {
  double yawDeg = 0.0;
  StageOutcome stage2;
  Correspondence correspondence;
  StageOutcome stage4;
  double selectionEnergy = 0.0; // whole-body E_3D after stage 4
};

struct SolveResult {
  BodyParams params;
  Correspondence correspondence; // indexed like the input markers
  double chosenYawDeg = 0.0;
  int chosenHypothesis = -1;
  bool converged = false; // some hypothesis reached a tolerance in stage 4
  std::vector<int> activeMarkers; // input indices of markers visible at least once
  ClusterAssignment clusters; // over activeMarkers
  ChainFitResult localization;
  std::vector<StageDiagnostics> diagnostics;
  std::vector<std::string> warnings;

  // snapshots along the chosen hypothesis
  BodyParams stage2Params; // yaw folded into phi
  BodyParams stage4Params;
  std::vector<BodyParams> stage5Params; // one per refinement repeat
};

/// Whole-body one-way Chamfer of posed params (yaw already folded).
double wholeBodyChamfer(const MarkerSequence& markers, const BodyParams& params, const BodyModel& model,
                        double yaw = 0.0, const Vec3& upAxis = Vec3::UnitY());

/// Rewrites phi so the pre-rotation by `yaw` about `upAxis` is part of it.
BodyParams foldYaw(const BodyParams& params, double yaw, const Vec3& upAxis);

/// Fits yaw offset, pose, translation and shape to the markers with the whole
/// body surface; the root orientation is yaw composed with init.phi.
StageOutcome stage2PoseFit(
    const MarkerSequence& markers,
    const BodyParams& init,
    double yawInit,
    const Prior& prior,
    const BodyModel& model,
    const SolverConfig& config);

/// Per marker, the vertex with the smallest mean distance over frames where
/// the marker is visible and `frameMask` holds (empty = every frame).
Correspondence stage3Correspondence(
    const MarkerSequence& markers,
    const BodyParams& params,
    const BodyModel& model,
    const std::vector<bool>& frameMask = {});

/// Inverse kinematics against fixed marker-vertex pairs.
StageOutcome stage4Ik(
    const MarkerSequence& markers,
    const Correspondence& correspondence,
    const BodyParams& init,
    const Eigen::MatrixXd& thetaRef,
    const std::vector<bool>& poseMask,
    const Eigen::VectorXd& betaPrior,
    const BodyModel& model,
    const SolverConfig& config);

struct RefineOutcome {
  BodyParams params;
  Correspondence correspondence;
  std::vector<StageOutcome> passes;
};

/// Repeats correspondence + IK `config.refinementRepeats` times, each time
/// regularizing pose toward the previous pass.
RefineOutcome stage5Refine(
    const MarkerSequence& markers,
    const BodyParams& params,
    const Correspondence& correspondence,
    const Prior& prior,
    const BodyModel& model,
    const SolverConfig& config);

/// Stages 2 to 4 from the localization result under one yaw hypothesis.
HypothesisResult runHypothesis(
    const MarkerSequence& markers,
    const ChainFitResult& localization,
    const Prior& prior,
    double yawDeg,
    const BodyModel& model,
    const SolverConfig& config);

/// Index of the lowest energy; exact ties go to the smallest angle in [0, 360).
int selectHypothesis(const std::vector<double>& yawDeg, const std::vector<double>& energy);

/// Full pipeline: clustering, chain localization, yaw hypotheses, selection
/// by whole-body E_3D after stage 4 (lowest angle on ties), refinement.
SolveResult solve(const MarkerSequence& markers, const Prior& prior, const BodyModel& model, const SolverConfig& config);

} // namespace mocap
