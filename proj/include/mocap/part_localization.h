#pragma once

#include <string>
#include <vector>

#include "mocap/lbfgs.h"
#include "mocap/objectives.h"
#include "mocap/segmentation.h"

namespace mocap {

struct LocalizationConfig {
  double lambda3d = 10.0;
  double lambdaBeta = 0.1;
  OptimSettings optim{.learningRate = 1.0, .maxIters = 300};
  bool parallel = false; // fit candidates on worker threads
};

/// Outcome of fitting one candidate chain.
struct CandidateFit {
  KinematicChain chain;
  double energy = 0.0;
  double chamferTerm = 0.0;
  double shapeTerm = 0.0;
  OptimStatus status = OptimStatus::MaxIters;
  int iterations = 0;
};

struct ChainFitResult {
  KinematicChain chain;
  BodyParams fittedParams;
  double energy = 0.0; // lambda3d * chamferTerm + lambdaBeta * shapeTerm
  double chamferTerm = 0.0;
  double shapeTerm = 0.0;
  int requestedLength = 0; // cluster count
  int chainLength = 0; // length actually searched
  std::vector<CandidateFit> candidates; // enumeration order
  int winner = -1; // index into candidates
  std::vector<std::string> warnings;
};

/// Per-frame componentwise median of visible markers minus that of the
/// vertices (T x 3). Frames without visible markers copy the offset of the
/// nearest frame that has some (earlier frame on ties).
Eigen::MatrixXd alignMedian(const MarkerSequence& markers, const std::vector<Points>& vertexTracks);

struct ChainFit {
  CandidateFit summary;
  BodyParams params;
};

/// Fits one chain: beta, translation and the chain's rotations are free, the
/// rest of the pose stays at `init`. Translation starts from the median alignment.
ChainFit fitChain(
    const MarkerSequence& markers,
    const KinematicChain& chain,
    const BodyModel& model,
    const BodyParams& init,
    const Eigen::VectorXd& betaPrior,
    const LocalizationConfig& config);

/// Exhaustive chain search with K = number of clusters; the candidate with the
/// lowest energy wins, earlier candidates on ties.
ChainFitResult localizePart(
    const MarkerSequence& markers,
    const ClusterAssignment& clusters,
    const BodyModel& model,
    const BodyParams& prior,
    const Eigen::VectorXd& betaPrior,
    const LocalizationConfig& config);

} // namespace mocap
