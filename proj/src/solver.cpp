#include "mocap/solver.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace mocap {

namespace {

double degToRad(double deg) {
  return deg * std::numbers::pi / 180.0;
}

bool isConverged(OptimStatus s) {
  return s == OptimStatus::ConvergedGrad || s == OptimStatus::ConvergedF || s == OptimStatus::ConvergedX;
}

/// Angle in [0, 360) used for tie-breaking between hypotheses.
double normalizedDeg(double deg) {
  double a = std::fmod(deg, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

StageOutcome runStage(const EnergyInputs& in, const EnergyWeights& w, const BodyParams& init, double yaw,
                      const FreeMask& mask, const OptimSettings& settings) {
  StageOutcome out;
  out.params = init;
  out.yaw = yaw;
  const ParamPacker packer(init, mask);
  BodyParams work = init;
  double workYaw = yaw;
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    packer.unpack(x, work, workYaw);
    ParamGradient grad;
    const EnergyTerms e = evaluateEnergy(in, w, work, workYaw, &grad);
    g = packer.packGradient(grad);
    return e.total;
  };
  out.optim = minimizeLbfgs(objective, packer.pack(init, yaw), settings);
  packer.unpack(out.optim.x, out.params, out.yaw);
  out.terms = evaluateEnergy(in, w, out.params, out.yaw);
  return out;
}

StageDiagnostics describe(const std::string& stage, double yawDeg, const StageOutcome& s, double chamfer,
                          bool hasOffset) {
  StageDiagnostics d;
  d.stage = stage;
  d.yawDeg = yawDeg;
  d.chamfer = chamfer;
  d.markerOffset = hasOffset ? s.terms.markerOffset : -1.0;
  d.shape = s.terms.shape;
  d.pose = s.terms.pose;
  d.objective = s.terms.total;
  d.iterations = s.optim.iterations;
  d.status = s.optim.status;
  return d;
}

} // namespace

void SolverConfig::validate() const {
  if (yawHypothesesDeg.empty()) {
    throw std::invalid_argument("SolverConfig: yaw hypothesis set is empty");
  }
  for (const double y : yawHypothesesDeg) {
    if (!std::isfinite(y)) {
      throw std::invalid_argument("SolverConfig: non-finite yaw hypothesis");
    }
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("SolverConfig: delta must be positive");
  }
  if (!(clusterThreshold >= 0.0)) {
    throw std::invalid_argument("SolverConfig: cluster threshold must be non-negative");
  }
  for (const double w : {stage2Lambda3d, stage2LambdaBeta, stage2LambdaTheta, stage4LambdaM, stage4LambdaTheta,
                         stage4LambdaBeta, localization.lambda3d, localization.lambdaBeta}) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("SolverConfig: weights must be non-negative");
    }
  }
  if (refinementRepeats < 0) {
    throw std::invalid_argument("SolverConfig: refinement repeats must be non-negative");
  }
  upAxisVector(upAxis);
  stage2Optim.validate();
  stage4Optim.validate();
  localization.optim.validate();
}

double wholeBodyChamfer(const MarkerSequence& markers, const BodyParams& params, const BodyModel& model, double yaw,
                        const Vec3& upAxis) {
  EnergyInputs in;
  in.model = &model;
  in.markers = &markers;
  in.upAxis = upAxis;
  return evaluateEnergy(in, EnergyWeights{.chamfer = 1.0}, params, yaw).chamfer;
}

BodyParams foldYaw(const BodyParams& params, double yaw, const Vec3& upAxis) {
  BodyParams out = params;
  if (yaw == 0.0) {
    return out;
  }
  const Mat3 pre = axisRotation(upAxis, yaw);
  for (int t = 0; t < out.numFrames(); ++t) {
    out.phi.row(t) = matrixToAxisAngle(pre * axisAngleToMatrix(out.phi.row(t).transpose())).transpose();
  }
  return out;
}

StageOutcome stage2PoseFit(
    const MarkerSequence& markers,
    const BodyParams& init,
    double yawInit,
    const Prior& prior,
    const BodyModel& model,
    const SolverConfig& config) {
  EnergyInputs in;
  in.model = &model;
  in.markers = &markers;
  in.betaPrior = prior.params.beta;
  in.thetaRef = prior.params.theta;
  in.poseMask = prior.valid;
  in.upAxis = upAxisVector(config.upAxis);
  prepareChamferSearch(in);
  const EnergyWeights w{
      .chamfer = config.stage2Lambda3d, .shape = config.stage2LambdaBeta, .pose = config.stage2LambdaTheta};
  FreeMask mask = FreeMask::all(model.numBones());
  mask.yaw = true;
  mask.rotations[0] = 0;
  return runStage(in, w, init, yawInit, mask, config.stage2Optim);
}

Correspondence stage3Correspondence(
    const MarkerSequence& markers,
    const BodyParams& params,
    const BodyModel& model,
    const std::vector<bool>& frameMask) {
  const int T = markers.numFrames();
  if (params.numFrames() != T) {
    throw std::invalid_argument("stage3Correspondence: frame count mismatch");
  }
  if (!frameMask.empty() && static_cast<int>(frameMask.size()) != T) {
    throw std::invalid_argument("stage3Correspondence: mask length mismatch");
  }
  return closestAverageVertex(markers, posedVertexTracks(model, params), frameMask);
}

StageOutcome stage4Ik(
    const MarkerSequence& markers,
    const Correspondence& correspondence,
    const BodyParams& init,
    const Eigen::MatrixXd& thetaRef,
    const std::vector<bool>& poseMask,
    const Eigen::VectorXd& betaPrior,
    const BodyModel& model,
    const SolverConfig& config) {
  EnergyInputs in;
  in.model = &model;
  in.markers = &markers;
  in.correspondence = &correspondence;
  in.delta = config.delta;
  in.betaPrior = betaPrior;
  in.thetaRef = thetaRef;
  in.poseMask = poseMask;
  in.upAxis = upAxisVector(config.upAxis);
  const EnergyWeights w{
      .markerOffset = config.stage4LambdaM, .shape = config.stage4LambdaBeta, .pose = config.stage4LambdaTheta};
  return runStage(in, w, init, 0.0, FreeMask::all(model.numBones()), config.stage4Optim);
}

namespace {

/// Correspondence from prior-valid frames; markers seen only in gap frames
/// fall back to all of their visible frames.
Correspondence correspondenceWithFallback(
    const MarkerSequence& markers,
    const BodyParams& params,
    const BodyModel& model,
    const std::vector<bool>& valid) {
  Correspondence corr = stage3Correspondence(markers, params, model, valid);
  bool missing = false;
  for (int m = 0; m < markers.numMarkers(); ++m) {
    missing = missing || (corr[m] == kUnassigned && markers.visible.col(m).any());
  }
  if (missing) {
    const Correspondence all = stage3Correspondence(markers, params, model);
    for (int m = 0; m < markers.numMarkers(); ++m) {
      if (corr[m] == kUnassigned) {
        corr[m] = all[m];
      }
    }
  }
  return corr;
}

} // namespace

RefineOutcome stage5Refine(
    const MarkerSequence& markers,
    const BodyParams& params,
    const Correspondence& correspondence,
    const Prior& prior,
    const BodyModel& model,
    const SolverConfig& config) {
  RefineOutcome out;
  out.params = params;
  out.correspondence = correspondence;
  for (int r = 0; r < config.refinementRepeats; ++r) {
    out.correspondence = correspondenceWithFallback(markers, out.params, model, prior.valid);
    StageOutcome pass = stage4Ik(markers, out.correspondence, out.params, out.params.theta, {}, prior.params.beta,
                                 model, config);
    out.params = pass.params;
    out.passes.push_back(std::move(pass));
  }
  return out;
}

HypothesisResult runHypothesis(
    const MarkerSequence& markers,
    const ChainFitResult& localization,
    const Prior& prior,
    double yawDeg,
    const BodyModel& model,
    const SolverConfig& config) {
  const Vec3 up = upAxisVector(config.upAxis);
  const double yaw = degToRad(yawDeg);
  HypothesisResult h;
  h.yawDeg = yawDeg;

  // Prior pose and orientation, localized shape and translation, re-aligned
  // on the winning chain under this hypothesis.
  BodyParams init = prior.params;
  init.beta = localization.fittedParams.beta;
  init.gamma = localization.fittedParams.gamma;
  const std::vector<int> chainVerts = partVertices(model, localization.chain.bones);
  const std::vector<Points> full = posedVertexTracks(model, init, yaw, up);
  std::vector<Points> part(full.size());
  for (size_t t = 0; t < full.size(); ++t) {
    part[t] = full[t](chainVerts, Eigen::all);
  }
  init.gamma += alignMedian(markers, part);

  h.stage2 = stage2PoseFit(markers, init, yaw, prior, model, config);
  const BodyParams folded = foldYaw(h.stage2.params, h.stage2.yaw, up);
  h.correspondence = correspondenceWithFallback(markers, folded, model, prior.valid);
  h.stage4 = stage4Ik(markers, h.correspondence, folded, prior.params.theta, prior.valid, prior.params.beta, model,
                      config);
  h.selectionEnergy = wholeBodyChamfer(markers, h.stage4.params, model);
  return h;
}

int selectHypothesis(const std::vector<double>& yawDeg, const std::vector<double>& energy) {
  if (yawDeg.empty() || yawDeg.size() != energy.size()) {
    throw std::invalid_argument("selectHypothesis: need one energy per hypothesis");
  }
  int best = 0;
  for (size_t i = 1; i < energy.size(); ++i) {
    const double e = energy[i];
    const double eb = energy[best];
    if (e < eb || (e == eb && normalizedDeg(yawDeg[i]) < normalizedDeg(yawDeg[best]))) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

SolveResult solve(const MarkerSequence& markers, const Prior& prior, const BodyModel& model, const SolverConfig& config) {
  config.validate();
  markers.validate();
  prior.params.validate(model);
  if (prior.params.numFrames() != markers.numFrames()) {
    throw std::invalid_argument("solve: prior and marker frame counts differ");
  }
  if (static_cast<int>(prior.valid.size()) != markers.numFrames()) {
    throw std::invalid_argument("solve: prior validity mask has the wrong length");
  }
  const Vec3 up = upAxisVector(config.upAxis);
  SolveResult res;

  MarkerSegmentation seg = segmentMarkers(markers, config.clusterThreshold);
  res.warnings = seg.affinity.warnings;
  res.activeMarkers = seg.markers;
  res.clusters = std::move(seg.clusters);
  const std::vector<int>& keep = res.activeMarkers;
  const MarkerSequence active = markers.selectMarkers(keep);

  res.localization = localizePart(active, res.clusters, model, prior.params, prior.params.beta, config.localization);
  res.warnings.insert(res.warnings.end(), res.localization.warnings.begin(), res.localization.warnings.end());
  {
    StageDiagnostics d;
    d.stage = "localization";
    d.chamfer = wholeBodyChamfer(active, res.localization.fittedParams, model);
    d.shape = res.localization.shapeTerm;
    d.objective = res.localization.energy;
    d.iterations = res.localization.candidates[res.localization.winner].iterations;
    d.status = res.localization.candidates[res.localization.winner].status;
    res.diagnostics.push_back(d);
  }

  const auto& yaws = config.yawHypothesesDeg;
  std::vector<HypothesisResult> hyps(yaws.size());
  if (config.parallelHypotheses && yaws.size() > 1) {
    std::vector<std::exception_ptr> errors(yaws.size());
    std::vector<std::thread> pool;
    for (size_t i = 0; i < yaws.size(); ++i) {
      pool.emplace_back([&, i] {
        try {
          hyps[i] = runHypothesis(active, res.localization, prior, yaws[i], model, config);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
  } else {
    for (size_t i = 0; i < yaws.size(); ++i) {
      hyps[i] = runHypothesis(active, res.localization, prior, yaws[i], model, config);
    }
  }

  std::vector<double> energies;
  for (const HypothesisResult& h : hyps) {
    energies.push_back(h.selectionEnergy);
  }
  const int best = selectHypothesis(yaws, energies);
  for (size_t i = 0; i < hyps.size(); ++i) {
    const HypothesisResult& h = hyps[i];
    res.diagnostics.push_back(
        describe("stage2", h.yawDeg, h.stage2, wholeBodyChamfer(active, h.stage2.params, model, h.stage2.yaw, up), false));
    res.diagnostics.push_back(describe("stage4", h.yawDeg, h.stage4, h.selectionEnergy, true));
    res.converged = res.converged || isConverged(h.stage4.optim.status);
  }
  if (!res.converged) {
    res.warnings.push_back("no hypothesis converged in stage 4; returning the best partial result");
  }
  const HypothesisResult& chosen = hyps[best];
  res.chosenHypothesis = best;
  res.chosenYawDeg = chosen.yawDeg;
  res.stage2Params = foldYaw(chosen.stage2.params, chosen.stage2.yaw, up);
  res.stage4Params = chosen.stage4.params;

  const RefineOutcome refined = stage5Refine(active, chosen.stage4.params, chosen.correspondence, prior, model, config);
  for (const StageOutcome& pass : refined.passes) {
    res.stage5Params.push_back(pass.params);
    res.diagnostics.push_back(
        describe("stage5", chosen.yawDeg, pass, wholeBodyChamfer(active, pass.params, model), true));
  }
  res.params = refined.params;
  res.correspondence.assign(markers.numMarkers(), kUnassigned);
  for (size_t i = 0; i < keep.size(); ++i) {
    res.correspondence[keep[i]] = refined.correspondence[i];
  }
  return res;
}

} // namespace mocap
