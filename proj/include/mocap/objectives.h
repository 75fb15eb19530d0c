#pragma once

#include <vector>

#include "mocap/markers.h"
#include "mocap/posing.h"

namespace mocap {

/// Marker -> vertex index, fixed over a sequence.
using Correspondence = std::vector<int>;
inline constexpr int kUnassigned = -1;

// ---- array-level terms -----------------------------------------------------

/// One-way Chamfer: mean over visible (frame, marker) pairs of the squared
/// distance to the nearest vertex of that frame. Throws if nothing is visible.
double chamferOneWay(const MarkerSequence& markers, const std::vector<Points>& vertexTracks);

/// Mean squared difference of shape coefficients.
double shapeReg(const Eigen::VectorXd& betaHat, const Eigen::VectorXd& betaPrior);

/// Mean squared pose difference over unmasked frames and all pose coordinates.
/// `frameMask` empty means every frame counts.
double poseReg(const Eigen::MatrixXd& thetaHat, const Eigen::MatrixXd& thetaRef, const std::vector<bool>& frameMask = {});

/// Mean over visible (frame, marker) pairs of (|v_m - m| - delta)^2.
/// Throws if a visible marker is unassigned.
double markerOffsetLoss(
    const MarkerSequence& markers,
    const Correspondence& correspondence,
    const std::vector<Points>& vertexTracks,
    double delta);

/// Per marker, the vertex with the smallest mean distance over frames where the
/// marker is visible and `frameMask` holds (empty = every frame); ties go to
/// the lowest vertex index, markers with no such frame stay unassigned.
Correspondence closestAverageVertex(
    const MarkerSequence& markers,
    const std::vector<Points>& vertexTracks,
    const std::vector<bool>& frameMask = {});

// ---- model-level energies --------------------------------------------------

struct EnergyWeights {
  double chamfer = 0.0;
  double markerOffset = 0.0;
  double shape = 0.0;
  double pose = 0.0;
};

struct EnergyTerms {
  double chamfer = 0.0;
  double markerOffset = 0.0;
  double shape = 0.0;
  double pose = 0.0;
  double total = 0.0;
};

/// Everything a weighted energy needs besides the parameters themselves.
struct EnergyInputs {
  const BodyModel* model = nullptr;
  const MarkerSequence* markers = nullptr;
  std::vector<int> chamferVertices; // empty = whole body
  std::vector<int> searchOrder; // chamferVertices in spatial order, see prepareChamferSearch
  const Correspondence* correspondence = nullptr;
  double delta = 0.0095;
  Eigen::VectorXd betaPrior;
  Eigen::MatrixXd thetaRef;
  std::vector<bool> poseMask; // frames counted by the pose term, empty = all
  Vec3 upAxis = Vec3::UnitY();
};

/// Caches the spatial ordering of the Chamfer vertex set; optional, saves
/// recomputing it on every evaluation.
void prepareChamferSearch(EnergyInputs& in);

/// Weighted sum of the enabled (non-zero weight) terms. When `grad` is given it
/// receives the exact gradient with respect to every parameter and the yaw.
EnergyTerms evaluateEnergy(
    const EnergyInputs& in,
    const EnergyWeights& w,
    const BodyParams& params,
    double yaw,
    ParamGradient* grad = nullptr);

/// Per-frame posed vertices (all of them) for the given parameters and yaw.
std::vector<Points> posedVertexTracks(const BodyModel& model, const BodyParams& params, double yaw = 0.0,
                                      const Vec3& upAxis = Vec3::UnitY());
/// Per-frame posed joints.
std::vector<Points> posedJointTracks(const BodyModel& model, const BodyParams& params, double yaw = 0.0,
                                     const Vec3& upAxis = Vec3::UnitY());

double markerOffsetLoss(
    const MarkerSequence& markers,
    const Correspondence& correspondence,
    const BodyParams& params,
    const BodyModel& model,
    double delta);

// ---- packing ---------------------------------------------------------------

/// Which parameters an optimization stage may change.
struct FreeMask {
  bool beta = false;
  bool gamma = false;
  bool yaw = false;
  std::vector<char> rotations; // per bone; entry 0 is the root orientation phi

  static FreeMask all(int numBones);
};

/// Maps the free subset of (BodyParams, yaw) to a flat vector and back.
class ParamPacker {
 public:
  ParamPacker(const BodyParams& shapeOf, FreeMask mask);

  int size() const {
    return size_;
  }
  Eigen::VectorXd pack(const BodyParams& params, double yaw) const;
  /// Overwrites only the free entries of `params` / `yaw`.
  void unpack(const Eigen::VectorXd& x, BodyParams& params, double& yaw) const;
  Eigen::VectorXd packGradient(const ParamGradient& grad) const;

 private:
  FreeMask mask_;
  int numFrames_ = 0;
  int numShapes_ = 0;
  int size_ = 0;
};

} // namespace mocap
