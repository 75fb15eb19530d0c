#pragma once

#include <array>
#include <vector>

#include "mocap/body_model.h"

namespace mocap {

/// Template and rest joints after shape blending.
struct RestShape {
  Points joints;
  Points vertices;
};

RestShape shapeRest(const BodyModel& model, const Eigen::VectorXd& beta);

/// Rigid transforms of every bone for one frame.
///
/// The root's local rotation is `preRotation * R(phi)`; the world position of
/// a skinned point is sum_b w_b (globalRot_b * x + skinTrans_b) + translation.
struct FrameTransforms {
  std::vector<Mat3> localRot;
  std::vector<std::array<Mat3, 3>> localDeriv; // d(R(aa))/d(aa_i), root excludes preRotation
  std::vector<Mat3> globalRot;
  std::vector<Vec3> globalPos; // joint positions before translation
  std::vector<Vec3> skinTrans;
  Mat3 preRotation = Mat3::Identity();
  Mat3 rootAxisAngleRot = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

FrameTransforms poseFrame(
    const BodyModel& model,
    const RestShape& rest,
    const BodyParams& params,
    int frame,
    const Mat3& preRotation = Mat3::Identity());

Vec3 skinVertex(const BodyModel& model, const RestShape& rest, const FrameTransforms& xf, int v);

inline Vec3 posedJoint(const FrameTransforms& xf, int bone) {
  return xf.globalPos[bone] + xf.translation;
}

/// Gradient with the same layout as BodyParams, plus the root pre-rotation yaw.
struct ParamGradient {
  Eigen::VectorXd beta;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd theta;
  Eigen::MatrixXd gamma;
  double yaw = 0.0;

  static ParamGradient zerosLike(const BodyParams& params);
};

/// Reverse-mode accumulator for one frame. Feed dL/d(posed point) and call
/// finish(); rest-shape gradients are summed across frames into `SequenceBackprop`.
class SequenceBackprop;

class FrameBackprop {
 public:
  FrameBackprop(const BodyModel& model, const RestShape& rest, const FrameTransforms& xf);

  void addVertexGradient(int v, const Vec3& g);
  void addJointGradient(int bone, const Vec3& g);

  /// Propagates to frame t's phi/theta/gamma and to the yaw derivative of
  /// preRotation (rotation about `upAxis`), and to the shared rest shape.
  void finish(int t, const Vec3& upAxis, SequenceBackprop& seq, ParamGradient& grad);

 private:
  const BodyModel& model_;
  const RestShape& rest_;
  const FrameTransforms& xf_;
  std::vector<Mat3> dSkinRot_;
  std::vector<Vec3> dSkinTrans_;
  std::vector<Vec3> dGlobalPos_;
  Vec3 dTranslation_ = Vec3::Zero();
  std::vector<std::pair<int, Vec3>> restVertexGrads_;
};

/// Collects dL/d(rest joints) and dL/d(rest vertices) across frames and maps them to beta.
class SequenceBackprop {
 public:
  explicit SequenceBackprop(const BodyModel& model);

  void addRestVertex(int v, const Vec3& g) {
    restVertices_.row(v) += g.transpose();
  }
  void addRestJoint(int b, const Vec3& g) {
    restJoints_.row(b) += g.transpose();
  }
  void finish(ParamGradient& grad) const;

 private:
  const BodyModel& model_;
  Points restVertices_;
  Points restJoints_;
};

/// Unit world up axis from 'x', 'y' or 'z'.
Vec3 upAxisVector(char axis);

} // namespace mocap
