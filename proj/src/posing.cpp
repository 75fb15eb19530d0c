#include "mocap/posing.h"

#include <stdexcept>

namespace mocap {

RestShape shapeRest(const BodyModel& model, const Eigen::VectorXd& beta) {
  const auto& d = model.data();
  RestShape rest;
  rest.vertices = d.templateVertices;
  rest.joints = d.restJoints;
  if (beta.size() > 0) {
    const Eigen::VectorXd dv = d.shapeBasis * beta;
    const Eigen::VectorXd dj = d.jointShapeBasis * beta;
    rest.vertices += Eigen::Map<const Points>(dv.data(), model.numVertices(), 3);
    rest.joints += Eigen::Map<const Points>(dj.data(), model.numBones(), 3);
  }
  return rest;
}

FrameTransforms poseFrame(
    const BodyModel& model,
    const RestShape& rest,
    const BodyParams& params,
    int frame,
    const Mat3& preRotation) {
  const int nB = model.numBones();
  FrameTransforms xf;
  xf.localRot.resize(nB);
  xf.localDeriv.resize(nB);
  xf.globalRot.resize(nB);
  xf.globalPos.resize(nB);
  xf.skinTrans.resize(nB);
  xf.preRotation = preRotation;
  xf.translation = params.gamma.row(frame).transpose();

  xf.rootAxisAngleRot = axisAngleToMatrix(params.rotation(frame, 0), xf.localDeriv[0]);
  xf.localRot[0] = preRotation * xf.rootAxisAngleRot;
  xf.globalRot[0] = xf.localRot[0];
  xf.globalPos[0] = rest.joints.row(0).transpose();
  for (int b = 1; b < nB; ++b) {
    const int p = model.parent(b);
    xf.localRot[b] = axisAngleToMatrix(params.rotation(frame, b), xf.localDeriv[b]);
    xf.globalRot[b] = xf.globalRot[p] * xf.localRot[b];
    const Vec3 offset = (rest.joints.row(b) - rest.joints.row(p)).transpose();
    xf.globalPos[b] = xf.globalRot[p] * offset + xf.globalPos[p];
  }
  for (int b = 0; b < nB; ++b) {
    xf.skinTrans[b] = xf.globalPos[b] - xf.globalRot[b] * rest.joints.row(b).transpose();
  }
  return xf;
}

Vec3 skinVertex(const BodyModel& model, const RestShape& rest, const FrameTransforms& xf, int v) {
  const Vec3 x = rest.vertices.row(v).transpose();
  Vec3 out = Vec3::Zero();
  for (const auto& sw : model.vertexWeights(v)) {
    out += sw.weight * (xf.globalRot[sw.bone] * x + xf.skinTrans[sw.bone]);
  }
  return out + xf.translation;
}

ParamGradient ParamGradient::zerosLike(const BodyParams& params) {
  ParamGradient g;
  g.beta = Eigen::VectorXd::Zero(params.beta.size());
  g.phi = Eigen::MatrixXd::Zero(params.phi.rows(), params.phi.cols());
  g.theta = Eigen::MatrixXd::Zero(params.theta.rows(), params.theta.cols());
  g.gamma = Eigen::MatrixXd::Zero(params.gamma.rows(), params.gamma.cols());
  g.yaw = 0.0;
  return g;
}

FrameBackprop::FrameBackprop(const BodyModel& model, const RestShape& rest, const FrameTransforms& xf)
    : model_(model),
      rest_(rest),
      xf_(xf),
      dSkinRot_(model.numBones(), Mat3::Zero()),
      dSkinTrans_(model.numBones(), Vec3::Zero()),
      dGlobalPos_(model.numBones(), Vec3::Zero()) {}

void FrameBackprop::addVertexGradient(int v, const Vec3& g) {
  const Vec3 x = rest_.vertices.row(v).transpose();
  Vec3 restGrad = Vec3::Zero();
  for (const auto& sw : model_.vertexWeights(v)) {
    const Vec3 wg = sw.weight * g;
    dSkinRot_[sw.bone] += wg * x.transpose();
    dSkinTrans_[sw.bone] += wg;
    restGrad += xf_.globalRot[sw.bone].transpose() * wg;
  }
  dTranslation_ += g;
  restVertexGrads_.emplace_back(v, restGrad);
}

void FrameBackprop::addJointGradient(int bone, const Vec3& g) {
  dGlobalPos_[bone] += g;
  dTranslation_ += g;
}

void FrameBackprop::finish(int t, const Vec3& upAxis, SequenceBackprop& seq, ParamGradient& grad) {
  const int nB = model_.numBones();
  std::vector<Mat3> dGlobalRot(nB);
  std::vector<Vec3> dRestJoint(nB, Vec3::Zero());

  // skinTrans_b = globalPos_b - globalRot_b * J_b
  for (int b = 0; b < nB; ++b) {
    const Vec3 jb = rest_.joints.row(b).transpose();
    dGlobalRot[b] = dSkinRot_[b] - dSkinTrans_[b] * jb.transpose();
    dGlobalPos_[b] += dSkinTrans_[b];
    dRestJoint[b] -= xf_.globalRot[b].transpose() * dSkinTrans_[b];
  }

  std::vector<Mat3> dLocal(nB);
  for (int b = nB - 1; b >= 1; --b) {
    const int p = model_.parent(b);
    const Vec3 offset = (rest_.joints.row(b) - rest_.joints.row(p)).transpose();
    dGlobalRot[p] += dGlobalRot[b] * xf_.localRot[b].transpose() + dGlobalPos_[b] * offset.transpose();
    dLocal[b] = xf_.globalRot[p].transpose() * dGlobalRot[b];
    dGlobalPos_[p] += dGlobalPos_[b];
    const Vec3 dOffset = xf_.globalRot[p].transpose() * dGlobalPos_[b];
    dRestJoint[b] += dOffset;
    dRestJoint[p] -= dOffset;
  }
  dLocal[0] = dGlobalRot[0];
  dRestJoint[0] += dGlobalPos_[0];

  for (int b = 1; b < nB; ++b) {
    for (int i = 0; i < 3; ++i) {
      grad.theta(t, 3 * (b - 1) + i) += frobeniusDot(dLocal[b], xf_.localDeriv[b][i]);
    }
  }
  const Mat3 dRootAxisAngle = xf_.preRotation.transpose() * dLocal[0];
  for (int i = 0; i < 3; ++i) {
    grad.phi(t, i) += frobeniusDot(dRootAxisAngle, xf_.localDeriv[0][i]);
  }
  const Mat3 dPre = dLocal[0] * xf_.rootAxisAngleRot.transpose();
  grad.yaw += frobeniusDot(dPre, skew(upAxis) * xf_.preRotation);
  grad.gamma.row(t) += dTranslation_.transpose();

  for (int b = 0; b < nB; ++b) {
    seq.addRestJoint(b, dRestJoint[b]);
  }
  for (const auto& [v, g] : restVertexGrads_) {
    seq.addRestVertex(v, g);
  }
}

SequenceBackprop::SequenceBackprop(const BodyModel& model)
    : model_(model),
      restVertices_(Points::Zero(model.numVertices(), 3)),
      restJoints_(Points::Zero(model.numBones(), 3)) {}

void SequenceBackprop::finish(ParamGradient& grad) const {
  const auto& d = model_.data();
  const Eigen::Map<const Eigen::VectorXd> rv(restVertices_.data(), restVertices_.size());
  const Eigen::Map<const Eigen::VectorXd> rj(restJoints_.data(), restJoints_.size());
  grad.beta += d.shapeBasis.transpose() * rv + d.jointShapeBasis.transpose() * rj;
}

Vec3 upAxisVector(char axis) {
  switch (axis) {
    case 'x':
    case 'X':
      return Vec3::UnitX();
    case 'y':
    case 'Y':
      return Vec3::UnitY();
    case 'z':
    case 'Z':
      return Vec3::UnitZ();
    default:
      throw std::invalid_argument(std::string("unknown up axis '") + axis + "'");
  }
}

} // namespace mocap
