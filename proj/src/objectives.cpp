#include "mocap/objectives.h"

#include <algorithm>
#include <stdexcept>

#include "mocap/nearest_search.h"

namespace mocap {

double chamferOneWay(const MarkerSequence& markers, const std::vector<Points>& vertexTracks) {
  if (static_cast<int>(vertexTracks.size()) != markers.numFrames()) {
    throw std::invalid_argument("chamferOneWay: frame count mismatch");
  }
  const long count = markers.visibleCount();
  if (count == 0) {
    throw std::invalid_argument("chamferOneWay: no visible markers");
  }
  double sum = 0.0;
  for (int t = 0; t < markers.numFrames(); ++t) {
    if (vertexTracks[t].rows() == 0) {
      throw std::invalid_argument("chamferOneWay: empty vertex set");
    }
    const NearestSearch grid(vertexTracks[t]);
    for (int m = 0; m < markers.numMarkers(); ++m) {
      if (markers.visible(t, m)) {
        sum += grid.nearest(markers.position(t, m)).squaredDistance;
      }
    }
  }
  return sum / static_cast<double>(count);
}

double shapeReg(const Eigen::VectorXd& betaHat, const Eigen::VectorXd& betaPrior) {
  if (betaHat.size() != betaPrior.size() || betaHat.size() == 0) {
    throw std::invalid_argument("shapeReg: coefficient count mismatch");
  }
  return (betaHat - betaPrior).squaredNorm() / static_cast<double>(betaPrior.size());
}

double poseReg(const Eigen::MatrixXd& thetaHat, const Eigen::MatrixXd& thetaRef, const std::vector<bool>& frameMask) {
  if (thetaHat.rows() != thetaRef.rows() || thetaHat.cols() != thetaRef.cols()) {
    throw std::invalid_argument("poseReg: shape mismatch");
  }
  if (!frameMask.empty() && static_cast<long>(frameMask.size()) != thetaHat.rows()) {
    throw std::invalid_argument("poseReg: mask length mismatch");
  }
  double sum = 0.0;
  long frames = 0;
  for (long t = 0; t < thetaHat.rows(); ++t) {
    if (!frameMask.empty() && !frameMask[t]) {
      continue;
    }
    sum += (thetaHat.row(t) - thetaRef.row(t)).squaredNorm();
    ++frames;
  }
  if (frames == 0 || thetaHat.cols() == 0) {
    return 0.0;
  }
  return sum / static_cast<double>(frames * thetaHat.cols());
}

double markerOffsetLoss(
    const MarkerSequence& markers,
    const Correspondence& correspondence,
    const std::vector<Points>& vertexTracks,
    double delta) {
  if (static_cast<int>(correspondence.size()) != markers.numMarkers()) {
    throw std::invalid_argument("markerOffsetLoss: correspondence size mismatch");
  }
  const long count = markers.visibleCount();
  if (count == 0) {
    throw std::invalid_argument("markerOffsetLoss: no visible markers");
  }
  double sum = 0.0;
  for (int t = 0; t < markers.numFrames(); ++t) {
    for (int m = 0; m < markers.numMarkers(); ++m) {
      if (!markers.visible(t, m)) {
        continue;
      }
      if (correspondence[m] == kUnassigned) {
        throw std::invalid_argument("markerOffsetLoss: visible marker without a vertex");
      }
      const double d = (vertexTracks[t].row(correspondence[m]).transpose() - markers.position(t, m)).norm();
      sum += (d - delta) * (d - delta);
    }
  }
  return sum / static_cast<double>(count);
}

Correspondence closestAverageVertex(
    const MarkerSequence& markers,
    const std::vector<Points>& vertexTracks,
    const std::vector<bool>& frameMask) {
  const int T = markers.numFrames();
  const int M = markers.numMarkers();
  if (static_cast<int>(vertexTracks.size()) != T) {
    throw std::invalid_argument("closestAverageVertex: frame count mismatch");
  }
  if (!frameMask.empty() && static_cast<int>(frameMask.size()) != T) {
    throw std::invalid_argument("closestAverageVertex: mask length mismatch");
  }
  const int V = T > 0 ? static_cast<int>(vertexTracks[0].rows()) : 0;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(M, V);
  std::vector<int> counts(M, 0);
  for (int t = 0; t < T; ++t) {
    if (!frameMask.empty() && !frameMask[t]) {
      continue;
    }
    if (vertexTracks[t].rows() != V) {
      throw std::invalid_argument("closestAverageVertex: vertex count differs between frames");
    }
    for (int m = 0; m < M; ++m) {
      if (!markers.visible(t, m)) {
        continue;
      }
      const Eigen::RowVector3d p = markers.positions[t].row(m);
      sums.row(m) += (vertexTracks[t].rowwise() - p).rowwise().norm().transpose();
      ++counts[m];
    }
  }
  Correspondence corr(M, kUnassigned);
  for (int m = 0; m < M; ++m) {
    if (counts[m] == 0 || V == 0) {
      continue;
    }
    int best = 0;
    for (int v = 1; v < V; ++v) {
      if (sums(m, v) < sums(m, best)) {
        best = v;
      }
    }
    corr[m] = best;
  }
  return corr;
}

void prepareChamferSearch(EnergyInputs& in) {
  in.searchOrder = spatialOrder(in.model->data().templateVertices, in.chamferVertices);
}

EnergyTerms evaluateEnergy(
    const EnergyInputs& in,
    const EnergyWeights& w,
    const BodyParams& params,
    double yaw,
    ParamGradient* grad) {
  const BodyModel& model = *in.model;
  const int T = params.numFrames();
  EnergyTerms terms;
  if (grad) {
    *grad = ParamGradient::zerosLike(params);
  }
  SequenceBackprop seq(model);
  const bool needPosing = w.chamfer != 0.0 || w.markerOffset != 0.0;

  if (needPosing) {
    const MarkerSequence& markers = *in.markers;
    if (markers.numFrames() != T) {
      throw std::invalid_argument("evaluateEnergy: marker and parameter frame counts differ");
    }
    const long count = markers.visibleCount();
    if (count == 0) {
      throw std::invalid_argument("evaluateEnergy: no visible markers");
    }
    const double norm = 1.0 / static_cast<double>(count);
    const RestShape rest = shapeRest(model, params.beta);
    const Mat3 pre = axisRotation(in.upAxis, yaw);

    std::vector<int> searchOrder;
    std::vector<int> candidates; // ascending, skinning order
    if (w.chamfer != 0.0) {
      searchOrder = in.searchOrder.empty() ? spatialOrder(model.data().templateVertices, in.chamferVertices)
                                           : in.searchOrder;
      candidates = searchOrder;
      std::sort(candidates.begin(), candidates.end());
    }
    std::vector<int> corrVertices;
    if (w.markerOffset != 0.0) {
      if (!in.correspondence || static_cast<int>(in.correspondence->size()) != markers.numMarkers()) {
        throw std::invalid_argument("evaluateEnergy: marker offset term needs a full correspondence");
      }
      for (const int v : *in.correspondence) {
        if (v != kUnassigned) {
          corrVertices.push_back(v);
        }
      }
      std::sort(corrVertices.begin(), corrVertices.end());
      corrVertices.erase(std::unique(corrVertices.begin(), corrVertices.end()), corrVertices.end());
    }

    Points posed = Points::Zero(model.numVertices(), 3);
    double chamferSum = 0.0;
    double offsetSum = 0.0;
    for (int t = 0; t < T; ++t) {
      const FrameTransforms xf = poseFrame(model, rest, params, t, pre);
      FrameBackprop bp(model, rest, xf);

      if (w.chamfer != 0.0) {
        for (const int v : candidates) {
          posed.row(v) = skinVertex(model, rest, xf, v).transpose();
        }
        const NearestSearch grid(posed, searchOrder);
        for (int m = 0; m < markers.numMarkers(); ++m) {
          if (!markers.visible(t, m)) {
            continue;
          }
          const Vec3 mp = markers.position(t, m);
          const auto hit = grid.nearest(mp);
          chamferSum += hit.squaredDistance;
          if (grad) {
            const Vec3 diff = posed.row(hit.index).transpose() - mp;
            bp.addVertexGradient(hit.index, (2.0 * w.chamfer * norm) * diff);
          }
        }
      }

      if (w.markerOffset != 0.0) {
        for (const int v : corrVertices) {
          posed.row(v) = skinVertex(model, rest, xf, v).transpose();
        }
        for (int m = 0; m < markers.numMarkers(); ++m) {
          if (!markers.visible(t, m)) {
            continue;
          }
          const int v = (*in.correspondence)[m];
          if (v == kUnassigned) {
            throw std::invalid_argument("evaluateEnergy: visible marker without a vertex");
          }
          const Vec3 diff = posed.row(v).transpose() - markers.position(t, m);
          const double d = diff.norm();
          const double r = d - in.delta;
          offsetSum += r * r;
          if (grad && d > 0.0) {
            bp.addVertexGradient(v, (2.0 * w.markerOffset * norm * r / d) * diff);
          }
        }
      }
      if (grad) {
        bp.finish(t, in.upAxis, seq, *grad);
      }
    }
    terms.chamfer = chamferSum * norm;
    terms.markerOffset = offsetSum * norm;
  }

  if (w.shape != 0.0) {
    terms.shape = shapeReg(params.beta, in.betaPrior);
    if (grad) {
      grad->beta += (2.0 * w.shape / static_cast<double>(params.beta.size())) * (params.beta - in.betaPrior);
    }
  }

  if (w.pose != 0.0) {
    terms.pose = poseReg(params.theta, in.thetaRef, in.poseMask);
    if (grad) {
      long frames = 0;
      for (int t = 0; t < T; ++t) {
        frames += (in.poseMask.empty() || in.poseMask[t]) ? 1 : 0;
      }
      if (frames > 0) {
        const double scale = 2.0 * w.pose / static_cast<double>(frames * params.theta.cols());
        for (int t = 0; t < T; ++t) {
          if (in.poseMask.empty() || in.poseMask[t]) {
            grad->theta.row(t) += scale * (params.theta.row(t) - in.thetaRef.row(t));
          }
        }
      }
    }
  }

  if (grad && needPosing) {
    seq.finish(*grad);
  }
  terms.total = w.chamfer * terms.chamfer + w.markerOffset * terms.markerOffset + w.shape * terms.shape +
      w.pose * terms.pose;
  return terms;
}

std::vector<Points> posedVertexTracks(const BodyModel& model, const BodyParams& params, double yaw, const Vec3& upAxis) {
  const RestShape rest = shapeRest(model, params.beta);
  const Mat3 pre = axisRotation(upAxis, yaw);
  std::vector<Points> out(params.numFrames());
  for (int t = 0; t < params.numFrames(); ++t) {
    const FrameTransforms xf = poseFrame(model, rest, params, t, pre);
    out[t].resize(model.numVertices(), 3);
    for (int v = 0; v < model.numVertices(); ++v) {
      out[t].row(v) = skinVertex(model, rest, xf, v).transpose();
    }
  }
  return out;
}

std::vector<Points> posedJointTracks(const BodyModel& model, const BodyParams& params, double yaw, const Vec3& upAxis) {
  const RestShape rest = shapeRest(model, params.beta);
  const Mat3 pre = axisRotation(upAxis, yaw);
  std::vector<Points> out(params.numFrames());
  for (int t = 0; t < params.numFrames(); ++t) {
    const FrameTransforms xf = poseFrame(model, rest, params, t, pre);
    out[t].resize(model.numBones(), 3);
    for (int b = 0; b < model.numBones(); ++b) {
      out[t].row(b) = posedJoint(xf, b).transpose();
    }
  }
  return out;
}

double markerOffsetLoss(
    const MarkerSequence& markers,
    const Correspondence& correspondence,
    const BodyParams& params,
    const BodyModel& model,
    double delta) {
  return markerOffsetLoss(markers, correspondence, posedVertexTracks(model, params), delta);
}

FreeMask FreeMask::all(int numBones) {
  FreeMask m;
  m.beta = true;
  m.gamma = true;
  m.yaw = false;
  m.rotations.assign(numBones, 1);
  return m;
}

ParamPacker::ParamPacker(const BodyParams& shapeOf, FreeMask mask)
    : mask_(std::move(mask)), numFrames_(shapeOf.numFrames()), numShapes_(static_cast<int>(shapeOf.beta.size())) {
  int perFrame = mask_.gamma ? 3 : 0;
  for (const char r : mask_.rotations) {
    perFrame += r ? 3 : 0;
  }
  size_ = (mask_.beta ? numShapes_ : 0) + (mask_.yaw ? 1 : 0) + numFrames_ * perFrame;
}

Eigen::VectorXd ParamPacker::pack(const BodyParams& params, double yaw) const {
  Eigen::VectorXd x(size_);
  int k = 0;
  if (mask_.beta) {
    x.segment(k, numShapes_) = params.beta;
    k += numShapes_;
  }
  if (mask_.yaw) {
    x[k++] = yaw;
  }
  for (int t = 0; t < numFrames_; ++t) {
    for (size_t b = 0; b < mask_.rotations.size(); ++b) {
      if (mask_.rotations[b]) {
        x.segment<3>(k) = params.rotation(t, static_cast<int>(b));
        k += 3;
      }
    }
    if (mask_.gamma) {
      x.segment<3>(k) = params.gamma.row(t).transpose();
      k += 3;
    }
  }
  return x;
}

void ParamPacker::unpack(const Eigen::VectorXd& x, BodyParams& params, double& yaw) const {
  int k = 0;
  if (mask_.beta) {
    params.beta = x.segment(k, numShapes_);
    k += numShapes_;
  }
  if (mask_.yaw) {
    yaw = x[k++];
  }
  for (int t = 0; t < numFrames_; ++t) {
    for (size_t b = 0; b < mask_.rotations.size(); ++b) {
      if (mask_.rotations[b]) {
        params.setRotation(t, static_cast<int>(b), x.segment<3>(k));
        k += 3;
      }
    }
    if (mask_.gamma) {
      params.gamma.row(t) = x.segment<3>(k).transpose();
      k += 3;
    }
  }
}

Eigen::VectorXd ParamPacker::packGradient(const ParamGradient& grad) const {
  Eigen::VectorXd g(size_);
  int k = 0;
  if (mask_.beta) {
    g.segment(k, numShapes_) = grad.beta;
    k += numShapes_;
  }
  if (mask_.yaw) {
    g[k++] = grad.yaw;
  }
  for (int t = 0; t < numFrames_; ++t) {
    for (size_t b = 0; b < mask_.rotations.size(); ++b) {
      if (mask_.rotations[b]) {
        g.segment<3>(k) = b == 0 ? Vec3(grad.phi.row(t).transpose())
                                 : Vec3(grad.theta.block<1, 3>(t, 3 * (static_cast<int>(b) - 1)).transpose());
        k += 3;
      }
    }
    if (mask_.gamma) {
      g.segment<3>(k) = grad.gamma.row(t).transpose();
      k += 3;
    }
  }
  return g;
}

} // namespace mocap
