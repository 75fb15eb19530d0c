#include "mocap/body_model.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mocap/posing.h"

namespace mocap {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) {
    throw std::invalid_argument("BodyModel: " + msg);
  }
}

} // namespace

BodyModel::BodyModel(BodyModelData data) : data_(std::move(data)) {
  const int nV = numVertices();
  const int nB = numBones();
  require(nV > 0 && nB > 0, "empty mesh or skeleton");
  require(static_cast<int>(data_.parents.size()) == nB, "parents size != bone count");
  require(static_cast<int>(data_.boneNames.size()) == nB, "bone name count != bone count");
  require(data_.lbsWeights.rows() == nV && data_.lbsWeights.cols() == nB, "lbs weight shape");
  require(data_.shapeBasis.rows() == 3 * nV, "shape basis rows != 3V");
  require(data_.jointShapeBasis.rows() == 3 * nB, "joint shape basis rows != 3B");
  require(data_.jointShapeBasis.cols() == data_.shapeBasis.cols(), "shape basis column mismatch");

  int roots = 0;
  for (int b = 0; b < nB; ++b) {
    const int p = data_.parents[b];
    if (p == kNoParent) {
      ++roots;
      require(b == 0, "root must be bone 0");
    } else {
      require(p >= 0 && p < b, "parents must be topologically ordered");
    }
  }
  require(roots == 1, "skeleton must have exactly one root");

  std::set<std::string> names(data_.boneNames.begin(), data_.boneNames.end());
  require(static_cast<int>(names.size()) == nB, "duplicate bone names");

  for (int f = 0; f < numFaces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const int idx = data_.faces(f, c);
      require(idx >= 0 && idx < nV, "face index out of range");
    }
  }

  children_.assign(nB, {});
  for (int b = 1; b < nB; ++b) {
    children_[data_.parents[b]].push_back(b);
  }

  weightOffsets_.reserve(nV + 1);
  weightOffsets_.push_back(0);
  for (int v = 0; v < nV; ++v) {
    double sum = 0.0;
    for (int b = 0; b < nB; ++b) {
      const double w = data_.lbsWeights(v, b);
      require(std::isfinite(w) && w >= 0.0, "negative or non-finite skinning weight");
      sum += w;
      if (w > 0.0) {
        sparseWeights_.push_back({b, w});
      }
    }
    require(std::abs(sum - 1.0) <= 1e-6, "skinning weights of vertex " + std::to_string(v) + " do not sum to 1");
    weightOffsets_.push_back(static_cast<int>(sparseWeights_.size()));
  }

  for (const auto& [part, bones] : data_.partTable) {
    for (const auto& name : bones) {
      require(names.count(name) > 0, "part '" + part + "' references unknown bone '" + name + "'");
    }
  }

  require(data_.templateVertices.allFinite() && data_.restJoints.allFinite(), "non-finite geometry");
  require(data_.shapeBasis.allFinite() && data_.jointShapeBasis.allFinite(), "non-finite shape basis");
}

int BodyModel::boneIndex(const std::string& name) const {
  const auto it = std::find(data_.boneNames.begin(), data_.boneNames.end(), name);
  if (it == data_.boneNames.end()) {
    throw std::out_of_range("unknown bone '" + name + "'");
  }
  return static_cast<int>(it - data_.boneNames.begin());
}

std::vector<int> BodyModel::partBones(const std::string& part) const {
  const auto it = data_.partTable.find(part);
  if (it == data_.partTable.end()) {
    throw std::out_of_range("unknown part '" + part + "'");
  }
  std::vector<int> bones;
  for (const auto& name : it->second) {
    const int b = boneIndex(name);
    if (std::find(bones.begin(), bones.end(), b) == bones.end()) {
      bones.push_back(b);
    }
  }
  return bones;
}

BodyParams BodyParams::zeros(int numFrames, int numBones, int numShapes) {
  BodyParams p;
  p.beta = Eigen::VectorXd::Zero(numShapes);
  p.phi = Eigen::MatrixXd::Zero(numFrames, 3);
  p.theta = Eigen::MatrixXd::Zero(numFrames, 3 * (numBones - 1));
  p.gamma = Eigen::MatrixXd::Zero(numFrames, 3);
  return p;
}

void BodyParams::validate(const BodyModel& model) const {
  const int T = numFrames();
  if (beta.size() != model.numShapes()) {
    throw std::invalid_argument("BodyParams: beta size does not match model");
  }
  if (phi.cols() != 3 || gamma.rows() != T || gamma.cols() != 3 || theta.rows() != T ||
      theta.cols() != model.numPoseCoords()) {
    throw std::invalid_argument("BodyParams: per-frame array shape mismatch");
  }
  if (!beta.allFinite() || !phi.allFinite() || !theta.allFinite() || !gamma.allFinite()) {
    throw std::invalid_argument("BodyParams: non-finite parameter");
  }
}

Vec3 BodyParams::rotation(int t, int bone) const {
  if (bone == 0) {
    return phi.row(t).transpose();
  }
  return theta.block<1, 3>(t, 3 * (bone - 1)).transpose();
}

void BodyParams::setRotation(int t, int bone, const Vec3& aa) {
  if (bone == 0) {
    phi.row(t) = aa.transpose();
  } else {
    theta.block<1, 3>(t, 3 * (bone - 1)) = aa.transpose();
  }
}

PosedBody forward(const BodyModel& model, const BodyParams& params, int frame) {
  params.validate(model);
  if (frame < 0 || frame >= params.numFrames()) {
    throw std::out_of_range("forward: frame index out of range");
  }
  const RestShape rest = shapeRest(model, params.beta);
  const FrameTransforms xf = poseFrame(model, rest, params, frame);
  PosedBody out;
  out.joints.resize(model.numBones(), 3);
  for (int b = 0; b < model.numBones(); ++b) {
    out.joints.row(b) = posedJoint(xf, b).transpose();
  }
  out.vertices.resize(model.numVertices(), 3);
  for (int v = 0; v < model.numVertices(); ++v) {
    out.vertices.row(v) = skinVertex(model, rest, xf, v).transpose();
  }
  return out;
}

std::vector<int> dominantBones(const BodyModel& model) {
  std::vector<int> owner(model.numVertices());
  for (int v = 0; v < model.numVertices(); ++v) {
    int best = -1;
    double bestW = -1.0;
    for (const auto& sw : model.vertexWeights(v)) {
      // ascending bone order, strict comparison keeps the lowest index on ties
      if (sw.weight > bestW) {
        bestW = sw.weight;
        best = sw.bone;
      }
    }
    owner[v] = best;
  }
  return owner;
}

std::vector<int> partVertices(const BodyModel& model, std::span<const int> bones) {
  if (bones.empty()) {
    throw std::invalid_argument("partVertices: empty bone set");
  }
  std::vector<char> selected(model.numBones(), 0);
  for (const int b : bones) {
    if (b < 0 || b >= model.numBones()) {
      throw std::out_of_range("partVertices: bone index out of range");
    }
    selected[b] = 1;
  }
  const std::vector<int> owner = dominantBones(model);
  std::vector<int> out;
  for (int v = 0; v < model.numVertices(); ++v) {
    if (selected[owner[v]]) {
      out.push_back(v);
    }
  }
  return out;
}

namespace {

void extendChains(
    const BodyModel& model,
    std::vector<int>& path,
    int k,
    std::vector<KinematicChain>& out) {
  if (static_cast<int>(path.size()) == k) {
    out.push_back({path});
    return;
  }
  for (const int c : model.children(path.back())) {
    path.push_back(c);
    extendChains(model, path, k, out);
    path.pop_back();
  }
}

} // namespace

std::vector<KinematicChain> enumerateChains(const BodyModel& model, int k) {
  if (k < 1 || k > model.numBones()) {
    throw std::invalid_argument("enumerateChains: k must be in [1, B]");
  }
  std::vector<KinematicChain> all;
  std::vector<int> path;
  for (int b = 0; b < model.numBones(); ++b) {
    path.assign(1, b);
    extendChains(model, path, k, all);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.bones < b.bones; });
  if (k == 1) {
    return all;
  }

  // ceil(0.9 k) in integer arithmetic
  const int overlapLimit = (9 * k + 9) / 10;
  std::vector<KinematicChain> kept;
  for (const auto& cand : all) {
    std::vector<int> sortedCand = cand.bones;
    std::sort(sortedCand.begin(), sortedCand.end());
    bool redundant = false;
    for (const auto& prev : kept) {
      std::vector<int> sortedPrev = prev.bones;
      std::sort(sortedPrev.begin(), sortedPrev.end());
      std::vector<int> common;
      std::set_intersection(
          sortedCand.begin(), sortedCand.end(), sortedPrev.begin(), sortedPrev.end(), std::back_inserter(common));
      if (static_cast<int>(common.size()) >= overlapLimit) {
        redundant = true;
        break;
      }
    }
    if (!redundant) {
      kept.push_back(cand);
    }
  }
  return kept;
}

int longestChainLength(const BodyModel& model) {
  std::vector<int> depth(model.numBones(), 1);
  int best = 1;
  for (int b = 1; b < model.numBones(); ++b) {
    depth[b] = depth[model.parent(b)] + 1;
    best = std::max(best, depth[b]);
  }
  return best;
}

} // namespace mocap
