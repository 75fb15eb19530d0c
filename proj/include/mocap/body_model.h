#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mocap/rotation.h"

namespace mocap {

/// N x 3 row-major block of points, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

constexpr int kNoParent = -1;

/// Raw arrays of a skinned body model. Validated when wrapped in a BodyModel.
struct BodyModelData {
  Points templateVertices; // V x 3, meters
  Faces faces; // F x 3
  Points restJoints; // B x 3, meters
  std::vector<int> parents; // B, kNoParent for the root
  std::vector<std::string> boneNames; // B
  Eigen::MatrixXd lbsWeights; // V x B
  Eigen::MatrixXd shapeBasis; // 3V x S, row 3*v + axis
  Eigen::MatrixXd jointShapeBasis; // 3B x S, row 3*b + axis
  std::map<std::string, std::vector<std::string>> partTable;
};

struct SkinWeight {
  int bone;
  double weight;
};

/// Immutable articulated body: skeleton, skinned template mesh, linear shape space.
class BodyModel {
 public:
  /// Throws std::invalid_argument if any structural invariant is violated.
  explicit BodyModel(BodyModelData data);

  const BodyModelData& data() const {
    return data_;
  }

  int numVertices() const {
    return static_cast<int>(data_.templateVertices.rows());
  }
  int numBones() const {
    return static_cast<int>(data_.restJoints.rows());
  }
  int numShapes() const {
    return static_cast<int>(data_.shapeBasis.cols());
  }
  int numFaces() const {
    return static_cast<int>(data_.faces.rows());
  }
  /// Number of pose coordinates excluding the root, 3 * (B - 1).
  int numPoseCoords() const {
    return 3 * (numBones() - 1);
  }

  int parent(int bone) const {
    return data_.parents[bone];
  }
  const std::vector<int>& children(int bone) const {
    return children_[bone];
  }
  const std::string& boneName(int bone) const {
    return data_.boneNames[bone];
  }
  /// Throws std::out_of_range for unknown names.
  int boneIndex(const std::string& name) const;

  /// Non-zero skinning weights of one vertex, ascending bone order.
  std::span<const SkinWeight> vertexWeights(int v) const {
    return {sparseWeights_.data() + weightOffsets_[v], sparseWeights_.data() + weightOffsets_[v + 1]};
  }

  /// Bone indices of a named part, deduplicated, in table order.
  std::vector<int> partBones(const std::string& part) const;

 private:
  BodyModelData data_;
  std::vector<std::vector<int>> children_;
  std::vector<SkinWeight> sparseWeights_;
  std::vector<int> weightOffsets_;
};

/// Shape coefficients plus per-frame root orientation, joint rotations and translation.
struct BodyParams {
  Eigen::VectorXd beta; // S
  Eigen::MatrixXd phi; // T x 3, axis-angle
  Eigen::MatrixXd theta; // T x 3(B-1), axis-angle per non-root bone
  Eigen::MatrixXd gamma; // T x 3, meters

  int numFrames() const {
    return static_cast<int>(phi.rows());
  }

  static BodyParams zeros(int numFrames, int numBones, int numShapes);

  /// Throws std::invalid_argument on shape mismatch or non-finite entries.
  void validate(const BodyModel& model) const;

  /// Axis-angle of bone b in frame t; bone 0 returns phi.
  Vec3 rotation(int t, int bone) const;
  void setRotation(int t, int bone, const Vec3& aa);
};

/// Descending parent -> child path of bones.
struct KinematicChain {
  std::vector<int> bones;

  bool operator==(const KinematicChain&) const = default;
};

struct PosedBody {
  Points joints; // B x 3
  Points vertices; // V x 3
};

/// Shape blend, forward kinematics, linear blend skinning, translation.
PosedBody forward(const BodyModel& model, const BodyParams& params, int frame);

/// Vertices whose arg-max skinning weight is one of `bones` (ties -> lowest bone index).
std::vector<int> partVertices(const BodyModel& model, std::span<const int> bones);

/// Arg-max bone of every vertex.
std::vector<int> dominantBones(const BodyModel& model);

/// All descending chains of k bones, lexicographic, with near-duplicate removal for k > 1.
std::vector<KinematicChain> enumerateChains(const BodyModel& model, int k);

/// Length of the deepest root-to-leaf path, counted in bones.
int longestChainLength(const BodyModel& model);

} // namespace mocap
