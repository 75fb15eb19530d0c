#include "mocap/model_builder.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mocap {

namespace {

constexpr int kNumShapes = 10;
constexpr double kRingSpacing = 0.015;
using ShapeCoeffs = std::array<double, kNumShapes>;

enum Bone {
  kPelvis,
  kLeftHip,
  kRightHip,
  kSpine1,
  kLeftKnee,
  kRightKnee,
  kSpine2,
  kLeftAnkle,
  kRightAnkle,
  kSpine3,
  kLeftFoot,
  kRightFoot,
  kNeck,
  kLeftCollar,
  kRightCollar,
  kHead,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHand,
  kRightHand,
  kNumBones
};

bool isLeft(int b) {
  return smplBoneNames()[b].rfind("left_", 0) == 0;
}
bool isRight(int b) {
  return smplBoneNames()[b].rfind("right_", 0) == 0;
}
double sideSign(int b) {
  return isLeft(b) ? 1.0 : (isRight(b) ? -1.0 : 0.0);
}
bool inSet(int b, std::initializer_list<int> set) {
  return std::find(set.begin(), set.end(), b) != set.end();
}

Points baseJoints() {
  Points j(kNumBones, 3);
  j.row(kPelvis) << 0.0, 0.93, 0.0;
  j.row(kLeftHip) << 0.09, 0.85, 0.0;
  j.row(kSpine1) << 0.0, 1.04, -0.01;
  j.row(kLeftKnee) << 0.10, 0.48, 0.01;
  j.row(kSpine2) << 0.0, 1.17, -0.01;
  j.row(kLeftAnkle) << 0.10, 0.08, -0.02;
  j.row(kSpine3) << 0.0, 1.28, 0.0;
  j.row(kLeftFoot) << 0.11, 0.02, 0.11;
  j.row(kNeck) << 0.0, 1.47, -0.02;
  j.row(kLeftCollar) << 0.06, 1.40, -0.01;
  j.row(kHead) << 0.0, 1.56, 0.01;
  j.row(kLeftShoulder) << 0.17, 1.42, -0.02;
  j.row(kLeftElbow) << 0.43, 1.42, -0.03;
  j.row(kLeftWrist) << 0.68, 1.42, -0.02;
  j.row(kLeftHand) << 0.77, 1.42, -0.02;
  for (int b = 0; b < kNumBones; ++b) {
    if (isRight(b)) {
      const int l = b - 1; // right bones directly follow their left partner
      j.row(b) = j.row(l);
      j(b, 0) = -j(l, 0);
    }
  }
  return j;
}

// Joint positions are affine in the shape coefficients.
Points shapedJoints(const ShapeCoeffs& p) {
  const Points j0 = baseJoints();
  Points j = j0 * (1.0 + 0.02 * p[0]);
  for (int b = 0; b < kNumBones; ++b) {
    const double sx = sideSign(b);
    // leg length
    if (inSet(b, {kLeftKnee, kRightKnee})) {
      j(b, 1) -= 0.012 * p[1];
    }
    if (inSet(b, {kLeftAnkle, kRightAnkle, kLeftFoot, kRightFoot})) {
      j(b, 1) -= 0.024 * p[1];
    }
    // arm length
    if (inSet(b, {kLeftElbow, kRightElbow})) {
      j(b, 0) += 0.01 * sx * p[2];
    }
    if (inSet(b, {kLeftWrist, kRightWrist, kLeftHand, kRightHand})) {
      j(b, 0) += 0.02 * sx * p[2];
    }
    // torso length
    if (b == kSpine2) {
      j(b, 1) += 0.008 * p[3];
    }
    if (b == kSpine3) {
      j(b, 1) += 0.016 * p[3];
    }
    if (inSet(
            b,
            {kNeck, kHead, kLeftCollar, kRightCollar, kLeftShoulder, kRightShoulder, kLeftElbow, kRightElbow,
             kLeftWrist, kRightWrist, kLeftHand, kRightHand})) {
      j(b, 1) += 0.024 * p[3];
    }
    // shoulder width
    if (inSet(b, {kLeftCollar, kRightCollar})) {
      j(b, 0) += 0.005 * sx * p[7];
    }
    if (inSet(
            b,
            {kLeftShoulder, kRightShoulder, kLeftElbow, kRightElbow, kLeftWrist, kRightWrist, kLeftHand,
             kRightHand})) {
      j(b, 0) += 0.012 * sx * p[7];
    }
    // hip width
    if (inSet(
            b, {kLeftHip, kRightHip, kLeftKnee, kRightKnee, kLeftAnkle, kRightAnkle, kLeftFoot, kRightFoot})) {
      j(b, 0) += 0.008 * sx * p[8];
    }
    // neck length
    if (b == kHead) {
      j(b, 1) += 0.012 * p[9];
    }
  }
  return j;
}

struct Segment {
  int bone = 0;
  Vec3 start;
  Vec3 end;
  double rx = 0.0;
  double rz = 0.0;
  double capStart = 0.0; // cap depth as a fraction of the mean radius, 0 = open
  double capEnd = 0.0;
  int blendStart = -1;
  int blendEnd = -1;
};

// Tube geometry per bone; every field is affine in the shape coefficients.
std::vector<Segment> shapedSegments(const ShapeCoeffs& p) {
  const Points j = shapedJoints(p);
  const double scale = 1.0 + 0.02 * p[0];
  auto J = [&](int b) -> Vec3 { return j.row(b).transpose(); };

  std::vector<Segment> segs;
  auto add = [&](int bone, Vec3 s, Vec3 e, double rx, double rz) -> Segment& {
    Segment seg;
    seg.bone = bone;
    seg.start = s;
    seg.end = e;
    const bool torso = inSet(bone, {kPelvis, kSpine1, kSpine2, kSpine3});
    const bool limb = !torso && !inSet(bone, {kNeck, kHead});
    seg.rx = rx * scale + 0.004 * p[4] + (torso ? 0.004 * p[5] : 0.0) + (limb ? 0.004 * p[6] : 0.0) +
        (bone == kPelvis ? 0.008 * p[8] : 0.0) + (bone == kHead ? 0.004 * p[9] : 0.0);
    seg.rz = rz * scale + 0.004 * p[4] + (torso ? 0.008 * p[5] : 0.0) + (limb ? 0.004 * p[6] : 0.0) +
        (bone == kHead ? 0.004 * p[9] : 0.0);
    segs.push_back(seg);
    return segs.back();
  };

  {
    auto& s = add(kPelvis, J(kPelvis) + Vec3(0, -0.10, 0) * scale, J(kSpine1), 0.15, 0.11);
    s.capStart = 0.45;
    s.blendEnd = kSpine1;
  }
  {
    auto& s = add(kSpine1, J(kSpine1), J(kSpine2), 0.14, 0.10);
    s.blendStart = kPelvis;
    s.blendEnd = kSpine2;
  }
  {
    auto& s = add(kSpine2, J(kSpine2), J(kSpine3), 0.145, 0.105);
    s.blendStart = kSpine1;
    s.blendEnd = kSpine3;
  }
  {
    auto& s = add(kSpine3, J(kSpine3), J(kNeck), 0.16, 0.11);
    s.blendStart = kSpine2;
    s.capEnd = 0.35;
  }
  {
    auto& s = add(kNeck, J(kNeck), J(kHead), 0.055, 0.055);
    s.blendStart = kSpine3;
    s.blendEnd = kHead;
  }
  {
    const Vec3 top = J(kHead) + Vec3(0, 0.19 * scale + 0.012 * p[9], 0.0);
    auto& s = add(kHead, J(kHead), top, 0.085, 0.095);
    s.blendStart = kNeck;
    s.capEnd = 0.9;
  }
  for (const int side : {0, 1}) {
    const int collar = kLeftCollar + side;
    const int shoulder = kLeftShoulder + side;
    const int elbow = kLeftElbow + side;
    const int wrist = kLeftWrist + side;
    const int hand = kLeftHand + side;
    const int hip = kLeftHip + side;
    const int knee = kLeftKnee + side;
    const int ankle = kLeftAnkle + side;
    const int foot = kLeftFoot + side;
    const double sx = sideSign(collar);

    const Vec3 lift(0.0, 0.03 * scale, 0.0);
    {
      auto& s = add(collar, J(collar) + lift, J(shoulder) + lift, 0.055, 0.055);
      s.blendStart = kSpine3;
      s.blendEnd = shoulder;
    }
    {
      auto& s = add(shoulder, J(shoulder), J(elbow), 0.05, 0.05);
      s.blendStart = collar;
      s.blendEnd = elbow;
    }
    {
      auto& s = add(elbow, J(elbow), J(wrist), 0.04, 0.04);
      s.blendStart = shoulder;
      s.blendEnd = wrist;
    }
    {
      auto& s = add(wrist, J(wrist), J(hand), 0.022, 0.03);
      s.blendStart = elbow;
      s.blendEnd = hand;
    }
    {
      auto& s = add(hand, J(hand), J(hand) + Vec3(sx * 0.08, 0, 0) * scale, 0.018, 0.027);
      s.blendStart = wrist;
      s.capEnd = 0.8;
    }
    {
      auto& s = add(hip, J(hip), J(knee), 0.075, 0.075);
      s.blendStart = kPelvis;
      s.blendEnd = knee;
    }
    {
      auto& s = add(knee, J(knee), J(ankle), 0.052, 0.052);
      s.blendStart = hip;
      s.blendEnd = ankle;
    }
    {
      auto& s = add(ankle, J(ankle), J(foot), 0.042, 0.038);
      s.blendStart = knee;
      s.blendEnd = foot;
      s.capStart = 0.6;
    }
    {
      auto& s = add(foot, J(foot), J(foot) + Vec3(0, 0, 0.05) * scale, 0.04, 0.02);
      s.blendStart = ankle;
      s.capEnd = 0.8;
    }
  }
  return segs;
}

// Per-segment sampling layout, fixed from the base shape so topology and
// ring frames do not depend on the coefficients.
struct SegmentLayout {
  Vec3 dir;
  Vec3 u;
  Vec3 w;
  int around = 0;
  int rings = 0;
  int capRings = 3;
};

SegmentLayout layoutFor(const Segment& s) {
  SegmentLayout l;
  const Vec3 axis = s.end - s.start;
  l.dir = axis.normalized();
  // lateral reference: x for vertical-ish bones, y otherwise
  const Vec3 ref = std::abs(l.dir.x()) < 0.7 ? Vec3::UnitX() : Vec3::UnitY();
  l.u = (ref - ref.dot(l.dir) * l.dir).normalized();
  l.w = l.dir.cross(l.u);
  const double circumference = std::numbers::pi * (s.rx + s.rz);
  l.around = std::clamp(static_cast<int>(std::lround(circumference / kRingSpacing)), 8, 64);
  l.rings = std::max(2, static_cast<int>(std::ceil(axis.norm() / kRingSpacing)) + 1);
  return l;
}

struct VertexTag {
  int segment;
  double s; // axial fraction along the tube, caps clamp to 0 or 1
  bool cap;
};

struct Topology {
  std::vector<SegmentLayout> layouts;
  std::vector<VertexTag> tags;
  std::vector<std::array<int, 3>> faces;
};

// Generates vertices for given coefficients; when `topo` is non-null the
// topology is (re)built as well.
Points buildVertices(const ShapeCoeffs& p, const std::vector<SegmentLayout>& layouts, Topology* topo) {
  const std::vector<Segment> segs = shapedSegments(p);
  std::vector<Vec3> verts;
  for (size_t si = 0; si < segs.size(); ++si) {
    const Segment& s = segs[si];
    const SegmentLayout& l = layouts[si];
    const int base = static_cast<int>(verts.size());
    auto ringPoint = [&](const Vec3& center, double radiusScale, int k) {
      const double a = 2.0 * std::numbers::pi * k / l.around;
      return Vec3(center + radiusScale * (s.rx * std::cos(a) * l.u + s.rz * std::sin(a) * l.w));
    };
    for (int r = 0; r < l.rings; ++r) {
      const double t = static_cast<double>(r) / (l.rings - 1);
      const Vec3 c = s.start + t * (s.end - s.start);
      for (int k = 0; k < l.around; ++k) {
        verts.push_back(ringPoint(c, 1.0, k));
        if (topo) {
          topo->tags.push_back({static_cast<int>(si), t, false});
        }
      }
    }
    auto ringIndex = [&](int r, int k) { return base + r * l.around + (k % l.around); };
    if (topo) {
      for (int r = 0; r + 1 < l.rings; ++r) {
        for (int k = 0; k < l.around; ++k) {
          topo->faces.push_back({ringIndex(r, k), ringIndex(r, k + 1), ringIndex(r + 1, k)});
          topo->faces.push_back({ringIndex(r, k + 1), ringIndex(r + 1, k + 1), ringIndex(r + 1, k)});
        }
      }
    }

    const double meanR = 0.5 * (s.rx + s.rz);
    auto addCap = [&](bool atEnd, double depthFrac) {
      const Vec3 center = atEnd ? s.end : s.start;
      const Vec3 out = atEnd ? Vec3(l.dir) : Vec3(-l.dir);
      const double depth = depthFrac * meanR;
      int prevBase = atEnd ? ringIndex(l.rings - 1, 0) : ringIndex(0, 0);
      for (int c = 1; c < l.capRings; ++c) {
        const double ang = 0.5 * std::numbers::pi * c / l.capRings;
        const int ringBase = static_cast<int>(verts.size());
        for (int k = 0; k < l.around; ++k) {
          verts.push_back(ringPoint(center + depth * std::sin(ang) * out, std::cos(ang), k));
          if (topo) {
            topo->tags.push_back({static_cast<int>(si), atEnd ? 1.0 : 0.0, true});
          }
        }
        if (topo) {
          for (int k = 0; k < l.around; ++k) {
            const int k1 = (k + 1) % l.around;
            topo->faces.push_back({prevBase + k, prevBase + k1, ringBase + k});
            topo->faces.push_back({prevBase + k1, ringBase + k1, ringBase + k});
          }
        }
        prevBase = ringBase;
      }
      const int pole = static_cast<int>(verts.size());
      verts.push_back(center + depth * out);
      if (topo) {
        topo->tags.push_back({static_cast<int>(si), atEnd ? 1.0 : 0.0, true});
        for (int k = 0; k < l.around; ++k) {
          topo->faces.push_back({prevBase + k, prevBase + (k + 1) % l.around, pole});
        }
      }
    };
    if (s.capStart > 0.0) {
      addCap(false, s.capStart);
    }
    if (s.capEnd > 0.0) {
      addCap(true, s.capEnd);
    }
  }
  Points out(static_cast<int>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) {
    out.row(static_cast<int>(i)) = verts[i].transpose();
  }
  return out;
}

double smoothstep(double a) {
  a = std::clamp(a, 0.0, 1.0);
  return a * a * (3.0 - 2.0 * a);
}

} // namespace

const std::vector<std::string>& smplBoneNames() {
  static const std::vector<std::string> names = {
      "pelvis",         "left_hip",       "right_hip",   "spine1",      "left_knee",  "right_knee",
      "spine2",         "left_ankle",     "right_ankle", "spine3",      "left_foot",  "right_foot",
      "neck",           "left_collar",    "right_collar", "head",       "left_shoulder", "right_shoulder",
      "left_elbow",     "right_elbow",    "left_wrist",  "right_wrist", "left_hand",  "right_hand"};
  return names;
}

const std::vector<int>& smplParents() {
  static const std::vector<int> parents = {
      kNoParent, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};
  return parents;
}

std::map<std::string, std::vector<std::string>> defaultPartTable() {
  return {
      {"left_arm", {"left_shoulder", "left_elbow", "left_wrist"}},
      {"left_leg", {"left_hip", "left_knee", "left_ankle", "left_foot"}},
      {"left_shoulder", {"spine3", "left_collar", "left_shoulder", "left_shoulder", "left_elbow"}},
      {"right_arm", {"right_shoulder", "right_elbow", "right_wrist"}},
      {"right_leg", {"right_hip", "right_knee", "right_ankle", "right_foot"}},
      {"right_shoulder", {"spine3", "right_collar", "right_shoulder", "right_shoulder", "right_elbow"}},
  };
}

BodyModel buildDefaultBodyModel() {
  const ShapeCoeffs zero{};
  const std::vector<Segment> baseSegs = shapedSegments(zero);

  Topology topo;
  for (const auto& s : baseSegs) {
    topo.layouts.push_back(layoutFor(s));
  }
  const Points templateVerts = buildVertices(zero, topo.layouts, &topo);
  const int nV = static_cast<int>(templateVerts.rows());

  BodyModelData d;
  d.templateVertices = templateVerts;
  d.restJoints = shapedJoints(zero);
  d.parents = smplParents();
  d.boneNames = smplBoneNames();
  d.partTable = defaultPartTable();

  // faces wound so the geometric normal points away from the tube axis or cap centre
  d.faces.resize(static_cast<int>(topo.faces.size()), 3);
  for (size_t f = 0; f < topo.faces.size(); ++f) {
    auto tri = topo.faces[f];
    const Vec3 a = templateVerts.row(tri[0]).transpose();
    const Vec3 b = templateVerts.row(tri[1]).transpose();
    const Vec3 c = templateVerts.row(tri[2]).transpose();
    const Vec3 centroid = (a + b + c) / 3.0;
    const Segment& seg = baseSegs[topo.tags[tri[0]].segment];
    const Vec3 axis = seg.end - seg.start;
    const double t = std::clamp((centroid - seg.start).dot(axis) / axis.squaredNorm(), 0.0, 1.0);
    const Vec3 outward = centroid - (seg.start + t * axis);
    if ((b - a).cross(c - a).dot(outward) < 0.0) {
      std::swap(tri[1], tri[2]);
    }
    d.faces.row(static_cast<int>(f)) << tri[0], tri[1], tri[2];
  }

  d.lbsWeights = Eigen::MatrixXd::Zero(nV, kNumBones);
  for (int v = 0; v < nV; ++v) {
    const VertexTag& tag = topo.tags[v];
    const Segment& seg = baseSegs[tag.segment];
    const double length = (seg.end - seg.start).norm();
    const double band = std::min(0.3, 0.06 / length);
    double own = 1.0;
    if (!tag.cap) {
      if (seg.blendEnd >= 0 && tag.s > 1.0 - band) {
        const double share = 0.5 * (1.0 - smoothstep((1.0 - tag.s) / band));
        d.lbsWeights(v, seg.blendEnd) += share;
        own -= share;
      }
      if (seg.blendStart >= 0 && tag.s < band) {
        const double share = 0.5 * (1.0 - smoothstep(tag.s / band));
        d.lbsWeights(v, seg.blendStart) += share;
        own -= share;
      }
    }
    d.lbsWeights(v, seg.bone) += own;
  }

  // shape directions: the builder is affine in the coefficients
  d.shapeBasis.resize(3 * nV, kNumShapes);
  d.jointShapeBasis.resize(3 * kNumBones, kNumShapes);
  for (int k = 0; k < kNumShapes; ++k) {
    ShapeCoeffs e{};
    e[k] = 1.0;
    const Points dv = buildVertices(e, topo.layouts, nullptr) - templateVerts;
    const Points dj = shapedJoints(e) - d.restJoints;
    d.shapeBasis.col(k) = Eigen::Map<const Eigen::VectorXd>(dv.data(), dv.size());
    d.jointShapeBasis.col(k) = Eigen::Map<const Eigen::VectorXd>(dj.data(), dj.size());
  }
  return BodyModel(std::move(d));
}

int mirrorBone(const BodyModel& model, int bone) {
  const std::string& name = model.boneName(bone);
  if (name.rfind("left_", 0) == 0) {
    return model.boneIndex("right_" + name.substr(5));
  }
  if (name.rfind("right_", 0) == 0) {
    return model.boneIndex("left_" + name.substr(6));
  }
  return bone;
}

} // namespace mocap
