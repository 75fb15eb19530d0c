#include "mocap/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mocap/objectives.h"

namespace mocap {

MarkerPlacement MarkerPlacement::prefix(int n) const {
  if (n < 0 || n > size()) {
    throw std::invalid_argument("MarkerPlacement::prefix: count out of range");
  }
  MarkerPlacement out;
  out.triangles.assign(triangles.begin(), triangles.begin() + n);
  out.barycentric = barycentric.topRows(n);
  out.offsets.assign(offsets.begin(), offsets.begin() + n);
  return out;
}

void MarkerPlacement::validate(const BodyModel& model) const {
  if (barycentric.rows() != size() || barycentric.cols() != 3 || static_cast<int>(offsets.size()) != size()) {
    throw std::invalid_argument("MarkerPlacement: inconsistent sizes");
  }
  for (int i = 0; i < size(); ++i) {
    if (triangles[i] < 0 || triangles[i] >= model.numFaces()) {
      throw std::invalid_argument("MarkerPlacement: triangle index out of range");
    }
    if ((barycentric.row(i).array() < 0.0).any() || std::abs(barycentric.row(i).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("MarkerPlacement: invalid barycentric coordinates");
    }
  }
}

MarkerPlacement sampleLayout(
    const BodyModel& model,
    int numMarkers,
    std::uint64_t seed,
    const std::vector<int>& faceSubset,
    double offset) {
  if (numMarkers < 1) {
    throw std::invalid_argument("sampleLayout: need at least one marker");
  }
  const auto& d = model.data();
  std::vector<int> faces = faceSubset;
  if (faces.empty()) {
    faces.resize(model.numFaces());
    for (int f = 0; f < model.numFaces(); ++f) {
      faces[f] = f;
    }
  }
  std::vector<double> cumulative(faces.size());
  double total = 0.0;
  for (size_t i = 0; i < faces.size(); ++i) {
    const int f = faces[i];
    if (f < 0 || f >= model.numFaces()) {
      throw std::invalid_argument("sampleLayout: face index out of range");
    }
    const Vec3 a = d.templateVertices.row(d.faces(f, 0)).transpose();
    const Vec3 b = d.templateVertices.row(d.faces(f, 1)).transpose();
    const Vec3 c = d.templateVertices.row(d.faces(f, 2)).transpose();
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative[i] = total;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("sampleLayout: surface has zero area");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  MarkerPlacement out;
  out.triangles.resize(numMarkers);
  out.barycentric.resize(numMarkers, 3);
  out.offsets.assign(numMarkers, offset);
  for (int i = 0; i < numMarkers; ++i) {
    const double pick = uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) {
      --it;
    }
    out.triangles[i] = faces[it - cumulative.begin()];
    const double s = std::sqrt(uniform(rng));
    const double r = uniform(rng);
    out.barycentric.row(i) << 1.0 - s, s * (1.0 - r), s * r;
  }
  return out;
}

std::vector<int> partFaces(const BodyModel& model, std::span<const int> bones) {
  const std::vector<int> verts = partVertices(model, bones);
  std::vector<char> member(model.numVertices(), 0);
  for (const int v : verts) {
    member[v] = 1;
  }
  const auto& F = model.data().faces;
  std::vector<int> out;
  for (int f = 0; f < model.numFaces(); ++f) {
    if (member[F(f, 0)] && member[F(f, 1)] && member[F(f, 2)]) {
      out.push_back(f);
    }
  }
  return out;
}

MarkerSequence animateMarkers(
    const BodyModel& model,
    const BodyParams& params,
    const MarkerPlacement& placement,
    double frameRate) {
  placement.validate(model);
  params.validate(model);
  const auto& F = model.data().faces;
  const std::vector<Points> tracks = posedVertexTracks(model, params);
  MarkerSequence out;
  out.frameRate = frameRate;
  out.positions.resize(params.numFrames());
  out.visible = VisibilityMask::Constant(params.numFrames(), placement.size(), true);
  for (int i = 0; i < placement.size(); ++i) {
    out.markerIds.push_back("m" + std::to_string(i));
  }
  for (int t = 0; t < params.numFrames(); ++t) {
    Points& P = out.positions[t];
    P.resize(placement.size(), 3);
    for (int i = 0; i < placement.size(); ++i) {
      const int f = placement.triangles[i];
      const Vec3 a = tracks[t].row(F(f, 0)).transpose();
      const Vec3 b = tracks[t].row(F(f, 1)).transpose();
      const Vec3 c = tracks[t].row(F(f, 2)).transpose();
      const Vec3 normal = (b - a).cross(c - a).normalized();
      const Eigen::RowVector3d w = placement.barycentric.row(i);
      P.row(i) = (w[0] * a + w[1] * b + w[2] * c + placement.offsets[i] * normal).transpose();
    }
  }
  return out;
}

MarkerSequence dropout(const MarkerSequence& markers, double probability, int durationFrames, std::uint64_t seed) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw std::invalid_argument("dropout: probability must lie in [0, 1]");
  }
  if (durationFrames < 1) {
    throw std::invalid_argument("dropout: duration must be positive");
  }
  MarkerSequence out = markers;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<int> hiddenUntil(markers.numMarkers(), 0);
  for (int t = 0; t < markers.numFrames(); ++t) {
    for (int m = 0; m < markers.numMarkers(); ++m) {
      const double u = uniform(rng);
      if (t < hiddenUntil[m]) {
        out.visible(t, m) = false;
      } else if (markers.visible(t, m) && u < probability) {
        hiddenUntil[m] = t + durationFrames;
        out.visible(t, m) = false;
      }
    }
  }
  return out;
}

SyntheticPrior perturbPrior(const BodyParams& truth, const PriorNoise& noise, std::uint64_t seed, const Vec3& upAxis) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SyntheticPrior out;
  out.params = truth;
  BodyParams& p = out.params;
  if (noise.sigmaTheta > 0.0) {
    for (long i = 0; i < p.theta.size(); ++i) {
      p.theta.data()[i] += noise.sigmaTheta * normal(rng);
    }
  }
  if (noise.sigmaBeta > 0.0) {
    for (long i = 0; i < p.beta.size(); ++i) {
      p.beta[i] += noise.sigmaBeta * normal(rng);
    }
  }
  if (noise.yaw != 0.0) {
    const Mat3 yaw = axisRotation(upAxis, noise.yaw);
    for (int t = 0; t < p.numFrames(); ++t) {
      p.phi.row(t) = matrixToAxisAngle(yaw * axisAngleToMatrix(p.phi.row(t).transpose())).transpose();
    }
  }
  if (noise.invalidateTranslation) {
    p.gamma.setZero();
  }
  out.present.assign(p.numFrames(), true);
  for (const auto& [first, last] : noise.gaps) {
    for (int t = std::max(first, 0); t <= std::min(last, p.numFrames() - 1); ++t) {
      out.present[t] = false;
    }
  }
  return out;
}

const std::vector<std::string>& motionNames() {
  static const std::vector<std::string> names{"walk", "squat", "arm_raise", "static"};
  return names;
}

namespace {

struct Poser {
  const BodyModel& model;
  BodyParams& params;
  int t;

  void set(const std::string& bone, const Mat3& R) {
    params.setRotation(t, model.boneIndex(bone), matrixToAxisAngle(R));
  }
};

Mat3 rx(double a) {
  return axisRotation(Vec3::UnitX(), a);
}
Mat3 ry(double a) {
  return axisRotation(Vec3::UnitY(), a);
}
Mat3 rz(double a) {
  return axisRotation(Vec3::UnitZ(), a);
}

double smooth01(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

} // namespace

BodyParams generateMotion(const BodyModel& model, const std::string& name, int numFrames, double frameRate,
                          std::uint64_t seed) {
  if (numFrames < 1 || !(frameRate > 0.0)) {
    throw std::invalid_argument("generateMotion: need at least one frame and a positive frame rate");
  }
  if (std::find(motionNames().begin(), motionNames().end(), name) == motionNames().end()) {
    throw std::invalid_argument("generateMotion: unknown motion '" + name + "'");
  }
  constexpr double pi = std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  BodyParams p = BodyParams::zeros(numFrames, model.numBones(), model.numShapes());
  for (int s = 0; s < model.numShapes(); ++s) {
    p.beta[s] = std::clamp(0.5 * normal(rng), -1.5, 1.5);
  }
  const double amp = 0.85 + 0.3 * uniform(rng);
  const double phase0 = 2.0 * pi * uniform(rng);
  const double heading = 2.0 * pi * uniform(rng);
  const double armDown = 1.2 + 0.15 * uniform(rng);
  const Mat3 headingRot = ry(heading);
  const Vec3 forward = headingRot * Vec3::UnitZ();
  const Vec3 side = headingRot * Vec3::UnitX();

  for (int t = 0; t < numFrames; ++t) {
    const double time = t / frameRate;
    Poser pose{model, p, t};
    Mat3 root = headingRot;
    Vec3 gamma = Vec3::Zero();
    double lShoulderZ = -armDown;
    double rShoulderZ = armDown;
    double armSwing = 0.0;
    double armForward = 0.0;

    if (name == "walk") {
      const double ph = 2.0 * pi * 0.9 * time + phase0;
      const double s = std::sin(ph);
      const double c = std::cos(ph);
      pose.set("left_hip", rx(-0.45 * amp * s));
      pose.set("right_hip", rx(0.45 * amp * s));
      pose.set("left_knee", rx(0.1 + 0.5 * amp * (0.5 - 0.5 * c)));
      pose.set("right_knee", rx(0.1 + 0.5 * amp * (0.5 + 0.5 * c)));
      pose.set("left_ankle", rx(0.15 * amp * s));
      pose.set("right_ankle", rx(-0.15 * amp * s));
      pose.set("spine1", ry(0.06 * s));
      pose.set("spine3", ry(-0.08 * s));
      pose.set("left_elbow", ry(-0.3 * amp));
      pose.set("right_elbow", ry(0.3 * amp));
      armSwing = 0.35 * amp * s;
      root = headingRot * ry(0.05 * s);
      gamma = 1.1 * amp * time * forward + 0.02 * s * side + Vec3(0.0, 0.015 * std::cos(2.0 * ph), 0.0);
    } else if (name == "squat") {
      const double u = 0.5 - 0.5 * std::cos(2.0 * pi * time / 2.5 + phase0);
      pose.set("left_hip", rx(-1.2 * amp * u));
      pose.set("right_hip", rx(-1.2 * amp * u));
      pose.set("left_knee", rx(1.9 * amp * u));
      pose.set("right_knee", rx(1.9 * amp * u));
      pose.set("left_ankle", rx(-0.5 * amp * u));
      pose.set("right_ankle", rx(-0.5 * amp * u));
      pose.set("spine1", rx(0.3 * amp * u));
      armForward = -1.1 * amp * u;
      gamma = Vec3(0.0, -0.32 * amp * u, 0.0) - 0.12 * u * forward;
    } else if (name == "arm_raise") {
      const double u = smooth01(0.5 - 0.5 * std::cos(2.0 * pi * time / 3.0 + phase0));
      lShoulderZ = -armDown + 2.3 * amp * u;
      rShoulderZ = armDown - 2.3 * amp * u;
      pose.set("spine2", rz(0.05 * std::sin(2.0 * pi * time / 3.0)));
      pose.set("left_elbow", ry(-0.2 * (1.0 - u)));
      pose.set("right_elbow", ry(0.2 * (1.0 - u)));
    } else { // static
      const double sway = 0.02 * std::sin(2.0 * pi * 0.3 * time + phase0);
      pose.set("spine1", rz(sway));
      pose.set("neck", rx(0.1 * amp));
      pose.set("left_elbow", ry(-0.25));
      pose.set("right_elbow", ry(0.25));
    }

    pose.set("left_shoulder", rx(armSwing + armForward) * rz(lShoulderZ));
    pose.set("right_shoulder", rx(-armSwing + armForward) * rz(rShoulderZ));
    p.phi.row(t) = matrixToAxisAngle(root).transpose();
    p.gamma.row(t) = gamma.transpose();
  }
  return p;
}

Scenario makeScenario(const BodyModel& model, const ScenarioSpec& spec, const Vec3& upAxis) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  Scenario sc;
  sc.truth = generateMotion(model, spec.motion, spec.frames, spec.frameRate, spec.seed);

  std::vector<int> faces;
  if (!spec.part.empty()) {
    faces = partFaces(model, model.partBones(spec.part));
    if (faces.empty()) {
      throw std::invalid_argument("makeScenario: part '" + spec.part + "' has no faces");
    }
  }
  sc.placement = sampleLayout(model, spec.markers, spec.seed, faces);
  sc.markers = animateMarkers(model, sc.truth, sc.placement, spec.frameRate);
  if (spec.dropoutProbability > 0.0) {
    sc.markers = dropout(sc.markers, spec.dropoutProbability, spec.dropoutFrames, spec.seed + 3000);
  }

  if (spec.yawDeg) {
    sc.yawDeg = *spec.yawDeg;
  } else {
    std::mt19937_64 rng(spec.seed + 2000);
    sc.yawDeg = 90.0 * std::uniform_int_distribution<int>(0, 3)(rng);
  }
  PriorNoise noise;
  noise.sigmaTheta = spec.sigmaThetaDeg * kDeg;
  noise.sigmaBeta = spec.sigmaBeta;
  noise.yaw = sc.yawDeg * kDeg;
  noise.invalidateTranslation = spec.invalidateTranslation;
  noise.gaps = spec.priorGaps;
  sc.prior = perturbPrior(sc.truth, noise, spec.seed + 1000, upAxis);
  return sc;
}

} // namespace mocap
