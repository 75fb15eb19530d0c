#include "fixtures.h"

#include <algorithm>
#include <string>

#include "mocap/posing.h"

namespace fixtures {

BodyModel toyModel(std::uint64_t seed, int numVertices) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  mocap::BodyModelData d;
  d.parents = {mocap::kNoParent, 0, 1, 1, 2, 3};
  const int B = static_cast<int>(d.parents.size());
  for (int b = 0; b < B; ++b) {
    d.boneNames.push_back("b" + std::to_string(b));
  }
  d.restJoints.resize(B, 3);
  d.restJoints.row(0) << 0.0, 0.0, 0.0;
  for (int b = 1; b < B; ++b) {
    const Eigen::RowVector3d step(0.15 * n01(rng), 0.2 + 0.05 * u01(rng), 0.15 * n01(rng));
    d.restJoints.row(b) = d.restJoints.row(d.parents[b]) + step;
  }

  d.templateVertices.resize(numVertices, 3);
  d.lbsWeights = Eigen::MatrixXd::Zero(numVertices, B);
  std::uniform_int_distribution<int> pickBone(0, B - 1);
  std::uniform_int_distribution<int> pickCount(1, 3);
  for (int v = 0; v < numVertices; ++v) {
    const int home = pickBone(rng);
    d.templateVertices.row(v) = d.restJoints.row(home) + 0.05 * Eigen::RowVector3d(n01(rng), n01(rng), n01(rng));
    const int k = pickCount(rng);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      const int b = i == 0 ? home : pickBone(rng);
      const double w = 0.2 + u01(rng);
      d.lbsWeights(v, b) += w;
      total += w;
    }
    d.lbsWeights.row(v) /= total;
  }

  const int F = numVertices;
  d.faces.resize(F, 3);
  std::uniform_int_distribution<int> pickVertex(0, numVertices - 1);
  for (int f = 0; f < F; ++f) {
    int a = pickVertex(rng), b, c;
    do {
      b = pickVertex(rng);
    } while (b == a);
    do {
      c = pickVertex(rng);
    } while (c == a || c == b);
    d.faces.row(f) << a, b, c;
  }

  const int S = 4;
  d.shapeBasis.resize(3 * numVertices, S);
  d.jointShapeBasis.resize(3 * B, S);
  for (int i = 0; i < d.shapeBasis.size(); ++i) {
    d.shapeBasis.data()[i] = 0.01 * n01(rng);
  }
  for (int i = 0; i < d.jointShapeBasis.size(); ++i) {
    d.jointShapeBasis.data()[i] = 0.01 * n01(rng);
  }
  d.partTable = {{"tip", {"b2", "b4"}}};
  return BodyModel(std::move(d));
}

BodyParams randomParams(const BodyModel& model, int numFrames, std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> n01(0.0, 1.0);
  BodyParams p = BodyParams::zeros(numFrames, model.numBones(), model.numShapes());
  for (int i = 0; i < p.beta.size(); ++i) {
    p.beta[i] = 0.5 * n01(rng);
  }
  for (int i = 0; i < p.phi.size(); ++i) {
    p.phi.data()[i] = spread * n01(rng);
  }
  for (int i = 0; i < p.theta.size(); ++i) {
    p.theta.data()[i] = spread * n01(rng);
  }
  for (int i = 0; i < p.gamma.size(); ++i) {
    p.gamma.data()[i] = 0.1 * n01(rng);
  }
  return p;
}

namespace {

void finishMarkers(MarkerSequence& mk, std::mt19937_64& rng, double hideProbability) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int T = mk.numFrames();
  const int M = static_cast<int>(mk.positions[0].rows());
  mk.visible.resize(T, M);
  for (int t = 0; t < T; ++t) {
    for (int m = 0; m < M; ++m) {
      mk.visible(t, m) = u01(rng) >= hideProbability;
    }
    if (!mk.visible.row(t).any()) {
      mk.visible(t, static_cast<int>(u01(rng) * M) % M) = true;
    }
  }
  for (int m = 0; m < M; ++m) {
    mk.markerIds.push_back("m" + std::to_string(m));
  }
}

} // namespace

MarkerSequence markersNear(const std::vector<Points>& tracks, int numMarkers, std::mt19937_64& rng,
                           double hideProbability, double noise) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_int_distribution<int> pickVertex(0, static_cast<int>(tracks[0].rows()) - 1);
  std::vector<int> anchor(numMarkers);
  for (int& a : anchor) {
    a = pickVertex(rng);
  }
  MarkerSequence mk;
  for (const Points& frame : tracks) {
    Points p(numMarkers, 3);
    for (int m = 0; m < numMarkers; ++m) {
      p.row(m) = frame.row(anchor[m]) + noise * Eigen::RowVector3d(n01(rng), n01(rng), n01(rng));
    }
    mk.positions.push_back(p);
  }
  finishMarkers(mk, rng, hideProbability);
  return mk;
}

MarkerSequence randomMarkers(int numFrames, int numMarkers, std::mt19937_64& rng, double hideProbability) {
  MarkerSequence mk;
  for (const Points& frame : randomTracks(numFrames, numMarkers, rng)) {
    mk.positions.push_back(frame);
  }
  finishMarkers(mk, rng, hideProbability);
  return mk;
}

std::vector<Points> randomTracks(int numFrames, int numPoints, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Points> out(numFrames, Points(numPoints, 3));
  for (Points& p : out) {
    for (int i = 0; i < p.size(); ++i) {
      p.data()[i] = u(rng);
    }
  }
  return out;
}

double relativeError(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

double relativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

GradientCheck checkGradient(const mocap::EnergyInputs& in, const mocap::EnergyWeights& w, const BodyParams& params,
                            double yaw, double h, const std::vector<int>& coords) {
  mocap::FreeMask mask = mocap::FreeMask::all(in.model->numBones());
  mask.yaw = true;
  const mocap::ParamPacker packer(params, mask);
  const Eigen::VectorXd x0 = packer.pack(params, yaw);

  mocap::ParamGradient g = mocap::ParamGradient::zerosLike(params);
  mocap::evaluateEnergy(in, w, params, yaw, &g);
  const Eigen::VectorXd full = packer.packGradient(g);

  std::vector<int> idx = coords;
  if (idx.empty()) {
    idx.resize(x0.size());
    for (int i = 0; i < x0.size(); ++i) {
      idx[i] = i;
    }
  }
  auto f = [&](const Eigen::VectorXd& x) {
    BodyParams p = params;
    double y = yaw;
    packer.unpack(x, p, y);
    return mocap::evaluateEnergy(in, w, p, y).total;
  };
  GradientCheck out;
  out.analytic.resize(static_cast<int>(idx.size()));
  out.numeric.resize(static_cast<int>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp[idx[k]] += h;
    xm[idx[k]] -= h;
    out.numeric[static_cast<int>(k)] = (f(xp) - f(xm)) / (2.0 * h);
    out.analytic[static_cast<int>(k)] = full[idx[k]];
  }
  out.relError = relativeError(out.analytic, out.numeric);
  return out;
}

} // namespace fixtures
